#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dimasr {

enum class Regime { Joint, Separate };

std::string to_string(Regime r);
Regime parse_regime(std::string_view s);

// AdamW with decoupled weight decay.
struct OptimizerSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;

    bool operator==(const OptimizerSettings&) const = default;
};

struct TrainConfig {
    int batch_size = 32;
    double learning_rate = 1e-5;
    int max_epochs = 5;
    bool bounded = true;
    std::uint64_t seed = 42;
    int patience = 2;
    Regime regime = Regime::Joint;
    double dropout_rate = 0.1;
    OptimizerSettings optimizer;
    // Lifts the batch-size {16, 32, 64} and learning-rate [8e-6, 3e-5]
    // restriction, e.g. for desk-scale runs of the toy backend.
    bool off_grid = false;

    void validate() const;
    nlohmann::json to_json() const;
    // Missing keys keep their defaults.
    static TrainConfig from_json(const nlohmann::json& j);
    bool operator==(const TrainConfig&) const = default;
};

// The seven candidate recipes (batch, lr, epochs, sigmoid) in M1..M7 order:
// M1 16/1e-5/7/yes, M2 32/1e-5/3/no, M3 32/1e-5/5/yes, M4 32/1e-5/7/yes,
// M5 32/2e-5/5/yes, M6 32/8e-6/3/yes, M7 32/8e-6/7/no.
std::vector<TrainConfig> default_candidate_grid();

}  // namespace dimasr
