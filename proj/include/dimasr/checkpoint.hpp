#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dimasr/config.hpp"
#include "dimasr/encoding.hpp"
#include "dimasr/regressor.hpp"

namespace dimasr {

struct Checkpoint {
    std::string id;
    encoding::EncoderSpec encoder;
    TrainConfig config;
    regressor::Model model;
    double best_val_rmse = 0.0;
    int epoch_of_best = 0;

    // "DIMASR-CKPT 1\n", one line of JSON header, then the Model::flatten()
    // payload as little-endian IEEE-754 doubles. Loading and re-saving
    // reproduces the bytes exactly.
    std::string serialize() const;
    static Checkpoint deserialize(std::string_view bytes);

    void save(const std::filesystem::path& path) const;
    static Checkpoint load(const std::filesystem::path& path);

    bool operator==(const Checkpoint&) const = default;
};

}  // namespace dimasr
