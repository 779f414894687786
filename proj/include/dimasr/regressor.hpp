#pragma once

#include <array>
#include <span>
#include <vector>

#include "dimasr/encoding.hpp"
#include "dimasr/rng.hpp"
#include "dimasr/types.hpp"

namespace dimasr::regressor {

enum class Mode { Train, Infer };

// Two-output linear head over a d-dimensional sequence representation:
// y = W Dropout(e) + b, optionally mapped into (1, 9) by bound().
struct HeadParams {
    int dim = 0;
    std::vector<double> weight;  // 2 x dim, row-major (row 0 valence, row 1 arousal)
    std::array<double, 2> bias{0.0, 0.0};
    double dropout_rate = 0.1;
    bool bounded = true;

    // W ~ U[-1/sqrt(d), 1/sqrt(d)], b = 0.
    static HeadParams init(int d, bool bounded, double dropout_rate, Rng& rng);
    void validate() const;
    bool operator==(const HeadParams&) const = default;
};

struct RawPrediction {
    std::array<double, 2> y{0.0, 0.0};
};

double sigmoid(double z);
// 1 + 8 sigmoid(z), evaluated from the nearer asymptote and kept strictly
// inside (1, 9) even where the exact value is not representable.
double bound_component(double z);
VAScore bound(const RawPrediction& raw);
// bound() for bounded heads, identity otherwise.
VAScore output(const RawPrediction& raw, bool bounded);

// Inverted dropout in Train mode (kept units scaled by 1/(1-p)); `rng` is
// only consulted in Train mode with a nonzero rate.
RawPrediction forward(std::span<const double> embedding, const HeadParams& params, Mode mode,
                      Rng* rng);

// Mean over instances and both dimensions of the squared error.
double mse_loss(std::span<const VAScore> pred, std::span<const VAScore> gold);

// Everything the trainer updates: the optional toy encoder layer and the head.
struct Model {
    encoding::EncoderParams encoder;
    HeadParams head;

    std::size_t parameter_count() const;
    // Payload order: W, b, then P, c when the encoder layer is present.
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> values);
    bool operator==(const Model&) const = default;
};

VAScore predict(const Model& model, std::span<const double> features);
std::vector<VAScore> predict(const Model& model, std::span<const encoding::Embedding> features);

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient;  // same layout as Model::flatten()
};

// MSE over the batch (on bounded outputs for bounded heads) and its exact
// gradient through head, dropout mask and encoder layer.
LossAndGradient loss_and_gradient(const Model& model, std::span<const encoding::Embedding> features,
                                  std::span<const VAScore> gold, Mode mode, Rng* rng);

}  // namespace dimasr::regressor
