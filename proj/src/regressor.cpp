#include "dimasr/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dimasr::regressor {

HeadParams HeadParams::init(int d, bool bounded, double dropout_rate, Rng& rng) {
    HeadParams p;
    p.dim = d;
    p.bounded = bounded;
    p.dropout_rate = dropout_rate;
    const double limit = 1.0 / std::sqrt(static_cast<double>(d));
    p.weight.resize(2 * static_cast<std::size_t>(d));
    for (auto& w : p.weight) w = rng.uniform(-limit, limit);
    p.validate();
    return p;
}

void HeadParams::validate() const {
    if (dim <= 0 || weight.size() != 2 * static_cast<std::size_t>(dim)) {
        throw Error("head weight must be 2 x d with d > 0");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error("dropout_rate must lie in [0, 1)");
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double bound_component(double z) {
    static const double lo = std::nextafter(kVaMin, kVaMax);
    static const double hi = std::nextafter(kVaMax, kVaMin);
    const double v = z >= 0.0 ? kVaMax - 8.0 * sigmoid(-z) : kVaMin + 8.0 * sigmoid(z);
    return std::clamp(v, lo, hi);
}

VAScore bound(const RawPrediction& raw) {
    return {bound_component(raw.y[0]), bound_component(raw.y[1])};
}

VAScore output(const RawPrediction& raw, bool bounded) {
    return bounded ? bound(raw) : VAScore{raw.y[0], raw.y[1]};
}

namespace {

// Per-component multiplier applied to the embedding: 0 for dropped units,
// 1/(1-p) for kept ones, 1 everywhere outside training.
std::vector<double> dropout_scale(std::size_t d, const HeadParams& params, Mode mode, Rng* rng) {
    std::vector<double> scale(d, 1.0);
    if (mode == Mode::Infer || params.dropout_rate == 0.0) return scale;
    if (!rng) throw Error("train-mode forward with dropout needs an rng");
    const double keep = 1.0 / (1.0 - params.dropout_rate);
    for (auto& s : scale) s = rng->uniform() < params.dropout_rate ? 0.0 : keep;
    return scale;
}

RawPrediction linear(std::span<const double> h, const HeadParams& params) {
    const auto d = static_cast<std::size_t>(params.dim);
    RawPrediction out;
    for (std::size_t k = 0; k < 2; ++k) {
        double acc = params.bias[k];
        for (std::size_t j = 0; j < d; ++j) acc += params.weight[k * d + j] * h[j];
        out.y[k] = acc;
    }
    return out;
}

void check_dim(std::span<const double> e, const HeadParams& params) {
    if (e.size() != static_cast<std::size_t>(params.dim)) {
        throw Error("embedding dimension " + std::to_string(e.size()) + " != head dimension " +
                    std::to_string(params.dim));
    }
}

}  // namespace

RawPrediction forward(std::span<const double> embedding, const HeadParams& params, Mode mode,
                      Rng* rng) {
    check_dim(embedding, params);
    const auto scale = dropout_scale(embedding.size(), params, mode, rng);
    std::vector<double> h(embedding.size());
    for (std::size_t j = 0; j < h.size(); ++j) h[j] = embedding[j] * scale[j];
    return linear(h, params);
}

double mse_loss(std::span<const VAScore> pred, std::span<const VAScore> gold) {
    if (pred.empty()) throw Error("mse_loss of an empty batch");
    if (pred.size() != gold.size()) throw Error("mse_loss: prediction/gold length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double dv = pred[i].valence - gold[i].valence;
        const double da = pred[i].arousal - gold[i].arousal;
        sum += dv * dv + da * da;
    }
    return sum / (2.0 * static_cast<double>(pred.size()));
}

std::size_t Model::parameter_count() const {
    return head.weight.size() + 2 + encoder.proj.size() + encoder.bias.size();
}

std::vector<double> Model::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    out.insert(out.end(), head.weight.begin(), head.weight.end());
    out.insert(out.end(), head.bias.begin(), head.bias.end());
    out.insert(out.end(), encoder.proj.begin(), encoder.proj.end());
    out.insert(out.end(), encoder.bias.begin(), encoder.bias.end());
    return out;
}

void Model::unflatten(std::span<const double> values) {
    if (values.size() != parameter_count()) {
        throw Error("parameter payload has " + std::to_string(values.size()) +
                    " values, model expects " + std::to_string(parameter_count()));
    }
    auto it = values.begin();
    const auto take = [&](auto& dst) {
        std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
        it += static_cast<std::ptrdiff_t>(dst.size());
    };
    take(head.weight);
    take(head.bias);
    take(encoder.proj);
    take(encoder.bias);
}

VAScore predict(const Model& model, std::span<const double> features) {
    const auto e = model.encoder.apply(features);
    return output(forward(e, model.head, Mode::Infer, nullptr), model.head.bounded);
}

std::vector<VAScore> predict(const Model& model, std::span<const encoding::Embedding> features) {
    std::vector<VAScore> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(predict(model, f));
    return out;
}

LossAndGradient loss_and_gradient(const Model& model, std::span<const encoding::Embedding> features,
                                  std::span<const VAScore> gold, Mode mode, Rng* rng) {
    if (features.empty()) throw Error("gradient of an empty batch");
    if (features.size() != gold.size()) throw Error("feature/gold length mismatch");

    const auto& head = model.head;
    const auto& enc = model.encoder;
    const auto d = static_cast<std::size_t>(head.dim);
    const double n = static_cast<double>(features.size());

    LossAndGradient out;
    out.gradient.assign(model.parameter_count(), 0.0);
    double* g_w = out.gradient.data();
    double* g_b = g_w + 2 * d;
    double* g_p = g_b + 2;
    double* g_c = g_p + enc.proj.size();

    std::vector<double> h(d), dh(d);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto e = enc.apply(features[i]);
        check_dim(e, head);
        const auto scale = dropout_scale(d, head, mode, rng);
        for (std::size_t j = 0; j < d; ++j) h[j] = e[j] * scale[j];
        const auto raw = linear(h, head);
        const auto y = output(raw, head.bounded);
        const std::array<double, 2> err{y.valence - gold[i].valence, y.arousal - gold[i].arousal};
        out.loss += (err[0] * err[0] + err[1] * err[1]) / (2.0 * n);

        std::array<double, 2> dz{};
        for (std::size_t k = 0; k < 2; ++k) {
            dz[k] = err[k] / n;
            if (head.bounded) dz[k] *= 8.0 * sigmoid(raw.y[k]) * sigmoid(-raw.y[k]);
        }
        for (std::size_t j = 0; j < d; ++j) dh[j] = 0.0;
        for (std::size_t k = 0; k < 2; ++k) {
            g_b[k] += dz[k];
            for (std::size_t j = 0; j < d; ++j) {
                g_w[k * d + j] += dz[k] * h[j];
                dh[j] += head.weight[k * d + j] * dz[k];
            }
        }
        if (!enc.empty()) {
            const auto& f = features[i];
            for (std::size_t j = 0; j < d; ++j) {
                const double de = dh[j] * scale[j];
                g_c[j] += de;
                for (std::size_t l = 0; l < d; ++l) g_p[j * d + l] += de * f[l];
            }
        }
    }
    return out;
}

}  // namespace dimasr::regressor
