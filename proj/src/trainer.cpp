#include "dimasr/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "dimasr/metrics.hpp"

namespace dimasr::trainer {

AdamW::AdamW(std::size_t size, double learning_rate, const OptimizerSettings& settings)
    : lr_(learning_rate), s_(settings), m_(size, 0.0), v_(size, 0.0) {}

void AdamW::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw Error("optimizer state size mismatch");
    }
    ++t_;
    const double c1 = 1.0 - std::pow(s_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(s_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = s_.beta1 * m_[i] + (1.0 - s_.beta1) * grad[i];
        v_[i] = s_.beta2 * v_[i] + (1.0 - s_.beta2) * grad[i] * grad[i];
        params[i] -= lr_ * s_.weight_decay * params[i];
        params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + s_.epsilon);
    }
}

EarlyStopping::EarlyStopping(int patience, double min_delta)
    : patience_(patience), min_delta_(min_delta), best_(std::numeric_limits<double>::infinity()) {}

bool EarlyStopping::observe(double score) {
    ++epochs_;
    if (epochs_ == 1 || score < best_ - min_delta_) {
        best_ = score;
        best_epoch_ = epochs_;
        bad_epochs_ = 0;
        return true;
    }
    ++bad_epochs_;
    return false;
}

std::string format_log(const std::vector<EpochLog>& epochs) {
    std::string out;
    char buf[160];
    for (const auto& e : epochs) {
        std::snprintf(buf, sizeof buf, "epoch %d train_loss %.6f val_rmse_va %.6f%s\n", e.epoch,
                      e.train_loss, e.val_rmse, e.improved ? " *" : "");
        out += buf;
    }
    return out;
}

namespace {

std::vector<VAScore> gold_scores(const std::vector<Instance>& instances, const char* which) {
    std::vector<VAScore> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) {
        if (!inst.gold) {
            throw Error(std::string(which) + " instance " + inst.id + " / '" + inst.aspect +
                        "' has no gold VA");
        }
        out.push_back(*inst.gold);
    }
    return out;
}

}  // namespace

regressor::Model init_model(const encoding::EncoderSpec& spec, const TrainConfig& config, Rng& rng) {
    regressor::Model model;
    model.head =
        regressor::HeadParams::init(spec.hidden_size, config.bounded, config.dropout_rate, rng);
    if (spec.trainable_layer) model.encoder = encoding::EncoderParams::identity(spec.hidden_size);
    return model;
}

TrainResult train(const std::vector<Instance>& train_set, const std::vector<Instance>& validation_set,
                  const TrainConfig& config, const encoding::EncoderSpec& spec, const std::string& id,
                  const TrainOptions& options) {
    config.validate();
    spec.validate();
    if (train_set.empty()) throw Error("training set is empty");
    if (validation_set.empty()) throw Error("validation set is empty");

    const auto train_gold = gold_scores(train_set, "training");
    const auto val_gold = gold_scores(validation_set, "validation");
    const auto train_x = encoding::featurize(train_set, spec);
    const auto val_x = encoding::featurize(validation_set, spec);

    Rng rng(config.seed);
    auto model = init_model(spec, config, rng);

    AdamW optimizer(model.parameter_count(), config.learning_rate, config.optimizer);
    EarlyStopping stopping(config.patience);
    regressor::Model best = model;

    TrainResult result;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<encoding::Embedding> batch_x;
    std::vector<VAScore> batch_y;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0.0;
        int step = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            batch_x.clear();
            batch_y.clear();
            for (std::size_t k = start; k < end; ++k) {
                batch_x.push_back(train_x[order[k]]);
                batch_y.push_back(train_gold[order[k]]);
            }
            ++step;
            const auto lg =
                regressor::loss_and_gradient(model, batch_x, batch_y, regressor::Mode::Train, &rng);
            if (!std::isfinite(lg.loss)) {
                throw Error(id + ": non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                            std::to_string(step));
            }
            loss_sum += lg.loss * static_cast<double>(end - start);
            auto flat = model.flatten();
            optimizer.step(flat, lg.gradient);
            model.unflatten(flat);
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = loss_sum / static_cast<double>(order.size());
        log.val_rmse = options.validation_override
                           ? options.validation_override(epoch, model)
                           : metrics::rmse_va(regressor::predict(model, val_x), val_gold);
        log.improved = stopping.observe(log.val_rmse);
        if (log.improved) best = model;
        result.epochs.push_back(log);
        if (stopping.should_stop()) break;
    }

    result.checkpoint.id = id;
    result.checkpoint.encoder = spec;
    result.checkpoint.config = config;
    result.checkpoint.model = std::move(best);
    result.checkpoint.best_val_rmse = stopping.best();
    result.checkpoint.epoch_of_best = stopping.best_epoch();
    return result;
}

std::vector<TrainResult> train_grid(const std::vector<Instance>& train_set,
                                    const std::vector<Instance>& validation_set,
                                    const std::vector<TrainConfig>& configs,
                                    const encoding::EncoderSpec& spec, unsigned threads) {
    for (std::size_t i = 0; i < configs.size(); ++i) {
        for (std::size_t j = i + 1; j < configs.size(); ++j) {
            if (configs[i] == configs[j]) {
                throw Error("grid configs M" + std::to_string(i + 1) + " and M" +
                            std::to_string(j + 1) + " are identical");
            }
        }
    }

    std::vector<TrainResult> results(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());
    const auto run = [&](std::size_t i) {
        const std::string id = "M" + std::to_string(i + 1);
        try {
            results[i] = train(train_set, validation_set, configs[i], spec, id);
        } catch (const std::exception& e) {
            errors[i] = std::make_exception_ptr(Error(id + ": " + e.what()));
        }
    };

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
    if (threads <= 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) run(i);
    } else {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < threads; ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t i = w; i < configs.size(); i += threads) run(i);
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

std::map<PairId, TrainResult> train_separate(const std::map<PairId, corpus::TrainValidation>& data,
                                             const TrainConfig& config,
                                             const encoding::EncoderSpec& spec,
                                             const std::string& id) {
    std::map<PairId, TrainResult> out;
    for (const auto& [pair, split] : data) {
        try {
            out.emplace(pair, train(split.train, split.validation, config, spec, id));
        } catch (const Error& e) {
            throw Error(pair.str() + ": " + e.what());
        }
    }
    return out;
}

std::vector<KeyedScore> predict(const Checkpoint& checkpoint, const std::vector<Instance>& instances) {
    const auto features = encoding::featurize(instances, checkpoint.encoder);
    std::vector<KeyedScore> out;
    out.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        out.push_back({key_of(instances[i]), regressor::predict(checkpoint.model, features[i])});
    }
    return out;
}

PredictionSet predict(const Checkpoint& checkpoint, const InstancesByPair& instances) {
    PredictionSet out;
    for (const auto& [pair, list] : instances) out.emplace(pair, predict(checkpoint, list));
    return out;
}

}  // namespace dimasr::trainer
