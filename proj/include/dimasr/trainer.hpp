#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dimasr/checkpoint.hpp"
#include "dimasr/config.hpp"
#include "dimasr/corpus.hpp"
#include "dimasr/encoding.hpp"
#include "dimasr/regressor.hpp"
#include "dimasr/types.hpp"

namespace dimasr::trainer {

// AdamW (decoupled weight decay) over a flat parameter vector.
class AdamW {
public:
    AdamW(std::size_t size, double learning_rate, const OptimizerSettings& settings);
    void step(std::span<double> params, std::span<const double> grad);
    long steps() const { return t_; }

private:
    double lr_;
    OptimizerSettings s_;
    std::vector<double> m_, v_;
    long t_ = 0;
};

// Stops after `patience` consecutive epochs without a strict improvement
// of more than min_delta over the best validation RMSE so far.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience, double min_delta = 1e-6);
    // Records one epoch's validation score; true when it is a new best.
    bool observe(double score);
    bool should_stop() const { return bad_epochs_ >= patience_; }
    double best() const { return best_; }
    int best_epoch() const { return best_epoch_; }
    int epochs_seen() const { return epochs_; }

private:
    int patience_;
    double min_delta_;
    double best_;
    int best_epoch_ = 0;
    int bad_epochs_ = 0;
    int epochs_ = 0;
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_rmse = 0.0;
    bool improved = false;
};

std::string format_log(const std::vector<EpochLog>& epochs);

struct TrainOptions {
    // Replaces the validation RMSE computation; used to drive the stopping
    // rule with a scripted score sequence.
    std::function<double(int epoch, const regressor::Model&)> validation_override;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<EpochLog> epochs;
};

// Seeded initial state: head per HeadParams::init, encoder layer (when the
// encoder has one) at identity. Draws from `rng` before any batch shuffling.
regressor::Model init_model(const encoding::EncoderSpec& spec, const TrainConfig& config, Rng& rng);

// Trains head (and toy encoder layer) on labelled `train`, selecting the
// epoch with the lowest validation RMSE_VA. Throws on a non-finite loss.
TrainResult train(const std::vector<Instance>& train_set, const std::vector<Instance>& validation_set,
                  const TrainConfig& config, const encoding::EncoderSpec& spec,
                  const std::string& id = "M1", const TrainOptions& options = {});

// One run per config, ids M1..Mk in config order. Runs are independent and
// may execute on up to `threads` threads without changing any result.
std::vector<TrainResult> train_grid(const std::vector<Instance>& train_set,
                                    const std::vector<Instance>& validation_set,
                                    const std::vector<TrainConfig>& configs,
                                    const encoding::EncoderSpec& spec, unsigned threads = 1);

// One independent run per pair on that pair's own split.
std::map<PairId, TrainResult> train_separate(const std::map<PairId, corpus::TrainValidation>& data,
                                             const TrainConfig& config,
                                             const encoding::EncoderSpec& spec,
                                             const std::string& id = "M1");

std::vector<KeyedScore> predict(const Checkpoint& checkpoint, const std::vector<Instance>& instances);
PredictionSet predict(const Checkpoint& checkpoint, const InstancesByPair& instances);

}  // namespace dimasr::trainer
