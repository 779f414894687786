#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "dimasr/config.hpp"
#include "dimasr/corpus.hpp"
#include "dimasr/encoding.hpp"
#include "dimasr/ensemble.hpp"
#include "dimasr/metrics.hpp"

// File-to-file stages of the DimASR pipeline. Each stage reads only its
// declared inputs, writes into its own output directory, and leaves a
// manifest.json listing input and output content hashes.
namespace dimasr::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.3.0";

// Data files are named "<lang>-<dom>_<split>.json" or ".jsonl".
struct DataFile {
    PairId pair;
    std::string split;
    fs::path path;
};

// Empty filter keeps every pair.
using PairFilter = std::set<PairId>;
PairFilter parse_pair_filter(const std::string& comma_separated);

std::vector<DataFile> discover(const fs::path& dir, const PairFilter& pairs = {});
InstancesByPair load_split(const fs::path& dir, const std::string& split, const PairFilter& pairs = {});

struct Manifest {
    std::string stage;
    nlohmann::json config;
    std::map<std::string, std::string> inputs;   // path -> sha256
    std::map<std::string, std::string> outputs;  // path relative to the stage dir -> sha256

    std::string run_id() const;
    nlohmann::json to_json() const;
    void write(const fs::path& out_dir) const;
};

void add_input(Manifest& m, const fs::path& root, const fs::path& file);
void add_output(Manifest& m, const fs::path& out_dir, const fs::path& file);

// --- preprocess -----------------------------------------------------------

struct PreprocessOptions {
    fs::path in_dir;
    fs::path out_dir;
    PairFilter pairs;
    std::optional<fs::path> schema;
};

struct PreprocessSummary {
    std::map<std::string, corpus::PreprocessReport> per_file;  // "<pair>_<split>"
    corpus::PreprocessReport total;
};

PreprocessSummary run_preprocess(const PreprocessOptions& options);

// --- train ----------------------------------------------------------------

// Grid file: {"encoder": {...}, "validation_fraction": 0.1, "seed": 42,
// "configs": [{batch_size, learning_rate, max_epochs, bounded, ...}, ...]}.
// Any missing part falls back to the toy encoder and the seven-candidate grid.
struct GridFile {
    encoding::EncoderSpec encoder;
    double validation_fraction = 0.10;
    std::uint64_t seed = 42;
    std::vector<TrainConfig> configs;

    static GridFile load(const fs::path& path);
    static GridFile from_json(const nlohmann::json& j);
    static GridFile defaults();
    nlohmann::json to_json() const;
};

struct TrainStageOptions {
    fs::path data_dir;
    fs::path out_dir;
    std::optional<fs::path> config;
    std::optional<std::uint64_t> seed;  // overrides split and every run's seed
    Regime regime = Regime::Joint;
    PairFilter pairs;
    unsigned threads = 1;
};

// Joint: <out>/M<k>.ckpt and M<k>.log. Separate: <out>/<pair>/M<k>.ckpt.
std::vector<fs::path> run_train(const TrainStageOptions& options);

// --- predict --------------------------------------------------------------

struct PredictOptions {
    fs::path checkpoint_dir;  // *.ckpt (joint) and/or <pair>/ subdirectories (separate)
    fs::path data_dir;
    fs::path out_dir;
    std::vector<std::string> splits = {"dev", "test"};
    PairFilter pairs;
};

// Writes <out>/<checkpoint id>/<pair>_<split>.jsonl with full-precision scores.
std::vector<fs::path> run_predict(const PredictOptions& options);

// --- evaluate -------------------------------------------------------------

struct EvaluateOptions {
    fs::path pred_dir;  // <pair>_<split>.jsonl
    fs::path gold_dir;  // preprocessed instance files
    std::string split = "dev";
    PairFilter pairs;
    std::optional<fs::path> out;  // report JSON
};

metrics::EvalReport run_evaluate(const EvaluateOptions& options);

// --- ensemble -------------------------------------------------------------

struct EnsembleOptions {
    fs::path pred_root;  // one subdirectory of prediction files per candidate
    fs::path gold_dir;
    fs::path out_dir;
    std::vector<std::string> members;  // empty: every subdirectory
    std::size_t min_size = 2;
    std::size_t max_size = 0;
    bool clamp = true;
    int precision = 2;
    PairFilter pairs;
    unsigned threads = 1;
};

struct EnsembleOutcome {
    ensemble::EnsembleSelection selection;
    // Only when labelled test instances exist; computed after selection.
    std::optional<metrics::EvalReport> test_report;
};

// Writes selection.json, selection.txt, predictions/<pair>_{dev,test}.jsonl,
// submission/pred_<pair>.jsonl and clamp_log.jsonl.
EnsembleOutcome run_ensemble(const EnsembleOptions& options);

ensemble::CandidatePool load_pool(const fs::path& pred_root, const std::vector<std::string>& members,
                                  const PairFilter& pairs);

// --- submit ---------------------------------------------------------------

struct SubmitOptions {
    fs::path pred_dir;
    fs::path out_dir;
    std::string split = "test";
    bool clamp = true;
    int precision = 2;
    PairFilter pairs;
};

// Writes <out>/pred_<pair>.jsonl; returns the number of clamped instances.
std::size_t run_submit(const SubmitOptions& options);

// Writes one submission file per pair and the clamp log; shared by ensemble and submit.
std::size_t write_submissions(PredictionSet preds, const fs::path& out_dir, bool clamp,
                              int precision, Manifest& manifest, const fs::path& manifest_root);

}  // namespace dimasr::pipeline
