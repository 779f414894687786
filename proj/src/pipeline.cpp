#include "dimasr/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "dimasr/checkpoint.hpp"
#include "dimasr/io.hpp"
#include "dimasr/trainer.hpp"

namespace dimasr::pipeline {

using nlohmann::json;

PairFilter parse_pair_filter(const std::string& comma_separated) {
    PairFilter out;
    std::stringstream ss(comma_separated);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(PairId::parse(item));
    }
    return out;
}

namespace {

bool keep(const PairFilter& filter, const PairId& pair) {
    return filter.empty() || filter.contains(pair);
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::string file_key(const PairId& pair, const std::string& split) {
    return pair.str() + "_" + split;
}

}  // namespace

std::vector<DataFile> discover(const fs::path& dir, const PairFilter& pairs) {
    std::vector<DataFile> out;
    for (const auto& path : sorted_entries(dir)) {
        if (!fs::is_regular_file(path)) continue;
        const auto ext = path.extension().string();
        if (ext != ".json" && ext != ".jsonl") continue;
        const auto stem = path.stem().string();
        const auto underscore = stem.rfind('_');
        if (underscore == std::string::npos) continue;
        PairId pair;
        try {
            pair = PairId::parse(stem.substr(0, underscore));
        } catch (const Error&) {
            continue;
        }
        if (!keep(pairs, pair)) continue;
        out.push_back({pair, stem.substr(underscore + 1), path});
    }
    return out;
}

InstancesByPair load_split(const fs::path& dir, const std::string& split, const PairFilter& pairs) {
    InstancesByPair out;
    for (const auto& f : discover(dir, pairs)) {
        if (f.split != split) continue;
        if (out.contains(f.pair)) {
            throw Error("two " + split + " files for pair " + f.pair.str() + " in " + dir.string());
        }
        out.emplace(f.pair, corpus::read_instances(f.path));
    }
    return out;
}

std::string Manifest::run_id() const {
    json basis = {{"stage", stage}, {"config", config}, {"inputs", inputs}};
    return io::sha256_hex(basis.dump()).substr(0, 16);
}

json Manifest::to_json() const {
    return {{"stage", stage},   {"run_id", run_id()},   {"tool_version", kToolVersion},
            {"config", config}, {"inputs", inputs},     {"outputs", outputs}};
}

void Manifest::write(const fs::path& out_dir) const {
    io::write_file(out_dir / "manifest.json", to_json().dump(2) + "\n");
}

void add_input(Manifest& m, const fs::path& root, const fs::path& file) {
    m.inputs[(root.filename() / fs::relative(file, root)).generic_string()] = io::sha256_file(file);
}

void add_output(Manifest& m, const fs::path& out_dir, const fs::path& file) {
    m.outputs[fs::relative(file, out_dir).generic_string()] = io::sha256_file(file);
}

// --- preprocess -----------------------------------------------------------

PreprocessSummary run_preprocess(const PreprocessOptions& options) {
    const corpus::Schema schema = options.schema ? corpus::Schema::load(*options.schema) : corpus::Schema{};
    Manifest manifest;
    manifest.stage = "preprocess";
    manifest.config = {{"in", options.in_dir.generic_string()}, {"schema", schema.to_json()}};

    PreprocessSummary summary;
    std::vector<std::string> failures;
    std::vector<fs::path> written;
    for (const auto& f : discover(options.in_dir, options.pairs)) {
        try {
            const auto records = corpus::parse_quadruplet_file(f.path, f.pair, schema);
            const auto result = corpus::preprocess(records);
            const auto out = options.out_dir / (file_key(f.pair, f.split) + ".jsonl");
            corpus::write_instances(out, result.instances);
            summary.per_file[file_key(f.pair, f.split)] = result.report;
            summary.total += result.report;
            add_input(manifest, options.in_dir, f.path);
            written.push_back(out);
        } catch (const Error& e) {
            failures.push_back(e.what());
        }
    }
    if (!failures.empty()) {
        std::string msg = "preprocess failed for " + std::to_string(failures.size()) + " file(s):";
        for (const auto& f : failures) msg += "\n  " + f;
        throw Error(msg);
    }

    json files = json::object();
    for (const auto& [key, report] : summary.per_file) {
        auto j = report.to_json();
        if (report.emitted == 0) {
            j["note"] = "no instances emitted: " + std::to_string(report.null_dropped) +
                        " implicit (NULL) aspects, " + std::to_string(report.range_dropped) +
                        " out-of-range VA, " + std::to_string(report.duplicate_dropped) +
                        " repeated aspects";
        }
        files[key] = std::move(j);
    }
    const auto report_path = options.out_dir / "preprocess_report.json";
    io::write_file(report_path,
                   json({{"files", files}, {"total", summary.total.to_json()}}).dump(2) + "\n");
    written.push_back(report_path);
    for (const auto& w : written) add_output(manifest, options.out_dir, w);
    manifest.write(options.out_dir);
    return summary;
}

// --- train ----------------------------------------------------------------

GridFile GridFile::defaults() {
    GridFile g;
    g.configs = default_candidate_grid();
    return g;
}

GridFile GridFile::from_json(const json& j) {
    GridFile g;
    if (const auto it = j.find("encoder"); it != j.end()) g.encoder = encoding::EncoderSpec::from_json(*it);
    g.validation_fraction = j.value("validation_fraction", g.validation_fraction);
    g.seed = j.value("seed", g.seed);
    if (const auto it = j.find("configs"); it != j.end()) {
        for (const auto& c : *it) {
            auto cj = c;
            if (!cj.contains("seed")) cj["seed"] = g.seed;
            g.configs.push_back(TrainConfig::from_json(cj));
        }
    } else {
        g.configs = default_candidate_grid();
        for (auto& c : g.configs) c.seed = g.seed;
    }
    return g;
}

GridFile GridFile::load(const fs::path& path) {
    try {
        return from_json(json::parse(io::read_file(path)));
    } catch (const json::exception& e) {
        throw Error("grid config " + path.string() + ": " + e.what());
    }
}

json GridFile::to_json() const {
    json configs_j = json::array();
    for (const auto& c : configs) configs_j.push_back(c.to_json());
    return {{"encoder", encoder.to_json()},
            {"validation_fraction", validation_fraction},
            {"seed", seed},
            {"configs", configs_j}};
}

std::vector<fs::path> run_train(const TrainStageOptions& options) {
    GridFile grid = options.config ? GridFile::load(*options.config) : GridFile::defaults();
    if (options.seed) {
        grid.seed = *options.seed;
        for (auto& c : grid.configs) c.seed = *options.seed;
    }
    for (auto& c : grid.configs) c.regime = options.regime;

    const auto data = load_split(options.data_dir, "train", options.pairs);
    if (data.empty()) throw Error("no <pair>_train files in " + options.data_dir.string());

    Manifest manifest;
    manifest.stage = "train";
    manifest.config = {{"data", options.data_dir.generic_string()},
                       {"regime", to_string(options.regime)},
                       {"grid", grid.to_json()}};
    for (const auto& f : discover(options.data_dir, options.pairs)) {
        if (f.split == "train") add_input(manifest, options.data_dir, f.path);
    }

    std::vector<fs::path> written;
    const auto emit = [&](const trainer::TrainResult& r, const fs::path& dir) {
        const auto ckpt = dir / (r.checkpoint.id + ".ckpt");
        const auto log = dir / (r.checkpoint.id + ".log");
        r.checkpoint.save(ckpt);
        io::write_file(log, trainer::format_log(r.epochs));
        written.push_back(ckpt);
        written.push_back(log);
    };

    if (options.regime == Regime::Joint) {
        const auto pooled = corpus::pool_pairs(data);
        const auto split = corpus::split_train_validation(pooled, grid.validation_fraction, grid.seed);
        const auto results =
            trainer::train_grid(split.train, split.validation, grid.configs, grid.encoder, options.threads);
        for (const auto& r : results) emit(r, options.out_dir);
    } else {
        std::map<PairId, corpus::TrainValidation> per_pair;
        for (const auto& [pair, list] : data) {
            try {
                per_pair.emplace(pair, corpus::split_train_validation(list, grid.validation_fraction, grid.seed));
            } catch (const Error& e) {
                throw Error(pair.str() + ": " + e.what());
            }
        }
        for (std::size_t k = 0; k < grid.configs.size(); ++k) {
            const std::string id = "M" + std::to_string(k + 1);
            const auto results = trainer::train_separate(per_pair, grid.configs[k], grid.encoder, id);
            for (const auto& [pair, r] : results) emit(r, options.out_dir / pair.str());
        }
    }
    for (const auto& w : written) add_output(manifest, options.out_dir, w);
    manifest.write(options.out_dir);
    return written;
}

// --- predict --------------------------------------------------------------

std::vector<fs::path> run_predict(const PredictOptions& options) {
    // id -> checkpoint used for every pair (joint) or per pair (separate)
    std::map<std::string, Checkpoint> joint;
    std::map<std::string, std::map<PairId, Checkpoint>> separate;

    Manifest manifest;
    manifest.stage = "predict";
    manifest.config = {{"checkpoints", options.checkpoint_dir.generic_string()},
                       {"data", options.data_dir.generic_string()},
                       {"splits", options.splits}};

    for (const auto& path : sorted_entries(options.checkpoint_dir)) {
        if (fs::is_regular_file(path) && path.extension() == ".ckpt") {
            auto ck = Checkpoint::load(path);
            add_input(manifest, options.checkpoint_dir, path);
            const auto id = ck.id;
            if (!joint.emplace(id, std::move(ck)).second) throw Error("duplicate checkpoint id " + id);
        } else if (fs::is_directory(path)) {
            PairId pair;
            try {
                pair = PairId::parse(path.filename().string());
            } catch (const Error&) {
                continue;
            }
            if (!keep(options.pairs, pair)) continue;
            for (const auto& sub : sorted_entries(path)) {
                if (sub.extension() != ".ckpt") continue;
                auto ck = Checkpoint::load(sub);
                add_input(manifest, options.checkpoint_dir, sub);
                separate[ck.id].emplace(pair, std::move(ck));
            }
        }
    }
    if (joint.empty() && separate.empty()) {
        throw Error("no checkpoints found in " + options.checkpoint_dir.string());
    }
    for (const auto& [id, ck] : joint) {
        if (separate.contains(id)) throw Error("checkpoint id " + id + " is both joint and per-pair");
    }

    std::vector<fs::path> written;
    for (const auto& split : options.splits) {
        const auto data = load_split(options.data_dir, split, options.pairs);
        for (const auto& f : discover(options.data_dir, options.pairs)) {
            if (f.split == split) add_input(manifest, options.data_dir, f.path);
        }
        for (const auto& [pair, instances] : data) {
            const auto write = [&](const std::string& id, const Checkpoint& ck) {
                const auto out = options.out_dir / id / (file_key(pair, split) + ".jsonl");
                io::write_predictions(out, trainer::predict(ck, instances));
                written.push_back(out);
            };
            for (const auto& [id, ck] : joint) write(id, ck);
            for (const auto& [id, by_pair] : separate) {
                const auto it = by_pair.find(pair);
                if (it == by_pair.end()) {
                    throw Error("checkpoint " + id + " has no per-pair model for " + pair.str());
                }
                write(id, it->second);
            }
        }
    }
    for (const auto& w : written) add_output(manifest, options.out_dir, w);
    manifest.write(options.out_dir);
    return written;
}

// --- evaluate -------------------------------------------------------------

namespace {

PredictionSet load_predictions(const fs::path& dir, const std::string& split, const PairFilter& pairs) {
    PredictionSet out;
    for (const auto& f : discover(dir, pairs)) {
        if (f.split == split) out.emplace(f.pair, io::read_predictions(f.path));
    }
    return out;
}

bool fully_labelled(const InstancesByPair& data) {
    if (data.empty()) return false;
    for (const auto& [pair, list] : data) {
        for (const auto& inst : list) {
            if (!inst.gold) return false;
        }
    }
    return true;
}

}  // namespace

metrics::EvalReport run_evaluate(const EvaluateOptions& options) {
    const auto gold = gold_of(load_split(options.gold_dir, options.split, options.pairs));
    if (gold.empty()) {
        throw Error("no " + options.split + " gold files in " + options.gold_dir.string());
    }
    const auto preds = load_predictions(options.pred_dir, options.split, options.pairs);
    const auto report = metrics::evaluate(preds, gold);
    if (options.out) {
        io::write_file(*options.out, report.to_json().dump(2) + "\n");
    }
    return report;
}

// --- ensemble -------------------------------------------------------------

ensemble::CandidatePool load_pool(const fs::path& pred_root, const std::vector<std::string>& members,
                                  const PairFilter& pairs) {
    std::vector<std::string> ids = members;
    if (ids.empty()) {
        for (const auto& path : sorted_entries(pred_root)) {
            if (fs::is_directory(path)) ids.push_back(path.filename().string());
        }
    }
    ensemble::CandidatePool pool;
    for (const auto& id : ids) {
        const auto dir = pred_root / id;
        if (!fs::is_directory(dir)) throw Error("no predictions for candidate " + id + " under " + pred_root.string());
        ensemble::Member m;
        m.id = id;
        m.dev = load_predictions(dir, "dev", pairs);
        m.test = load_predictions(dir, "test", pairs);
        pool.members.push_back(std::move(m));
    }
    return pool;
}

std::size_t write_submissions(PredictionSet preds, const fs::path& out_dir, bool clamp, int precision,
                              Manifest& manifest, const fs::path& manifest_root) {
    std::vector<io::ClampEvent> events;
    if (clamp) io::clamp_predictions(preds, &events);
    for (const auto& [pair, list] : preds) {
        const auto path = out_dir / ("pred_" + pair.str() + ".jsonl");
        io::write_file(path, io::render_submission(list, precision));
        add_output(manifest, manifest_root, path);
    }
    std::ostringstream log;
    for (const auto& e : events) {
        log << json({{"Pair", e.pair.str()},
                     {"ID", e.key.id},
                     {"Aspect", e.key.aspect},
                     {"before", {e.before.valence, e.before.arousal}},
                     {"after", {e.after.valence, e.after.arousal}}})
                   .dump()
            << '\n';
    }
    const auto log_path = out_dir / "clamp_log.jsonl";
    io::write_file(log_path, log.str());
    add_output(manifest, manifest_root, log_path);
    return events.size();
}

EnsembleOutcome run_ensemble(const EnsembleOptions& options) {
    Manifest manifest;
    manifest.stage = "ensemble";
    manifest.config = {{"predictions", options.pred_root.generic_string()},
                       {"gold", options.gold_dir.generic_string()},
                       {"members", options.members},
                       {"min_size", options.min_size},
                       {"max_size", options.max_size},
                       {"clamp", options.clamp},
                       {"precision", options.precision}};

    const auto pool = load_pool(options.pred_root, options.members, options.pairs);
    for (const auto& m : pool.members) {
        for (const auto& f : discover(options.pred_root / m.id, options.pairs)) {
            add_input(manifest, options.pred_root, f.path);
        }
    }
    const auto dev_gold = gold_of(load_split(options.gold_dir, "dev", options.pairs));
    if (dev_gold.empty()) throw Error("no dev gold files in " + options.gold_dir.string());
    for (const auto& f : discover(options.gold_dir, options.pairs)) {
        if (f.split == "dev") add_input(manifest, options.gold_dir, f.path);
    }

    EnsembleOutcome outcome;
    outcome.selection = ensemble::search(
        pool, dev_gold, {options.min_size, options.max_size, options.threads});

    const auto& out = options.out_dir;
    io::write_file(out / "selection.json", outcome.selection.to_json().dump(2) + "\n");
    io::write_file(out / "selection.txt", outcome.selection.membership_matrix());
    add_output(manifest, out, out / "selection.json");
    add_output(manifest, out, out / "selection.txt");

    const auto dev_preds = ensemble::apply(outcome.selection, pool, ensemble::Split::Dev);
    for (const auto& [pair, list] : dev_preds) {
        const auto path = out / "predictions" / (file_key(pair, "dev") + ".jsonl");
        io::write_predictions(path, list);
        add_output(manifest, out, path);
    }

    const bool has_test = !pool.members.front().test.empty();
    if (has_test) {
        const auto test_preds = ensemble::apply(outcome.selection, pool, ensemble::Split::Test);
        for (const auto& [pair, list] : test_preds) {
            const auto path = out / "predictions" / (file_key(pair, "test") + ".jsonl");
            io::write_predictions(path, list);
            add_output(manifest, out, path);
        }
        write_submissions(test_preds, out / "submission", options.clamp, options.precision, manifest,
                          out);

        // Reporting only: the selection above is already fixed.
        const auto test_data = load_split(options.gold_dir, "test", options.pairs);
        if (fully_labelled(test_data)) {
            outcome.test_report = metrics::evaluate(test_preds, gold_of(test_data));
            io::write_file(out / "test_report.json", outcome.test_report->to_json().dump(2) + "\n");
            add_output(manifest, out, out / "test_report.json");
        }
    }
    manifest.write(out);
    return outcome;
}

// --- submit ---------------------------------------------------------------

std::size_t run_submit(const SubmitOptions& options) {
    Manifest manifest;
    manifest.stage = "submit";
    manifest.config = {{"predictions", options.pred_dir.generic_string()},
                       {"split", options.split},
                       {"clamp", options.clamp},
                       {"precision", options.precision}};
    const auto preds = load_predictions(options.pred_dir, options.split, options.pairs);
    if (preds.empty()) {
        throw Error("no " + options.split + " predictions in " + options.pred_dir.string());
    }
    for (const auto& f : discover(options.pred_dir, options.pairs)) {
        if (f.split == options.split) add_input(manifest, options.pred_dir, f.path);
    }
    const auto clamped = write_submissions(preds, options.out_dir, options.clamp, options.precision,
                                           manifest, options.out_dir);
    manifest.write(options.out_dir);
    return clamped;
}

}  // namespace dimasr::pipeline
