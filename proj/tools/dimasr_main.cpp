// dimasr: batch driver for the dimensional aspect sentiment regression
// pipeline (preprocess -> train -> predict -> evaluate -> ensemble -> submit).

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dimasr/pipeline.hpp"
#include "dimasr/synthetic.hpp"

namespace fs = std::filesystem;
using namespace dimasr;

int main(int argc, char** argv) {
    CLI::App app{"Dimensional aspect sentiment regression: training, evaluation and ensembling"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pipeline::kToolVersion));

    std::string pairs;
    const auto add_pairs = [&](CLI::App* cmd) {
        cmd->add_option("--pairs", pairs, "Comma-separated pair filter, e.g. eng-res,zho-lap");
    };

    // synth
    auto* synth = app.add_subcommand("synth", "Write a synthetic quadruplet dataset");
    fs::path synth_out;
    std::size_t synth_records = 60;
    std::uint64_t synth_seed = 42;
    bool synth_unlabelled_test = false;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--records", synth_records, "Training records per pair");
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_flag("--unlabelled-test", synth_unlabelled_test, "Omit VA from test files");
    add_pairs(synth);

    // preprocess
    auto* prep = app.add_subcommand("preprocess", "Quadruplet files -> clean instance files");
    pipeline::PreprocessOptions prep_opts;
    fs::path schema_path;
    prep->add_option("--in", prep_opts.in_dir, "Directory of <pair>_<split>.json[l] files")->required();
    prep->add_option("--out", prep_opts.out_dir, "Output directory")->required();
    prep->add_option("--schema", schema_path, "JSON field-name map");
    add_pairs(prep);

    // train
    auto* train = app.add_subcommand("train", "Train the candidate grid");
    pipeline::TrainStageOptions train_opts;
    std::string regime = "joint";
    std::uint64_t train_seed = 0;
    fs::path grid_path;
    train->add_option("--data", train_opts.data_dir, "Preprocessed instance directory")->required();
    train->add_option("--out", train_opts.out_dir, "Checkpoint directory")->required();
    train->add_option("--config", grid_path, "Grid config (JSON); default: seven-candidate grid");
    auto* seed_opt = train->add_option("--seed", train_seed, "Seed for the split and every run");
    train->add_option("--regime", regime, "joint | separate")->check(CLI::IsMember({"joint", "separate"}));
    train->add_option("--threads", train_opts.threads, "Concurrent grid runs");
    add_pairs(train);

    // predict
    auto* predict = app.add_subcommand("predict", "Score instance files with checkpoints");
    pipeline::PredictOptions pred_opts;
    predict->add_option("--checkpoints", pred_opts.checkpoint_dir, "Checkpoint directory")->required();
    predict->add_option("--data", pred_opts.data_dir, "Preprocessed instance directory")->required();
    predict->add_option("--out", pred_opts.out_dir, "Prediction root")->required();
    predict->add_option("--splits", pred_opts.splits, "Splits to score")->delimiter(',');
    add_pairs(predict);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "RMSE_VA per pair and averaged");
    pipeline::EvaluateOptions eval_opts;
    fs::path eval_out;
    evaluate->add_option("--pred", eval_opts.pred_dir, "Prediction directory")->required();
    evaluate->add_option("--gold", eval_opts.gold_dir, "Preprocessed instance directory")->required();
    evaluate->add_option("--split", eval_opts.split, "dev | test");
    evaluate->add_option("--out", eval_out, "Report JSON path");
    add_pairs(evaluate);

    // ensemble
    auto* ens = app.add_subcommand("ensemble", "Per-pair exhaustive subset search + submissions");
    pipeline::EnsembleOptions ens_opts;
    bool clamp = true;
    ens->add_option("--pred", ens_opts.pred_root, "Prediction root, one subdirectory per candidate")->required();
    ens->add_option("--gold", ens_opts.gold_dir, "Preprocessed instance directory")->required();
    ens->add_option("--out", ens_opts.out_dir, "Output directory")->required();
    ens->add_option("--members", ens_opts.members, "Candidate ids (default: all)")->delimiter(',');
    ens->add_option("--min-size", ens_opts.min_size, "Smallest subset size");
    ens->add_option("--max-size", ens_opts.max_size, "Largest subset size (0: pool size)");
    ens->add_flag("--clamp,!--no-clamp", clamp, "Clamp exported VA into [1, 9]");
    ens->add_option("--precision", ens_opts.precision, "Decimals in submission VA strings");
    ens->add_option("--threads", ens_opts.threads, "Pairs searched concurrently");
    add_pairs(ens);

    // submit
    auto* submit = app.add_subcommand("submit", "Prediction files -> leaderboard submission files");
    pipeline::SubmitOptions sub_opts;
    bool sub_clamp = true;
    submit->add_option("--pred", sub_opts.pred_dir, "Prediction directory")->required();
    submit->add_option("--out", sub_opts.out_dir, "Output directory")->required();
    submit->add_option("--split", sub_opts.split, "Split to export");
    submit->add_flag("--clamp,!--no-clamp", sub_clamp, "Clamp exported VA into [1, 9]");
    submit->add_option("--precision", sub_opts.precision, "Decimals in VA strings");
    add_pairs(submit);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto filter = pipeline::parse_pair_filter(pairs);

        if (*synth) {
            std::vector<PairId> targets(filter.begin(), filter.end());
            if (targets.empty()) targets = official_pairs();
            synthetic::Options o;
            o.records = synth_records;
            o.seed = synth_seed;
            synthetic::write_dataset(synth_out, targets, o, !synth_unlabelled_test);
            std::cout << "wrote " << targets.size() << " pairs to " << synth_out << '\n';
        } else if (*prep) {
            prep_opts.pairs = filter;
            if (!schema_path.empty()) prep_opts.schema = schema_path;
            const auto summary = pipeline::run_preprocess(prep_opts);
            for (const auto& [key, r] : summary.per_file) {
                std::cout << key << ": " << r.emitted << " instances (" << r.null_dropped << " NULL, "
                          << r.range_dropped << " out-of-range, " << r.duplicate_dropped
                          << " repeated-aspect drops)\n";
            }
        } else if (*train) {
            train_opts.pairs = filter;
            train_opts.regime = parse_regime(regime);
            if (!grid_path.empty()) train_opts.config = grid_path;
            if (seed_opt->count() > 0) train_opts.seed = train_seed;
            const auto written = pipeline::run_train(train_opts);
            std::cout << "wrote " << written.size() / 2 << " checkpoints to " << train_opts.out_dir << '\n';
        } else if (*predict) {
            pred_opts.pairs = filter;
            const auto written = pipeline::run_predict(pred_opts);
            std::cout << "wrote " << written.size() << " prediction files\n";
        } else if (*evaluate) {
            eval_opts.pairs = filter;
            if (!eval_out.empty()) eval_opts.out = eval_out;
            std::cout << pipeline::run_evaluate(eval_opts).to_table();
        } else if (*ens) {
            ens_opts.pairs = filter;
            ens_opts.clamp = clamp;
            const auto outcome = pipeline::run_ensemble(ens_opts);
            std::cout << outcome.selection.membership_matrix();
            if (outcome.test_report) std::cout << '\n' << outcome.test_report->to_table("test");
        } else if (*submit) {
            sub_opts.pairs = filter;
            sub_opts.clamp = sub_clamp;
            const auto clamped = pipeline::run_submit(sub_opts);
            std::cout << "submission written to " << sub_opts.out_dir << " (" << clamped
                      << " instances clamped)\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "dimasr: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
