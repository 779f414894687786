#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "dimasr/corpus.hpp"
#include "dimasr/encoding.hpp"
#include "dimasr/metrics.hpp"
#include "dimasr/pipeline.hpp"
#include "dimasr/regressor.hpp"
#include "dimasr/synthetic.hpp"

namespace py = pybind11;
using namespace dimasr;

namespace {

// nlohmann::json -> Python objects through the json module; reports are small.
py::object to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

pipeline::PairFilter filter_of(const std::optional<std::vector<std::string>>& pairs) {
    pipeline::PairFilter out;
    if (pairs) {
        for (const auto& p : *pairs) out.insert(PairId::parse(p));
    }
    return out;
}

std::vector<VAScore> scores_of(const std::vector<std::pair<double, double>>& v) {
    std::vector<VAScore> out;
    out.reserve(v.size());
    for (const auto& [a, b] : v) out.push_back({a, b});
    return out;
}

// The registry may outlive the interpreter; only drop the callable while it is alive.
struct PyCallableDeleter {
    void operator()(py::function* f) const {
        if (Py_IsInitialized()) {
            py::gil_scoped_acquire gil;
            delete f;
        }
    }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Dimensional aspect sentiment regression core";

    py::register_exception<Error>(m, "DimasrError", PyExc_ValueError);

    m.def("official_pairs", [] {
        std::vector<std::string> out;
        for (const auto& p : official_pairs()) out.push_back(p.str());
        return out;
    });

    m.def("parse_va", [](const std::string& raw) {
        const auto va = corpus::parse_va(raw);
        return std::make_pair(va.valence, va.arousal);
    }, py::arg("raw"));
    m.def("format_va", [](double v, double a, int precision) { return corpus::format_va({v, a}, precision); },
          py::arg("valence"), py::arg("arousal"), py::arg("precision") = 2);

    m.def("rmse_va", [](const std::vector<std::pair<double, double>>& preds,
                        const std::vector<std::pair<double, double>>& gold) {
        return metrics::rmse_va(scores_of(preds), scores_of(gold));
    }, py::arg("preds"), py::arg("gold"));
    m.def("bound", &regressor::bound_component, py::arg("z"),
          "Map a raw logit into the open interval (1, 9).");

    m.def("write_synthetic_dataset",
          [](const std::filesystem::path& dir, const std::vector<std::string>& pairs, std::size_t records,
             std::uint64_t seed, bool labelled_test) {
              std::vector<PairId> ids;
              for (const auto& p : pairs) ids.push_back(PairId::parse(p));
              synthetic::Options o;
              o.records = records;
              o.seed = seed;
              synthetic::write_dataset(dir, ids, o, labelled_test);
          },
          py::arg("dir"), py::arg("pairs"), py::arg("records") = 60, py::arg("seed") = 42,
          py::arg("labelled_test") = true);

    m.def("preprocess",
          [](const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
             std::optional<std::vector<std::string>> pairs) {
              pipeline::PreprocessOptions o;
              o.in_dir = in_dir;
              o.out_dir = out_dir;
              o.pairs = filter_of(pairs);
              pipeline::PreprocessSummary s;
              {
                  py::gil_scoped_release release;
                  s = pipeline::run_preprocess(o);
              }
              nlohmann::json files = nlohmann::json::object();
              for (const auto& [k, r] : s.per_file) files[k] = r.to_json();
              return to_py({{"files", files}, {"total", s.total.to_json()}});
          },
          py::arg("in_dir"), py::arg("out_dir"), py::arg("pairs") = py::none());

    m.def("train",
          [](const std::filesystem::path& data_dir, const std::filesystem::path& out_dir,
             std::optional<std::filesystem::path> config, std::optional<std::uint64_t> seed,
             const std::string& regime, std::optional<std::vector<std::string>> pairs, unsigned threads) {
              pipeline::TrainStageOptions o;
              o.data_dir = data_dir;
              o.out_dir = out_dir;
              o.config = config;
              o.seed = seed;
              o.regime = parse_regime(regime);
              o.pairs = filter_of(pairs);
              o.threads = threads;
              py::gil_scoped_release release;
              return pipeline::run_train(o);
          },
          py::arg("data_dir"), py::arg("out_dir"), py::arg("config") = py::none(), py::arg("seed") = py::none(),
          py::arg("regime") = "joint", py::arg("pairs") = py::none(), py::arg("threads") = 1);

    m.def("predict",
          [](const std::filesystem::path& checkpoint_dir, const std::filesystem::path& data_dir,
             const std::filesystem::path& out_dir, std::vector<std::string> splits,
             std::optional<std::vector<std::string>> pairs) {
              pipeline::PredictOptions o;
              o.checkpoint_dir = checkpoint_dir;
              o.data_dir = data_dir;
              o.out_dir = out_dir;
              o.splits = std::move(splits);
              o.pairs = filter_of(pairs);
              py::gil_scoped_release release;
              return pipeline::run_predict(o);
          },
          py::arg("checkpoint_dir"), py::arg("data_dir"), py::arg("out_dir"),
          py::arg("splits") = std::vector<std::string>{"dev", "test"}, py::arg("pairs") = py::none());

    m.def("evaluate",
          [](const std::filesystem::path& pred_dir, const std::filesystem::path& gold_dir, const std::string& split,
             std::optional<std::vector<std::string>> pairs) {
              pipeline::EvaluateOptions o;
              o.pred_dir = pred_dir;
              o.gold_dir = gold_dir;
              o.split = split;
              o.pairs = filter_of(pairs);
              metrics::EvalReport r;
              {
                  py::gil_scoped_release release;
                  r = pipeline::run_evaluate(o);
              }
              return to_py(r.to_json());
          },
          py::arg("pred_dir"), py::arg("gold_dir"), py::arg("split") = "dev", py::arg("pairs") = py::none());

    m.def("ensemble",
          [](const std::filesystem::path& pred_root, const std::filesystem::path& gold_dir,
             const std::filesystem::path& out_dir, std::vector<std::string> members, std::size_t min_size,
             std::size_t max_size, bool clamp, int precision, std::optional<std::vector<std::string>> pairs,
             unsigned threads) {
              pipeline::EnsembleOptions o;
              o.pred_root = pred_root;
              o.gold_dir = gold_dir;
              o.out_dir = out_dir;
              o.members = std::move(members);
              o.min_size = min_size;
              o.max_size = max_size;
              o.clamp = clamp;
              o.precision = precision;
              o.pairs = filter_of(pairs);
              o.threads = threads;
              pipeline::EnsembleOutcome r;
              {
                  py::gil_scoped_release release;
                  r = pipeline::run_ensemble(o);
              }
              nlohmann::json j = {{"selection", r.selection.to_json()}};
              j["test_report"] = r.test_report ? r.test_report->to_json() : nlohmann::json();
              return to_py(j);
          },
          py::arg("pred_root"), py::arg("gold_dir"), py::arg("out_dir"),
          py::arg("members") = std::vector<std::string>{}, py::arg("min_size") = 2, py::arg("max_size") = 0,
          py::arg("clamp") = true, py::arg("precision") = 2, py::arg("pairs") = py::none(), py::arg("threads") = 1);

    m.def("submit",
          [](const std::filesystem::path& pred_dir, const std::filesystem::path& out_dir, const std::string& split,
             bool clamp, int precision, std::optional<std::vector<std::string>> pairs) {
              pipeline::SubmitOptions o;
              o.pred_dir = pred_dir;
              o.out_dir = out_dir;
              o.split = split;
              o.clamp = clamp;
              o.precision = precision;
              o.pairs = filter_of(pairs);
              py::gil_scoped_release release;
              return pipeline::run_submit(o);
          },
          py::arg("pred_dir"), py::arg("out_dir"), py::arg("split") = "test", py::arg("clamp") = true,
          py::arg("precision") = 2, py::arg("pairs") = py::none());

    // fn(pairs: list[tuple[str, str]], hidden_size: int) -> list[list[float]]
    m.def("register_pretrained_backend",
          [](const std::string& name, py::function fn) {
              std::shared_ptr<py::function> held(new py::function(std::move(fn)), PyCallableDeleter{});
              encoding::register_pretrained_backend(
                  name, [held](std::span<const encoding::PairText> pairs, const encoding::EncoderSpec& spec) {
                      py::gil_scoped_acquire gil;
                      py::list batch;
                      for (const auto& p : pairs) batch.append(py::make_tuple(p.aspect, p.text));
                      return (*held)(batch, spec.hidden_size).cast<std::vector<encoding::Embedding>>();
                  });
          },
          py::arg("name"), py::arg("fn"));
    m.def("unregister_pretrained_backend", &encoding::unregister_pretrained_backend, py::arg("name"));
    m.def("has_pretrained_backend", &encoding::has_pretrained_backend, py::arg("name"));
}
