#include "dimasr/config.hpp"

#include <cmath>

#include "dimasr/types.hpp"

namespace dimasr {

using nlohmann::json;

std::string to_string(Regime r) { return r == Regime::Joint ? "joint" : "separate"; }

Regime parse_regime(std::string_view s) {
    if (s == "joint") return Regime::Joint;
    if (s == "separate") return Regime::Separate;
    throw Error("unknown training regime '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
    if (batch_size <= 0 || max_epochs <= 0 || patience <= 0) {
        throw Error("batch_size, max_epochs and patience must be positive");
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw Error("learning_rate must be finite and non-negative");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error("dropout_rate must lie in [0, 1)");
    if (!off_grid) {
        if (batch_size != 16 && batch_size != 32 && batch_size != 64) {
            throw Error("batch_size " + std::to_string(batch_size) +
                        " is outside {16, 32, 64}; set off_grid to override");
        }
        if (learning_rate < 8e-6 || learning_rate > 3e-5) {
            throw Error("learning_rate outside [8e-6, 3e-5]; set off_grid to override");
        }
    }
}

json TrainConfig::to_json() const {
    return {{"batch_size", batch_size},
            {"learning_rate", learning_rate},
            {"max_epochs", max_epochs},
            {"bounded", bounded},
            {"seed", seed},
            {"patience", patience},
            {"regime", to_string(regime)},
            {"dropout_rate", dropout_rate},
            {"off_grid", off_grid},
            {"optimizer",
             {{"beta1", optimizer.beta1},
              {"beta2", optimizer.beta2},
              {"epsilon", optimizer.epsilon},
              {"weight_decay", optimizer.weight_decay}}}};
}

TrainConfig TrainConfig::from_json(const json& j) {
    TrainConfig c;
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.bounded = j.value("bounded", c.bounded);
    c.seed = j.value("seed", c.seed);
    c.patience = j.value("patience", c.patience);
    if (const auto it = j.find("regime"); it != j.end()) c.regime = parse_regime(it->get<std::string>());
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    c.off_grid = j.value("off_grid", c.off_grid);
    if (const auto it = j.find("optimizer"); it != j.end()) {
        c.optimizer.beta1 = it->value("beta1", c.optimizer.beta1);
        c.optimizer.beta2 = it->value("beta2", c.optimizer.beta2);
        c.optimizer.epsilon = it->value("epsilon", c.optimizer.epsilon);
        c.optimizer.weight_decay = it->value("weight_decay", c.optimizer.weight_decay);
    }
    c.validate();
    return c;
}

std::vector<TrainConfig> default_candidate_grid() {
    struct Row {
        int batch;
        double lr;
        int epochs;
        bool bounded;
    };
    static constexpr Row rows[] = {
        {16, 1e-5, 7, true}, {32, 1e-5, 3, false}, {32, 1e-5, 5, true}, {32, 1e-5, 7, true},
        {32, 2e-5, 5, true}, {32, 8e-6, 3, true},  {32, 8e-6, 7, false},
    };
    std::vector<TrainConfig> grid;
    for (const auto& r : rows) {
        TrainConfig c;
        c.batch_size = r.batch;
        c.learning_rate = r.lr;
        c.max_epochs = r.epochs;
        c.bounded = r.bounded;
        grid.push_back(c);
    }
    return grid;
}

}  // namespace dimasr
