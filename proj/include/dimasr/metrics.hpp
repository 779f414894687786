#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "dimasr/types.hpp"

namespace dimasr::metrics {

// sqrt( (1/N) * sum_i [ (V_p - V_g)^2 + (A_p - A_g)^2 ] ), N = instance count.
double rmse_va(std::span<const VAScore> preds, std::span<const VAScore> golds);

// Aligns predictions to gold by (id, aspect). Every gold key must be
// predicted exactly once; extra or duplicate keys are errors.
std::vector<VAScore> align(const std::vector<KeyedScore>& preds,
                           const std::vector<KeyedScore>& gold, const PairId& pair);
double rmse_va(const std::vector<KeyedScore>& preds, const std::vector<KeyedScore>& gold,
               const PairId& pair);

struct EvalReport {
    std::map<PairId, double> per_pair;
    std::map<PairId, std::size_t> n_per_pair;
    double average = 0.0;  // unweighted mean over pairs

    nlohmann::json to_json() const;
    // Official pairs first in leaderboard column order, then any others,
    // then the average.
    std::string to_table(const std::string& row_label = "RMSE_VA") const;
};

// Pair key sets must match exactly; a pair missing from `predictions` is
// reported by name.
EvalReport evaluate(const PredictionSet& predictions, const PredictionSet& gold);

// Official pairs in leaderboard order, then remaining pairs sorted.
std::vector<PairId> display_order(const std::vector<PairId>& pairs);

}  // namespace dimasr::metrics
