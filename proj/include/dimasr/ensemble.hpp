#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "dimasr/types.hpp"

namespace dimasr::ensemble {

enum class Split { Dev, Test };

struct Member {
    std::string id;
    PredictionSet dev;
    PredictionSet test;
};

struct CandidatePool {
    std::vector<Member> members;

    // 2..12 members with distinct ids; all members cover the same pairs on
    // each split.
    void validate() const;
    const Member& find(const std::string& id) const;
    std::vector<std::string> ids() const;
};

inline constexpr std::size_t kMaxPoolSize = 12;

// Element-wise mean of valence and of arousal over `subset`, in the first
// member's key order. Members are summed in id order so the result does not
// depend on how the subset is listed.
std::vector<KeyedScore> average_subset(std::span<const Member* const> subset, const PairId& pair,
                                       Split split);

struct PairSelection {
    std::vector<std::string> members;  // sorted by id
    double dev_rmse = 0.0;
    std::size_t subsets_scored = 0;
};

struct EnsembleSelection {
    std::vector<std::string> pool;  // candidate ids, pool order
    std::size_t min_size = 2;
    std::size_t max_size = 0;
    std::map<PairId, PairSelection> per_pair;

    nlohmann::json to_json() const;
    static EnsembleSelection from_json(const nlohmann::json& j);
    // One row per pair, one column per candidate, a check mark where the
    // candidate is selected, and the subset size.
    std::string membership_matrix(const std::string& mark = "✓") const;
};

struct SearchOptions {
    std::size_t min_size = 2;
    std::size_t max_size = 0;  // 0 means the pool size
    unsigned threads = 1;
};

// For every pair in `dev_gold`, scores each subset with min_size <= |S| <=
// max_size by RMSE_VA of its averaged dev predictions and keeps the
// minimiser. Ties go to the smaller subset, then the lexicographically
// smaller id tuple. Test predictions are never read.
EnsembleSelection search(const CandidatePool& pool, const PredictionSet& dev_gold,
                         const SearchOptions& options = {});

PredictionSet apply(const EnsembleSelection& selection, const CandidatePool& pool, Split split);

}  // namespace dimasr::ensemble
