#pragma once

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dimasr {

// Every recoverable failure in the library surfaces as this type; the message
// names the offending input (file, record index, field, pair).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kVaMin = 1.0;
inline constexpr double kVaMax = 9.0;

// A language-domain dataset key, written "<lang>-<dom>" (e.g. "zho-res").
struct PairId {
    std::string language;
    std::string domain;

    static PairId parse(std::string_view text);
    std::string str() const { return language + "-" + domain; }
    bool is_official() const;

    auto operator<=>(const PairId&) const = default;
};

// The ten shared-task pairs in leaderboard column order.
const std::vector<PairId>& official_pairs();

struct VAScore {
    double valence = 0.0;
    double arousal = 0.0;

    bool finite() const;
    // Closed interval [1, 9] on both components.
    bool in_range() const;

    bool operator==(const VAScore&) const = default;
};

struct Quadruplet {
    std::optional<std::string> aspect;  // nullopt encodes an implicit (NULL) aspect
    std::string category;
    std::string opinion;
    std::optional<VAScore> va;  // absent in unlabelled (test) files
};

struct RawRecord {
    std::string id;
    std::string text;
    std::vector<Quadruplet> quadruplets;
    PairId pair;
};

struct Instance {
    std::string id;
    std::string text;
    std::string aspect;
    std::optional<VAScore> gold;
    PairId pair;
};

// Predictions and gold values are aligned by (record id, aspect), never by
// list position.
struct InstanceKey {
    std::string id;
    std::string aspect;

    auto operator<=>(const InstanceKey&) const = default;
};

inline InstanceKey key_of(const Instance& inst) { return {inst.id, inst.aspect}; }

struct KeyedScore {
    InstanceKey key;
    VAScore va;

    bool operator==(const KeyedScore&) const = default;
};

using PredictionSet = std::map<PairId, std::vector<KeyedScore>>;
using InstancesByPair = std::map<PairId, std::vector<Instance>>;

// Gold scores of labelled instances, keyed the same way as predictions.
// Throws when an instance carries no gold.
std::vector<KeyedScore> gold_of(const std::vector<Instance>& instances);
PredictionSet gold_of(const InstancesByPair& instances);

}  // namespace dimasr
