#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dimasr/types.hpp"

namespace dimasr::corpus {

// Field names of the quadruplet container. Official releases that rename a
// field bind by editing this map (or a JSON file loaded into it).
struct Schema {
    std::string id = "ID";
    std::string text = "Text";
    std::string quadruplets = "Quadruplets";
    std::string aspect = "Aspect";
    std::string category = "Category";
    std::string opinion = "Opinion";
    std::string va = "VA";
    std::string valence = "Valence";
    std::string arousal = "Arousal";
    std::string null_marker = "NULL";

    static Schema from_json(const nlohmann::json& j);
    static Schema load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

// "<valence>#<arousal>" in decimal notation. Throws with the raw string on
// anything else (missing '#', trailing garbage, empty halves).
VAScore parse_va(std::string_view raw);
std::string format_va(const VAScore& va, int precision);

// Reads either a JSON array of records or JSON Lines (one record per line).
// An empty file, or an empty array, yields no records.
std::vector<RawRecord> parse_quadruplet_file(const std::filesystem::path& path, const PairId& pair,
                                             const Schema& schema = {});
std::vector<RawRecord> parse_quadruplet_text(std::string_view content, const PairId& pair,
                                             const Schema& schema = {});
// One record; `index` is only used in error messages.
RawRecord parse_record(const nlohmann::json& j, std::size_t index, const PairId& pair,
                       const Schema& schema = {});

struct PreprocessReport {
    std::size_t records = 0;
    std::size_t quadruplets = 0;
    std::size_t null_dropped = 0;
    std::size_t range_dropped = 0;
    std::size_t duplicate_dropped = 0;  // later opinions on an already-emitted aspect
    std::size_t emitted = 0;
    std::size_t expanded_records = 0;  // records yielding two or more instances

    // quadruplets == null + range + duplicate + emitted
    bool reconciles() const;
    PreprocessReport& operator+=(const PreprocessReport& other);
    nlohmann::json to_json() const;
};

struct PreprocessResult {
    std::vector<Instance> instances;
    PreprocessReport report;
};

// Per record, in quadruplet order: drop implicit aspects, drop VA outside
// [1, 9] (component-wise), keep the first surviving VA of each aspect string,
// and emit one instance per remaining aspect with the full record text.
PreprocessResult preprocess(const std::vector<RawRecord>& records);

// Re-wraps clean instances as records (consecutive instances sharing a
// record id are grouped), so preprocess can be re-applied.
std::vector<RawRecord> to_records(const std::vector<Instance>& instances);

struct TrainValidation {
    std::vector<Instance> train;
    std::vector<Instance> validation;
};

// Record-disjoint holdout: records (pair + id) are shuffled under `seed` and
// the last max(1, floor(fraction * records)) are held out.
TrainValidation split_train_validation(const std::vector<Instance>& instances,
                                       double fraction, std::uint64_t seed);

// Concatenation in pair order. Pair tags stay on the instances for
// evaluation; nothing downstream feeds them to the encoder.
std::vector<Instance> pool_pairs(const InstancesByPair& per_pair);

// Clean instance files: JSON Lines of {ID, Text, Aspect, Pair[, VA]} with VA
// stored as {Valence, Arousal} at full precision.
void write_instances(const std::filesystem::path& path, const std::vector<Instance>& instances);
std::vector<Instance> read_instances(const std::filesystem::path& path);

}  // namespace dimasr::corpus
