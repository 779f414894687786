#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dimasr/corpus.hpp"
#include "dimasr/types.hpp"

// Seeded generator of quadruplet-style review data. Gold VA follows the
// opinion word attached to each aspect (plus noise), so a model over token
// features has something to learn. Used by tests and desk-scale demos.
namespace dimasr::synthetic {

struct Options {
    std::size_t records = 60;
    std::uint64_t seed = 42;
    double noise = 0.3;
    double null_rate = 0.1;           // extra implicit-aspect quadruplet
    double out_of_range_rate = 0.03;  // quadruplet with a VA component outside [1, 9]
    double multi_aspect_rate = 0.35;  // record with a second aspect
    double repeat_rate = 0.1;         // aspect mentioned twice with different opinions
    bool labelled = true;
};

std::vector<RawRecord> generate_records(const PairId& pair, const Options& options);

// JSON Lines in the default schema; VA written as "<v>#<a>" with 2 decimals.
std::string render_quadruplet_file(const std::vector<RawRecord>& records);

// Writes <pair>_train.jsonl, <pair>_dev.jsonl and <pair>_test.jsonl for
// every pair. Record counts for dev/test are a quarter of `options.records`
// (at least 4). Test files are labelled only when `labelled_test` is set.
void write_dataset(const std::filesystem::path& dir, const std::vector<PairId>& pairs,
                   const Options& options, bool labelled_test = true);

// Clean instances, one per record, for unit tests that skip preprocessing.
std::vector<Instance> generate_instances(const PairId& pair, std::size_t count, std::uint64_t seed);

}  // namespace dimasr::synthetic
