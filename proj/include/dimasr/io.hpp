#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dimasr/types.hpp"

namespace dimasr::io {

std::string read_file(const std::filesystem::path& path);
// Creates parent directories as needed.
void write_file(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Full-precision prediction files: JSON Lines of {ID, Aspect, Valence, Arousal}.
void write_predictions(const std::filesystem::path& path, const std::vector<KeyedScore>& preds);
std::vector<KeyedScore> read_predictions(const std::filesystem::path& path);

struct ClampEvent {
    PairId pair;
    InstanceKey key;
    VAScore before;
    VAScore after;
};

// Clamps every score into [1, 9]; each changed instance is appended to `log`.
void clamp_predictions(PredictionSet& preds, std::vector<ClampEvent>* log);

// Leaderboard submission: JSON Lines of {ID, Aspect, VA: "<v>#<a>"} with
// `precision` decimals, one line per prediction, input order.
std::string render_submission(const std::vector<KeyedScore>& preds, int precision);

}  // namespace dimasr::io
