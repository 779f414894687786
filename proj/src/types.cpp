#include "dimasr/types.hpp"
#include "dimasr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dimasr {

PairId PairId::parse(std::string_view text) {
    const auto dash = text.find('-');
    if (dash == std::string_view::npos || dash == 0 || dash + 1 == text.size() ||
        text.find('-', dash + 1) != std::string_view::npos) {
        throw Error("invalid pair id '" + std::string(text) + "', expected <lang>-<dom>");
    }
    return PairId{std::string(text.substr(0, dash)), std::string(text.substr(dash + 1))};
}

const std::vector<PairId>& official_pairs() {
    static const std::vector<PairId> pairs = {
        {"eng", "res"}, {"eng", "lap"}, {"jpn", "hot"}, {"jpn", "fin"}, {"rus", "res"},
        {"tat", "res"}, {"ukr", "res"}, {"zho", "res"}, {"zho", "lap"}, {"zho", "fin"},
    };
    return pairs;
}

bool PairId::is_official() const {
    const auto& pairs = official_pairs();
    return std::find(pairs.begin(), pairs.end(), *this) != pairs.end();
}

bool VAScore::finite() const { return std::isfinite(valence) && std::isfinite(arousal); }

bool VAScore::in_range() const {
    return finite() && valence >= kVaMin && valence <= kVaMax && arousal >= kVaMin &&
           arousal <= kVaMax;
}

std::vector<KeyedScore> gold_of(const std::vector<Instance>& instances) {
    std::vector<KeyedScore> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) {
        if (!inst.gold) {
            throw Error("instance " + inst.id + " / '" + inst.aspect + "' (" + inst.pair.str() +
                        ") has no gold VA");
        }
        out.push_back({key_of(inst), *inst.gold});
    }
    return out;
}

PredictionSet gold_of(const InstancesByPair& instances) {
    PredictionSet out;
    for (const auto& [pair, list] : instances) out.emplace(pair, gold_of(list));
    return out;
}

double Rng::normal() {
    // 1 - uniform() lies in (0, 1], so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dimasr
