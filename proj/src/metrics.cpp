#include "dimasr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dimasr::metrics {

double rmse_va(std::span<const VAScore> preds, std::span<const VAScore> golds) {
    if (preds.empty()) throw Error("rmse_va of an empty prediction list");
    if (preds.size() != golds.size()) {
        throw Error("rmse_va: " + std::to_string(preds.size()) + " predictions vs " +
                    std::to_string(golds.size()) + " gold scores");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double dv = preds[i].valence - golds[i].valence;
        const double da = preds[i].arousal - golds[i].arousal;
        sum += dv * dv + da * da;
    }
    return std::sqrt(sum / static_cast<double>(preds.size()));
}

std::vector<VAScore> align(const std::vector<KeyedScore>& preds,
                           const std::vector<KeyedScore>& gold, const PairId& pair) {
    std::map<InstanceKey, const VAScore*> by_key;
    for (const auto& p : preds) {
        if (!by_key.emplace(p.key, &p.va).second) {
            throw Error(pair.str() + ": duplicate prediction for " + p.key.id + " / '" +
                        p.key.aspect + "'");
        }
    }
    if (by_key.size() != gold.size()) {
        throw Error(pair.str() + ": " + std::to_string(by_key.size()) + " predictions for " +
                    std::to_string(gold.size()) + " gold instances");
    }
    std::vector<VAScore> aligned;
    aligned.reserve(gold.size());
    for (const auto& g : gold) {
        const auto it = by_key.find(g.key);
        if (it == by_key.end()) {
            throw Error(pair.str() + ": no prediction for " + g.key.id + " / '" + g.key.aspect + "'");
        }
        aligned.push_back(*it->second);
    }
    return aligned;
}

double rmse_va(const std::vector<KeyedScore>& preds, const std::vector<KeyedScore>& gold,
               const PairId& pair) {
    const auto aligned = align(preds, gold, pair);
    std::vector<VAScore> g;
    g.reserve(gold.size());
    for (const auto& x : gold) g.push_back(x.va);
    return rmse_va(aligned, g);
}

EvalReport evaluate(const PredictionSet& predictions, const PredictionSet& gold) {
    EvalReport report;
    for (const auto& [pair, g] : gold) {
        const auto it = predictions.find(pair);
        if (it == predictions.end()) throw Error("no predictions for pair " + pair.str());
        report.per_pair[pair] = rmse_va(it->second, g, pair);
        report.n_per_pair[pair] = g.size();
    }
    for (const auto& [pair, p] : predictions) {
        if (!gold.contains(pair)) throw Error("no gold data for predicted pair " + pair.str());
    }
    if (!report.per_pair.empty()) {
        double sum = 0.0;
        for (const auto& [pair, v] : report.per_pair) sum += v;
        report.average = sum / static_cast<double>(report.per_pair.size());
    }
    return report;
}

std::vector<PairId> display_order(const std::vector<PairId>& pairs) {
    std::vector<PairId> out;
    for (const auto& p : official_pairs()) {
        if (std::find(pairs.begin(), pairs.end(), p) != pairs.end()) out.push_back(p);
    }
    std::vector<PairId> rest;
    for (const auto& p : pairs) {
        if (!p.is_official()) rest.push_back(p);
    }
    std::sort(rest.begin(), rest.end());
    rest.erase(std::unique(rest.begin(), rest.end()), rest.end());
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json pairs = nlohmann::json::object();
    for (const auto& [pair, v] : per_pair) {
        pairs[pair.str()] = {{"rmse_va", v}, {"n", n_per_pair.at(pair)}};
    }
    return {{"pairs", pairs}, {"average", average}};
}

std::string EvalReport::to_table(const std::string& row_label) const {
    std::vector<PairId> keys;
    for (const auto& [pair, v] : per_pair) keys.push_back(pair);
    const auto order = display_order(keys);

    const std::size_t label_w = std::max<std::size_t>(row_label.size(), 7);
    std::ostringstream out;
    const auto cell = [&](const std::string& s, std::size_t w) {
        out << ' ' << std::string(w > s.size() ? w - s.size() : 0, ' ') << s;
    };
    out << std::string(label_w, ' ');
    for (const auto& p : order) cell(p.str(), std::max<std::size_t>(p.str().size(), 7));
    cell("Avg.", 7);
    out << '\n';

    out << row_label << std::string(label_w - row_label.size(), ' ');
    char buf[32];
    for (const auto& p : order) {
        std::snprintf(buf, sizeof buf, "%.4f", per_pair.at(p));
        cell(buf, std::max<std::size_t>(p.str().size(), 7));
    }
    std::snprintf(buf, sizeof buf, "%.4f", average);
    cell(buf, 7);
    out << '\n';
    return out.str();
}

}  // namespace dimasr::metrics
