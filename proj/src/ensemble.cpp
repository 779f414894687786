#include "dimasr/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "dimasr/metrics.hpp"

namespace dimasr::ensemble {

using nlohmann::json;

namespace {

const PredictionSet& split_of(const Member& m, Split split) {
    return split == Split::Dev ? m.dev : m.test;
}

const char* split_name(Split split) { return split == Split::Dev ? "dev" : "test"; }

std::set<PairId> pair_keys(const PredictionSet& preds) {
    std::set<PairId> out;
    for (const auto& [pair, list] : preds) out.insert(pair);
    return out;
}

}  // namespace

void CandidatePool::validate() const {
    if (members.size() < 2 || members.size() > kMaxPoolSize) {
        throw Error("candidate pool must hold 2.." + std::to_string(kMaxPoolSize) +
                    " members, got " + std::to_string(members.size()));
    }
    std::set<std::string> ids;
    for (const auto& m : members) {
        if (!ids.insert(m.id).second) throw Error("duplicate candidate id '" + m.id + "'");
    }
    for (const Split split : {Split::Dev, Split::Test}) {
        const auto expected = pair_keys(split_of(members.front(), split));
        for (const auto& m : members) {
            if (pair_keys(split_of(m, split)) != expected) {
                throw Error("candidate '" + m.id + "' does not cover the same " + split_name(split) +
                            " pairs as '" + members.front().id + "'");
            }
        }
    }
}

const Member& CandidatePool::find(const std::string& id) const {
    for (const auto& m : members) {
        if (m.id == id) return m;
    }
    throw Error("candidate '" + id + "' is not in the pool");
}

std::vector<std::string> CandidatePool::ids() const {
    std::vector<std::string> out;
    for (const auto& m : members) out.push_back(m.id);
    return out;
}

std::vector<KeyedScore> average_subset(std::span<const Member* const> subset, const PairId& pair,
                                       Split split) {
    if (subset.empty()) throw Error("cannot average an empty subset");
    std::vector<const Member*> ordered(subset.begin(), subset.end());
    std::sort(ordered.begin(), ordered.end(),
              [](const Member* a, const Member* b) { return a->id < b->id; });

    const auto lookup = [&](const Member* m) -> const std::vector<KeyedScore>& {
        const auto& preds = split_of(*m, split);
        const auto it = preds.find(pair);
        if (it == preds.end()) {
            throw Error("candidate '" + m->id + "' has no " + split_name(split) +
                        " predictions for " + pair.str());
        }
        return it->second;
    };

    // Key order follows the subset's first listed member.
    const auto& reference = lookup(subset.front());
    std::vector<KeyedScore> out;
    out.reserve(reference.size());
    for (const auto& r : reference) out.push_back({r.key, {0.0, 0.0}});

    std::vector<KeyedScore> ref_as_gold = reference;
    for (const Member* m : ordered) {
        std::vector<VAScore> aligned;
        try {
            aligned = metrics::align(lookup(m), ref_as_gold, pair);
        } catch (const Error& e) {
            throw Error("candidate '" + m->id + "' is misaligned with '" + subset.front()->id +
                        "': " + e.what());
        }
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i].va.valence += aligned[i].valence;
            out[i].va.arousal += aligned[i].arousal;
        }
    }
    const double k = static_cast<double>(ordered.size());
    for (auto& o : out) {
        o.va.valence /= k;
        o.va.arousal /= k;
    }
    return out;
}

namespace {

struct Candidate {
    double score;
    std::vector<std::string> ids;  // sorted
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.ids.size() != b.ids.size()) return a.ids.size() < b.ids.size();
    return a.ids < b.ids;
}

PairSelection search_pair(const CandidatePool& pool, const PairId& pair,
                          const std::vector<KeyedScore>& gold, std::size_t min_size,
                          std::size_t max_size) {
    const std::size_t n = pool.members.size();
    std::vector<VAScore> gold_va;
    for (const auto& g : gold) gold_va.push_back(g.va);

    // Dense [member][instance] matrix in gold order; members ordered by id so
    // every subset sums in the same order average_subset uses.
    std::vector<std::size_t> by_id(n);
    for (std::size_t i = 0; i < n; ++i) by_id[i] = i;
    std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) {
        return pool.members[a].id < pool.members[b].id;
    });
    std::vector<std::vector<VAScore>> dense(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& m = pool.members[by_id[r]];
        const auto it = m.dev.find(pair);
        if (it == m.dev.end()) {
            throw Error("candidate '" + m.id + "' has no dev predictions for " + pair.str());
        }
        dense[r] = metrics::align(it->second, gold, pair);
    }

    std::optional<Candidate> best;
    std::size_t scored = 0;
    std::vector<VAScore> avg(gold.size());
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        const auto k = static_cast<std::size_t>(std::popcount(mask));
        if (k < min_size || k > max_size) continue;
        for (auto& a : avg) a = {0.0, 0.0};
        Candidate c{0.0, {}};
        for (std::size_t r = 0; r < n; ++r) {
            if (!(mask & (1u << r))) continue;
            c.ids.push_back(pool.members[by_id[r]].id);
            for (std::size_t i = 0; i < avg.size(); ++i) {
                avg[i].valence += dense[r][i].valence;
                avg[i].arousal += dense[r][i].arousal;
            }
        }
        const double kd = static_cast<double>(k);
        for (auto& a : avg) {
            a.valence /= kd;
            a.arousal /= kd;
        }
        c.score = metrics::rmse_va(avg, gold_va);
        ++scored;
        if (!best || better(c, *best)) best = std::move(c);
    }
    return PairSelection{best->ids, best->score, scored};
}

}  // namespace

EnsembleSelection search(const CandidatePool& pool, const PredictionSet& dev_gold,
                         const SearchOptions& options) {
    pool.validate();
    const std::size_t n = pool.members.size();
    const std::size_t max_size = options.max_size == 0 ? n : options.max_size;
    if (options.min_size < 1) throw Error("min_size must be >= 1");
    if (n < options.min_size) {
        throw Error("pool of " + std::to_string(n) + " is smaller than min_size " +
                    std::to_string(options.min_size));
    }
    if (max_size < options.min_size || max_size > n) {
        throw Error("max_size must lie in [min_size, pool size]");
    }

    EnsembleSelection selection;
    selection.pool = pool.ids();
    selection.min_size = options.min_size;
    selection.max_size = max_size;

    std::vector<PairId> pairs;
    for (const auto& [pair, gold] : dev_gold) pairs.push_back(pair);
    std::vector<PairSelection> results(pairs.size());
    std::vector<std::exception_ptr> errors(pairs.size());
    const auto run = [&](std::size_t i) {
        try {
            results[i] = search_pair(pool, pairs[i], dev_gold.at(pairs[i]), options.min_size, max_size);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const unsigned threads =
        std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(pairs.size())));
    if (threads <= 1) {
        for (std::size_t i = 0; i < pairs.size(); ++i) run(i);
    } else {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < threads; ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t i = w; i < pairs.size(); i += threads) run(i);
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) selection.per_pair.emplace(pairs[i], results[i]);
    return selection;
}

PredictionSet apply(const EnsembleSelection& selection, const CandidatePool& pool, Split split) {
    PredictionSet out;
    for (const auto& [pair, chosen] : selection.per_pair) {
        std::vector<const Member*> members;
        for (const auto& id : chosen.members) members.push_back(&pool.find(id));
        out.emplace(pair, average_subset(members, pair, split));
    }
    return out;
}

json EnsembleSelection::to_json() const {
    json pairs = json::object();
    for (const auto& [pair, sel] : per_pair) {
        pairs[pair.str()] = {{"members", sel.members},
                             {"dev_rmse", sel.dev_rmse},
                             {"subsets_scored", sel.subsets_scored}};
    }
    return {{"pool", pool}, {"min_size", min_size}, {"max_size", max_size}, {"pairs", pairs}};
}

EnsembleSelection EnsembleSelection::from_json(const json& j) {
    EnsembleSelection s;
    try {
        s.pool = j.at("pool").get<std::vector<std::string>>();
        s.min_size = j.at("min_size").get<std::size_t>();
        s.max_size = j.at("max_size").get<std::size_t>();
        for (const auto& [key, v] : j.at("pairs").items()) {
            PairSelection p;
            p.members = v.at("members").get<std::vector<std::string>>();
            p.dev_rmse = v.at("dev_rmse").get<double>();
            p.subsets_scored = v.value("subsets_scored", std::size_t{0});
            s.per_pair.emplace(PairId::parse(key), std::move(p));
        }
    } catch (const json::exception& e) {
        throw Error(std::string("selection file: ") + e.what());
    }
    return s;
}

std::string EnsembleSelection::membership_matrix(const std::string& mark) const {
    std::size_t pair_w = 4;
    for (const auto& [pair, sel] : per_pair) pair_w = std::max(pair_w, pair.str().size());

    // Column widths count code points so a multi-byte mark still lines up.
    const auto display_width = [](const std::string& s) {
        std::size_t w = 0;
        for (const unsigned char c : s) w += (c & 0xC0) != 0x80;
        return w;
    };
    std::vector<std::size_t> col_w;
    for (const auto& id : pool) col_w.push_back(std::max(display_width(id), display_width(mark)));

    std::ostringstream out;
    const auto pad = [&](const std::string& s, std::size_t w) {
        const std::size_t dw = display_width(s);
        const std::size_t left = w > dw ? (w - dw) / 2 : 0;
        const std::size_t right = w > dw ? w - dw - left : 0;
        out << "  " << std::string(left, ' ') << s << std::string(right, ' ');
    };
    out << "Pair" << std::string(pair_w - 4, ' ');
    for (std::size_t c = 0; c < pool.size(); ++c) pad(pool[c], col_w[c]);
    out << "  Number\n";
    std::vector<PairId> rows;
    for (const auto& [pair, sel] : per_pair) rows.push_back(pair);
    for (const auto& pair : metrics::display_order(rows)) {
        const auto& sel = per_pair.at(pair);
        const auto name = pair.str();
        out << name << std::string(pair_w - name.size(), ' ');
        for (std::size_t c = 0; c < pool.size(); ++c) {
            const bool in = std::find(sel.members.begin(), sel.members.end(), pool[c]) !=
                            sel.members.end();
            pad(in ? mark : "", col_w[c]);
        }
        out << "  " << sel.members.size() << '\n';
    }
    return out.str();
}

}  // namespace dimasr::ensemble
