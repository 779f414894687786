#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "dimasr/metrics.hpp"
#include "dimasr/rng.hpp"

using namespace dimasr;

namespace {

// Two passes: squared distances first, then their mean.
double brute_rmse(const std::vector<VAScore>& p, const std::vector<VAScore>& g) {
    std::vector<double> sq;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double dv = p[i].valence - g[i].valence;
        const double da = p[i].arousal - g[i].arousal;
        sq.push_back(dv * dv + da * da);
    }
    long double total = 0;
    for (double s : sq) total += s;
    return std::sqrt(static_cast<double>(total / sq.size()));
}

std::vector<KeyedScore> keyed(const std::vector<VAScore>& v, const std::string& prefix = "r") {
    std::vector<KeyedScore> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back({{prefix + std::to_string(i), "a"}, v[i]});
    return out;
}

}  // namespace

TEST(RmseTest, WorkedValues) {
    EXPECT_EQ(metrics::rmse_va(std::vector<VAScore>{{6, 5}}, std::vector<VAScore>{{5, 6}}), std::sqrt(2.0));
    const std::vector<VAScore> p = {{6, 5}, {5, 7}};
    const std::vector<VAScore> g = {{5, 5}, {5, 5}};
    EXPECT_EQ(metrics::rmse_va(p, g), std::sqrt(2.5));
    EXPECT_EQ(metrics::rmse_va(g, g), 0.0);
}

TEST(RmseTest, Errors) {
    const std::vector<VAScore> one = {{5, 5}};
    const std::vector<VAScore> two = {{5, 5}, {5, 5}};
    EXPECT_THROW(metrics::rmse_va(std::vector<VAScore>{}, std::vector<VAScore>{}), Error);
    EXPECT_THROW(metrics::rmse_va(one, two), Error);
}

TEST(RmseTest, MatchesBruteForceOracle) {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<VAScore> p(1000), g(1000);
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = {rng.uniform(0, 10), rng.uniform(0, 10)};
            g[i] = {rng.uniform(1, 9), rng.uniform(1, 9)};
        }
        EXPECT_NEAR(metrics::rmse_va(p, g), brute_rmse(p, g), 1e-9);
    }
}

TEST(RmseTest, NonNegativeZeroOnlyWhenExact) {
    std::vector<VAScore> g = {{3, 4}, {5, 6}};
    auto p = g;
    EXPECT_EQ(metrics::rmse_va(p, g), 0.0);
    p[1].arousal += 1e-9;
    EXPECT_GT(metrics::rmse_va(p, g), 0.0);
}

TEST(RmseTest, PermutationInvarianceAndScaling) {
    Rng rng(22);
    std::vector<VAScore> p(200), g(200);
    for (std::size_t i = 0; i < p.size(); ++i) {
        g[i] = {rng.uniform(1, 9), rng.uniform(1, 9)};
        p[i] = {g[i].valence + rng.uniform(-2, 2), g[i].arousal + rng.uniform(-2, 2)};
    }
    const double base = metrics::rmse_va(p, g);

    std::vector<std::size_t> perm(p.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<VAScore> pp, gp;
    for (auto i : perm) {
        pp.push_back(p[i]);
        gp.push_back(g[i]);
    }
    EXPECT_NEAR(metrics::rmse_va(pp, gp), base, 1e-12);

    for (double c : {0.5, 2.0, 7.0}) {
        std::vector<VAScore> scaled;
        for (std::size_t i = 0; i < p.size(); ++i) {
            scaled.push_back({g[i].valence + c * (p[i].valence - g[i].valence),
                              g[i].arousal + c * (p[i].arousal - g[i].arousal)});
        }
        EXPECT_NEAR(metrics::rmse_va(scaled, g), c * base, 1e-9);
    }
}

TEST(AlignTest, MatchesByKeyNotPosition) {
    const PairId pair = PairId::parse("eng-res");
    const auto gold = keyed({{5, 5}, {6, 6}, {7, 7}});
    auto preds = gold;
    std::swap(preds[0], preds[2]);
    EXPECT_EQ(metrics::rmse_va(preds, gold, pair), 0.0);

    auto dup = gold;
    dup.push_back(gold[0]);
    EXPECT_THROW(metrics::align(dup, gold, pair), Error);
    auto missing = gold;
    missing.pop_back();
    EXPECT_THROW(metrics::align(missing, gold, pair), Error);
    auto extra = gold;
    extra.push_back({{"zzz", "a"}, {5, 5}});
    EXPECT_THROW(metrics::align(extra, gold, pair), Error);
}

TEST(EvaluateTest, PerfectPredictionsGiveZeros) {
    PredictionSet gold;
    for (const char* p : {"eng-res", "jpn-hot", "tat-res"}) gold[PairId::parse(p)] = keyed({{5, 5}, {2, 8}});
    const auto r = metrics::evaluate(gold, gold);
    EXPECT_EQ(r.per_pair.size(), 3u);
    for (const auto& [p, v] : r.per_pair) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(r.average, 0.0);
    EXPECT_EQ(r.n_per_pair.at(PairId::parse("jpn-hot")), 2u);
}

TEST(EvaluateTest, UnweightedAverage) {
    PredictionSet gold, preds;
    const auto a = PairId::parse("eng-res");
    const auto b = PairId::parse("zho-res");
    gold[a] = keyed({{5, 5}});
    preds[a] = keyed({{6, 5}});  // 1.0
    gold[b] = keyed({{5, 5}, {5, 5}, {5, 5}});
    preds[b] = keyed({{7, 5}, {5, 3}, {5, 7}});  // 2.0
    const auto r = metrics::evaluate(preds, gold);
    EXPECT_EQ(r.per_pair.at(a), 1.0);
    EXPECT_EQ(r.per_pair.at(b), 2.0);
    EXPECT_EQ(r.average, 1.5);
}

TEST(EvaluateTest, TenPairsAverageMatchesExternalMean) {
    Rng rng(23);
    PredictionSet gold, preds;
    std::vector<double> per;
    for (const auto& p : official_pairs()) {
        std::vector<VAScore> g, q;
        const auto n = 5 + rng.index(50);
        for (std::size_t i = 0; i < n; ++i) {
            g.push_back({rng.uniform(1, 9), rng.uniform(1, 9)});
            q.push_back({rng.uniform(1, 9), rng.uniform(1, 9)});
        }
        gold[p] = keyed(g);
        preds[p] = keyed(q);
        per.push_back(brute_rmse(q, g));
    }
    const auto r = metrics::evaluate(preds, gold);
    EXPECT_NEAR(r.average, std::accumulate(per.begin(), per.end(), 0.0) / per.size(), 1e-12);
}

TEST(EvaluateTest, MissingPairIsNamed) {
    PredictionSet gold, preds;
    gold[PairId::parse("eng-res")] = keyed({{5, 5}});
    gold[PairId::parse("ukr-res")] = keyed({{5, 5}});
    preds[PairId::parse("eng-res")] = keyed({{5, 5}});
    try {
        metrics::evaluate(preds, gold);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("ukr-res"), std::string::npos) << e.what();
    }
}

TEST(ReportTest, TableFollowsLeaderboardOrder) {
    metrics::EvalReport r;
    r.per_pair[PairId::parse("zho-fin")] = 0.5;
    r.per_pair[PairId::parse("eng-res")] = 1.25;
    r.per_pair[PairId::parse("aaa-bb")] = 2.0;
    for (const auto& [p, v] : r.per_pair) r.n_per_pair[p] = 4;
    r.average = (0.5 + 1.25 + 2.0) / 3;
    const auto t = r.to_table("Ours");
    const auto eng = t.find("eng-res");
    const auto zho = t.find("zho-fin");
    const auto extra = t.find("aaa-bb");
    const auto avg = t.find("Avg.");
    ASSERT_NE(eng, std::string::npos);
    EXPECT_LT(eng, zho);
    EXPECT_LT(zho, extra);
    EXPECT_LT(extra, avg);
    EXPECT_NE(t.find("Ours"), std::string::npos);
    EXPECT_NE(t.find("1.2500"), std::string::npos);

    const auto order = metrics::display_order({PairId::parse("aaa-bb"), PairId::parse("zho-fin"), PairId::parse("eng-res")});
    EXPECT_EQ(order.front(), PairId::parse("eng-res"));
    EXPECT_EQ(order.back(), PairId::parse("aaa-bb"));
    EXPECT_DOUBLE_EQ(r.to_json().at("average").get<double>(), r.average);
}
