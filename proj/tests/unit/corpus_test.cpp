#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include "dimasr/corpus.hpp"
#include "dimasr/rng.hpp"
#include "dimasr/synthetic.hpp"
#include "test_util.hpp"

using namespace dimasr;
using nlohmann::json;

namespace {

const PairId kEngRes = PairId::parse("eng-res");

Quadruplet quad(std::optional<std::string> aspect, double v, double a) {
    return {std::move(aspect), "FOOD#QUALITY", "good", VAScore{v, a}};
}

RawRecord record(std::string id, std::string text, std::vector<Quadruplet> qs) {
    return {std::move(id), std::move(text), std::move(qs), kEngRes};
}

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(PairIdTest, ParsesCanonicalForm) {
    const auto p = PairId::parse("zho-lap");
    EXPECT_EQ(p.language, "zho");
    EXPECT_EQ(p.domain, "lap");
    EXPECT_EQ(p.str(), "zho-lap");
    EXPECT_TRUE(p.is_official());
    EXPECT_FALSE(PairId::parse("deu-car").is_official());
    EXPECT_THROW(PairId::parse("zholap"), Error);
    EXPECT_THROW(PairId::parse("-lap"), Error);
    EXPECT_EQ(official_pairs().size(), 10u);
}

TEST(VaParseTest, DecodesHashSeparatedString) {
    const auto va = corpus::parse_va("7.0#6.5");
    EXPECT_EQ(va.valence, 7.0);
    EXPECT_EQ(va.arousal, 6.5);
}

TEST(VaParseTest, RoundTripsThroughSerializer) {
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        // Two-decimal values survive a 2-decimal serialization exactly.
        const VAScore va{static_cast<double>(100 + rng.index(801)) / 100.0,
                         static_cast<double>(100 + rng.index(801)) / 100.0};
        EXPECT_EQ(corpus::parse_va(corpus::format_va(va, 2)), va);
    }
    EXPECT_EQ(corpus::format_va({7.0, 6.5}, 2), "7.00#6.50");
}

TEST(VaParseTest, RejectsMalformedStringsNamingThem) {
    for (const char* raw : {"7.0", "7.0#", "#6.5", "a#b", "7#6#5", "", "7.0#6.5x"}) {
        const auto msg = error_of([&] { corpus::parse_va(raw); });
        ASSERT_FALSE(msg.empty()) << raw;
        EXPECT_NE(msg.find(std::string("\"") + raw + "\""), std::string::npos) << msg;
    }
}

TEST(QuadrupletFileTest, TwoRecordsKeepOrder) {
    const std::string text = R"([
      {"ID": "b", "Text": "second first", "Quadruplets": []},
      {"ID": "a", "Text": "then this", "Quadruplets": [
        {"Aspect": "food", "Category": "FOOD#QUALITY", "Opinion": "tasty", "VA": "7.0#6.5"}]}
    ])";
    const auto recs = corpus::parse_quadruplet_text(text, kEngRes);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].id, "b");
    EXPECT_EQ(recs[1].id, "a");
    ASSERT_EQ(recs[1].quadruplets.size(), 1u);
    EXPECT_EQ(*recs[1].quadruplets[0].va, (VAScore{7.0, 6.5}));
    EXPECT_EQ(recs[1].pair, kEngRes);
}

TEST(QuadrupletFileTest, JsonLinesAndObjectVa) {
    const std::string text =
        "{\"ID\":\"1\",\"Text\":\"t\",\"Quadruplets\":[{\"Aspect\":\"x\",\"Category\":\"C\","
        "\"Opinion\":\"o\",\"VA\":{\"Valence\":3.5,\"Arousal\":4.25}}]}\n"
        "\n"
        "{\"ID\":\"2\",\"Text\":\"u\",\"Quadruplets\":[]}\n";
    const auto recs = corpus::parse_quadruplet_text(text, kEngRes);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(*recs[0].quadruplets[0].va, (VAScore{3.5, 4.25}));
}

TEST(QuadrupletFileTest, EmptyInputsYieldNoRecords) {
    EXPECT_TRUE(corpus::parse_quadruplet_text("", kEngRes).empty());
    EXPECT_TRUE(corpus::parse_quadruplet_text("  \n", kEngRes).empty());
    EXPECT_TRUE(corpus::parse_quadruplet_text("[]", kEngRes).empty());

    test::TempDir dir("corpus_empty");
    const auto path = dir / "eng-res_train.json";
    std::ofstream(path) << "[]";
    EXPECT_TRUE(corpus::parse_quadruplet_file(path, kEngRes).empty());
}

TEST(QuadrupletFileTest, ErrorsNameRecordAndField) {
    const std::string missing_text = R"([{"ID":"1","Text":"a","Quadruplets":[]},{"ID":"2","Quadruplets":[]}])";
    auto msg = error_of([&] { corpus::parse_quadruplet_text(missing_text, kEngRes); });
    EXPECT_NE(msg.find("record 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'Text'"), std::string::npos) << msg;

    const std::string bad_va =
        R"([{"ID":"1","Text":"a","Quadruplets":[{"Aspect":"x","Category":"C","Opinion":"o","VA":"7;6"}]}])";
    msg = error_of([&] { corpus::parse_quadruplet_text(bad_va, kEngRes); });
    EXPECT_NE(msg.find("record 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("7;6"), std::string::npos) << msg;

    const std::string dup = R"([{"ID":"1","Text":"a","Quadruplets":[]},{"ID":"1","Text":"b","Quadruplets":[]}])";
    msg = error_of([&] { corpus::parse_quadruplet_text(dup, kEngRes); });
    EXPECT_NE(msg.find("duplicate ID"), std::string::npos) << msg;

    EXPECT_THROW(corpus::parse_quadruplet_text("[{\"ID\":", kEngRes), Error);
}

TEST(QuadrupletFileTest, NullAndAbsentAspectAreImplicit) {
    const std::string text = R"([{"ID":"1","Text":"a","Quadruplets":[
        {"Aspect":"NULL","Category":"C","Opinion":"o","VA":"5#5"},
        {"Category":"C","Opinion":"o","VA":"5#5"},
        {"Aspect":null,"Category":"C","Opinion":"o","VA":"5#5"}]}])";
    const auto recs = corpus::parse_quadruplet_text(text, kEngRes);
    ASSERT_EQ(recs[0].quadruplets.size(), 3u);
    for (const auto& q : recs[0].quadruplets) EXPECT_FALSE(q.aspect.has_value());
}

TEST(QuadrupletFileTest, SchemaMapRebindsFieldNames) {
    const auto schema = corpus::Schema::from_json(json{{"id", "id"}, {"text", "sentence"}, {"va", "score"}});
    const std::string text = R"([{"id":"9","sentence":"s","Quadruplets":[
        {"Aspect":"x","Category":"C","Opinion":"o","score":"6.5#3.0"}]}])";
    const auto recs = corpus::parse_quadruplet_text(text, kEngRes, schema);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].text, "s");
    EXPECT_EQ(*recs[0].quadruplets[0].va, (VAScore{6.5, 3.0}));
}

TEST(PreprocessTest, DropsNullAspect) {
    const auto r = corpus::preprocess({record("1", "t", {quad(std::nullopt, 5, 5), quad("battery", 6, 6)})});
    ASSERT_EQ(r.instances.size(), 1u);
    EXPECT_EQ(r.instances[0].aspect, "battery");
    EXPECT_EQ(r.report.null_dropped, 1u);
}

TEST(PreprocessTest, DropsOutOfRangeVa) {
    const auto r = corpus::preprocess({record("1", "t", {quad("food", 9.5, 5.0)})});
    EXPECT_TRUE(r.instances.empty());
    EXPECT_EQ(r.report.range_dropped, 1u);
}

TEST(PreprocessTest, ExpandsDistinctAspects) {
    const auto r = corpus::preprocess({record("1", "shared text", {quad("food", 7, 6), quad("service", 3, 4)})});
    ASSERT_EQ(r.instances.size(), 2u);
    EXPECT_EQ(r.instances[0].text, "shared text");
    EXPECT_EQ(r.instances[1].text, "shared text");
    EXPECT_EQ(r.instances[0].aspect, "food");
    EXPECT_EQ(r.instances[1].aspect, "service");
    EXPECT_EQ(r.report.expanded_records, 1u);
}

TEST(PreprocessTest, KeepsFirstOpinionPerAspect) {
    const auto r = corpus::preprocess({record("1", "t", {quad("screen", 7, 6), quad("screen", 3, 4)})});
    ASSERT_EQ(r.instances.size(), 1u);
    EXPECT_EQ(*r.instances[0].gold, (VAScore{7, 6}));
    EXPECT_EQ(r.report.duplicate_dropped, 1u);
}

TEST(PreprocessTest, ClosedIntervalEndpointsKept) {
    const auto r = corpus::preprocess(
        {record("1", "t", {quad("a", 1.0, 9.0), quad("b", 0.999, 5), quad("c", 5, 9.001)})});
    ASSERT_EQ(r.instances.size(), 1u);
    EXPECT_EQ(r.instances[0].aspect, "a");
    EXPECT_EQ(r.report.range_dropped, 2u);
}

TEST(PreprocessTest, OutOfRangeFirstOpinionDoesNotShadowLaterOne) {
    // The range rule runs before the first-opinion rule.
    const auto r = corpus::preprocess({record("1", "t", {quad("a", 0.5, 5), quad("a", 4, 4)})});
    ASSERT_EQ(r.instances.size(), 1u);
    EXPECT_EQ(*r.instances[0].gold, (VAScore{4, 4}));
}

TEST(PreprocessTest, RandomRecordsSatisfyInvariants) {
    Rng rng(99);
    const std::vector<std::string> aspects = {"food", "staff", "price", "NULLX", "view"};
    std::vector<RawRecord> records;
    for (int i = 0; i < 400; ++i) {
        RawRecord rec = record("r" + std::to_string(i), "text " + std::to_string(i), {});
        const auto nq = rng.index(5);
        for (std::size_t q = 0; q < nq; ++q) {
            std::optional<std::string> aspect;
            if (rng.uniform() > 0.2) aspect = aspects[rng.index(aspects.size())];
            rec.quadruplets.push_back(quad(aspect, rng.uniform(-1.0, 11.0), rng.uniform(0.0, 10.0)));
        }
        records.push_back(rec);
    }
    const auto r = corpus::preprocess(records);
    EXPECT_TRUE(r.report.reconciles());
    EXPECT_EQ(r.report.records, 400u);
    EXPECT_EQ(r.report.emitted, r.instances.size());

    // Independent recount of the rules.
    std::size_t expected = 0;
    for (const auto& rec : records) {
        std::set<std::string> seen;
        for (const auto& q : rec.quadruplets) {
            if (!q.aspect) continue;
            if (q.va->valence < 1 || q.va->valence > 9 || q.va->arousal < 1 || q.va->arousal > 9) continue;
            if (seen.insert(*q.aspect).second) ++expected;
        }
    }
    EXPECT_EQ(r.instances.size(), expected);

    for (const auto& inst : r.instances) {
        EXPECT_NE(inst.aspect, "NULL");
        EXPECT_FALSE(inst.aspect.empty());
        ASSERT_TRUE(inst.gold.has_value());
        EXPECT_TRUE(inst.gold->in_range());
        EXPECT_TRUE(inst.gold->finite());
    }

    const auto again = corpus::preprocess(corpus::to_records(r.instances));
    ASSERT_EQ(again.instances.size(), r.instances.size());
    for (std::size_t i = 0; i < r.instances.size(); ++i) {
        EXPECT_EQ(again.instances[i].id, r.instances[i].id);
        EXPECT_EQ(again.instances[i].aspect, r.instances[i].aspect);
        EXPECT_EQ(again.instances[i].text, r.instances[i].text);
        EXPECT_EQ(again.instances[i].gold, r.instances[i].gold);
    }
    EXPECT_EQ(again.report.null_dropped + again.report.range_dropped + again.report.duplicate_dropped, 0u);
}

namespace {

std::vector<Instance> single_aspect_instances(std::size_t n) {
    std::vector<Instance> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({"r" + std::to_string(i), "text", "a", VAScore{5, 5}, kEngRes});
    }
    return out;
}

}  // namespace

TEST(SplitTest, HundredRecordsGiveNinetyTen) {
    const auto s = corpus::split_train_validation(single_aspect_instances(100), 0.10, 42);
    EXPECT_EQ(s.train.size(), 90u);
    EXPECT_EQ(s.validation.size(), 10u);
}

TEST(SplitTest, FloorWithMinimumOne) {
    auto s = corpus::split_train_validation(single_aspect_instances(19), 0.10, 1);
    EXPECT_EQ(s.validation.size(), 1u);
    s = corpus::split_train_validation(single_aspect_instances(5), 0.10, 1);
    EXPECT_EQ(s.validation.size(), 1u);
    s = corpus::split_train_validation(single_aspect_instances(2), 0.10, 1);
    EXPECT_EQ(s.validation.size(), 1u);
    EXPECT_EQ(s.train.size(), 1u);
}

TEST(SplitTest, DeterministicUnderSeedAndSizePreservingAcrossSeeds) {
    const auto data = single_aspect_instances(57);
    const auto a = corpus::split_train_validation(data, 0.10, 42);
    const auto b = corpus::split_train_validation(data, 0.10, 42);
    ASSERT_EQ(a.validation.size(), b.validation.size());
    for (std::size_t i = 0; i < a.validation.size(); ++i) EXPECT_EQ(a.validation[i].id, b.validation[i].id);

    bool any_different = false;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto c = corpus::split_train_validation(data, 0.10, seed);
        EXPECT_EQ(c.train.size(), a.train.size());
        EXPECT_EQ(c.validation.size(), a.validation.size());
        for (std::size_t i = 0; i < c.validation.size(); ++i) {
            if (c.validation[i].id != a.validation[i].id) any_different = true;
        }
    }
    EXPECT_TRUE(any_different);
}

TEST(SplitTest, RecordDisjointWithExpandedRecords) {
    synthetic::Options o;
    o.records = 200;
    o.multi_aspect_rate = 0.6;
    const auto inst = corpus::preprocess(synthetic::generate_records(kEngRes, o)).instances;
    const auto s = corpus::split_train_validation(inst, 0.10, 42);
    EXPECT_EQ(s.train.size() + s.validation.size(), inst.size());
    std::set<std::string> train_ids;
    for (const auto& i : s.train) train_ids.insert(i.id);
    std::set<std::string> val_ids;
    for (const auto& i : s.validation) {
        EXPECT_FALSE(train_ids.contains(i.id)) << i.id;
        val_ids.insert(i.id);
    }
    std::set<std::string> all_ids;
    for (const auto& i : inst) all_ids.insert(i.id);
    EXPECT_EQ(val_ids.size(), all_ids.size() / 10);
}

TEST(SplitTest, SingleRecordIsAnError) {
    std::vector<Instance> data;
    for (int i = 0; i < 10; ++i) data.push_back({"only", "t", "a" + std::to_string(i), VAScore{5, 5}, kEngRes});
    EXPECT_THROW(corpus::split_train_validation(data, 0.10, 42), Error);
    EXPECT_THROW(corpus::split_train_validation({}, 0.10, 42), Error);
    EXPECT_THROW(corpus::split_train_validation(single_aspect_instances(10), 0.0, 42), Error);
    EXPECT_THROW(corpus::split_train_validation(single_aspect_instances(10), 1.0, 42), Error);
}

TEST(PoolTest, ConcatenatesPairs) {
    const auto a = PairId::parse("aaa-xx");
    const auto b = PairId::parse("bbb-yy");
    InstancesByPair per_pair;
    per_pair[a] = synthetic::generate_instances(a, 3, 1);
    per_pair[b] = synthetic::generate_instances(b, 2, 2);
    const auto pooled = corpus::pool_pairs(per_pair);
    ASSERT_EQ(pooled.size(), 5u);
    EXPECT_EQ(pooled[0].pair, a);
    EXPECT_EQ(pooled[4].pair, b);

    InstancesByPair single{{a, per_pair[a]}};
    const auto same = corpus::pool_pairs(single);
    ASSERT_EQ(same.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(same[i].id, per_pair[a][i].id);
        EXPECT_EQ(same[i].aspect, per_pair[a][i].aspect);
    }
}

TEST(PoolTest, SizeIsSumOverTenPairs) {
    InstancesByPair per_pair;
    std::size_t expected = 0;
    std::uint64_t seed = 3;
    for (const auto& p : official_pairs()) {
        synthetic::Options o;
        o.records = 20 + seed;
        o.seed = seed++;
        per_pair[p] = corpus::preprocess(synthetic::generate_records(p, o)).instances;
        expected += per_pair[p].size();
    }
    EXPECT_EQ(corpus::pool_pairs(per_pair).size(), expected);
}

TEST(InstanceFileTest, RoundTripsAtFullPrecision) {
    test::TempDir dir("instances");
    std::vector<Instance> inst = {
        {"1", "Текст «с» юникодом", "экран", VAScore{1.0 / 3.0, 8.123456789012345}, kEngRes},
        {"2", "电池很好", "电池", std::nullopt, PairId::parse("zho-lap")},
    };
    corpus::write_instances(dir / "x.jsonl", inst);
    const auto back = corpus::read_instances(dir / "x.jsonl");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].text, inst[0].text);
    EXPECT_EQ(back[0].gold, inst[0].gold);
    EXPECT_FALSE(back[1].gold.has_value());
    EXPECT_EQ(back[1].pair, inst[1].pair);
}
