#include "dimasr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "json.hpp"

#include "dimasr/io.hpp"
#include "dimasr/rng.hpp"

namespace dimasr::synthetic {

namespace {

struct Opinion {
    const char* word;
    double valence;
    double arousal;
};

constexpr Opinion kOpinions[] = {
    {"amazing", 8.6, 8.0},  {"excellent", 8.4, 7.0}, {"great", 7.8, 6.5}, {"good", 7.0, 5.5},
    {"nice", 6.8, 5.0},     {"calm", 6.2, 2.5},      {"fine", 6.0, 4.5},  {"okay", 5.2, 4.0},
    {"mediocre", 4.2, 4.0}, {"dull", 3.8, 2.8},      {"poor", 3.0, 5.0},  {"bad", 2.6, 5.5},
    {"awful", 1.8, 7.0},    {"terrible", 1.6, 7.5},
};

constexpr const char* kFillers[] = {"really", "we", "think", "again", "honestly", "quite", "today"};

const std::vector<std::string>& aspects_for(const std::string& domain) {
    static const std::map<std::string, std::vector<std::string>> table = {
        {"res", {"food", "service", "staff", "pasta", "wine", "dessert", "price", "ambience"}},
        {"lap", {"battery", "screen", "keyboard", "fan", "price", "speakers", "trackpad"}},
        {"hot", {"room", "bed", "breakfast", "staff", "location", "pool", "lobby"}},
        {"fin", {"earnings", "revenue", "outlook", "margin", "guidance", "dividend"}},
    };
    static const std::vector<std::string> fallback = {"quality", "design", "support", "value",
                                                      "delivery", "packaging"};
    const auto it = table.find(domain);
    return it == table.end() ? fallback : it->second;
}

void append_utf8(std::string& out, char32_t c) {
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

std::uint64_t hash_str(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

// Renders an English base word in the pair's language: two CJK ideographs
// for zho/jpn, a shifted Cyrillic transliteration for rus/ukr/tat, and the
// word itself otherwise.
class Lexicon {
public:
    explicit Lexicon(const std::string& language) : language_(language) {}

    std::string word(const std::string& base) const {
        if (language_ == "zho" || language_ == "jpn") {
            std::string out;
            const std::uint64_t h = hash_str(language_ + ":" + base);
            append_utf8(out, static_cast<char32_t>(0x4E00 + (h % 0x5000)));
            append_utf8(out, static_cast<char32_t>(0x4E00 + ((h >> 20) % 0x5000)));
            return out;
        }
        if (language_ == "rus" || language_ == "ukr" || language_ == "tat") {
            const unsigned shift = language_ == "rus" ? 0 : language_ == "ukr" ? 3 : 7;
            std::string out;
            for (const char c : base) {
                append_utf8(out, static_cast<char32_t>(0x0430 + (static_cast<unsigned>(c - 'a') + shift) % 32));
            }
            return out;
        }
        return base;
    }

    bool spaced() const { return language_ != "zho" && language_ != "jpn"; }

private:
    std::string language_;
};

class TextBuilder {
public:
    explicit TextBuilder(const Lexicon& lex) : lex_(lex) {}
    void add(const std::string& base) { parts_.push_back(lex_.word(base)); }
    void punct(const std::string& p) { parts_.push_back(p); }
    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (i > 0 && lex_.spaced() && parts_[i] != "," && parts_[i] != ".") out.push_back(' ');
            out += parts_[i];
        }
        return out;
    }

private:
    const Lexicon& lex_;
    std::vector<std::string> parts_;
};

double round2(double x) { return std::round(x * 100.0) / 100.0; }

VAScore noisy(const Opinion& o, double noise, Rng& rng) {
    const auto jitter = [&](double v) {
        return round2(std::clamp(v + noise * rng.normal(), kVaMin, kVaMax));
    };
    return {jitter(o.valence), jitter(o.arousal)};
}

std::string category_for(const PairId& pair, const std::string& aspect) {
    std::string cat = pair.domain + "#" + aspect;
    std::transform(cat.begin(), cat.end(), cat.begin(), [](unsigned char c) {
        return static_cast<char>(std::toupper(c));
    });
    return cat;
}

}  // namespace

std::vector<RawRecord> generate_records(const PairId& pair, const Options& options) {
    Rng rng(mix64(options.seed ^ hash_str(pair.str())));
    const Lexicon lex(pair.language);
    const auto& aspects = aspects_for(pair.domain);
    const std::size_t n_op = std::size(kOpinions);

    std::vector<RawRecord> records;
    for (std::size_t r = 0; r < options.records; ++r) {
        RawRecord rec;
        rec.pair = pair;
        char id[64];
        std::snprintf(id, sizeof id, "%s:%04zu", pair.str().c_str(), r);
        rec.id = id;

        TextBuilder text(lex);
        const auto mention = [&](const std::string& aspect, const Opinion& op, VAScore va) {
            text.add("the");
            text.add(aspect);
            text.add("was");
            if (rng.uniform() < 0.4) text.add(kFillers[rng.index(std::size(kFillers))]);
            text.add(op.word);
            Quadruplet q;
            q.aspect = lex.word(aspect);
            q.category = category_for(pair, aspect);
            q.opinion = lex.word(op.word);
            if (options.labelled) q.va = va;
            rec.quadruplets.push_back(std::move(q));
        };

        const std::size_t a1 = rng.index(aspects.size());
        const auto& op1 = kOpinions[rng.index(n_op)];
        mention(aspects[a1], op1, noisy(op1, options.noise, rng));

        std::vector<std::size_t> used = {a1};
        const auto fresh_aspect = [&] {
            std::size_t a;
            do {
                a = rng.index(aspects.size());
            } while (std::find(used.begin(), used.end(), a) != used.end());
            used.push_back(a);
            return a;
        };

        if (rng.uniform() < options.multi_aspect_rate && used.size() < aspects.size()) {
            text.punct(",");
            text.add("but");
            const auto a2 = fresh_aspect();
            const auto& op2 = kOpinions[rng.index(n_op)];
            mention(aspects[a2], op2, noisy(op2, options.noise, rng));
        }
        if (rng.uniform() < options.repeat_rate) {
            text.punct(",");
            text.add("later");
            const auto& op3 = kOpinions[rng.index(n_op)];
            mention(aspects[a1], op3, noisy(op3, options.noise, rng));
        }
        if (rng.uniform() < options.out_of_range_rate && used.size() < aspects.size()) {
            text.punct(",");
            text.add("and");
            const auto a4 = fresh_aspect();
            const auto& op4 = kOpinions[rng.index(n_op)];
            mention(aspects[a4], op4, VAScore{9.5, round2(op4.arousal)});
        }
        if (rng.uniform() < options.null_rate) {
            text.punct(",");
            text.add("overall");
            text.add("we");
            text.add("liked");
            text.add("it");
            Quadruplet q;
            q.category = category_for(pair, "general");
            q.opinion = lex.word("liked");
            if (options.labelled) q.va = VAScore{6.5, 5.0};
            rec.quadruplets.push_back(std::move(q));
        }
        text.punct(".");
        rec.text = text.str();
        records.push_back(std::move(rec));
    }
    return records;
}

std::string render_quadruplet_file(const std::vector<RawRecord>& records) {
    std::ostringstream out;
    for (const auto& rec : records) {
        nlohmann::json quads = nlohmann::json::array();
        for (const auto& q : rec.quadruplets) {
            nlohmann::json j = {{"Aspect", q.aspect ? *q.aspect : std::string("NULL")},
                                {"Category", q.category},
                                {"Opinion", q.opinion}};
            if (q.va) j["VA"] = corpus::format_va(*q.va, 2);
            quads.push_back(std::move(j));
        }
        const nlohmann::json j = {{"ID", rec.id}, {"Text", rec.text}, {"Quadruplets", quads}};
        out << j.dump() << '\n';
    }
    return out.str();
}

void write_dataset(const std::filesystem::path& dir, const std::vector<PairId>& pairs,
                   const Options& options, bool labelled_test) {
    const std::size_t small = std::max<std::size_t>(4, options.records / 4);
    for (const auto& pair : pairs) {
        struct SplitSpec {
            const char* name;
            std::size_t records;
            std::uint64_t salt;
            bool labelled;
        };
        const SplitSpec splits[] = {{"train", options.records, 1, options.labelled},
                                    {"dev", small, 2, options.labelled},
                                    {"test", small, 3, labelled_test}};
        for (const auto& s : splits) {
            Options o = options;
            o.records = s.records;
            o.seed = mix64(options.seed + s.salt);
            o.labelled = s.labelled;
            auto records = generate_records(pair, o);
            for (auto& rec : records) rec.id = std::string(s.name) + ":" + rec.id;
            io::write_file(dir / (pair.str() + "_" + s.name + ".jsonl"),
                           render_quadruplet_file(records));
        }
    }
}

std::vector<Instance> generate_instances(const PairId& pair, std::size_t count, std::uint64_t seed) {
    Options o;
    o.records = count;
    o.seed = seed;
    o.null_rate = 0.0;
    o.out_of_range_rate = 0.0;
    o.multi_aspect_rate = 0.0;
    o.repeat_rate = 0.0;
    return corpus::preprocess(generate_records(pair, o)).instances;
}

}  // namespace dimasr::synthetic
