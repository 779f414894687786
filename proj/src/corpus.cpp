#include "dimasr/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dimasr/io.hpp"
#include "dimasr/rng.hpp"

namespace dimasr::corpus {

using nlohmann::json;

namespace {

std::string record_context(std::size_t index, const PairId& pair) {
    return "record " + std::to_string(index) + " (" + pair.str() + ")";
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool parse_decimal(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

const json& require(const json& j, const std::string& field, std::size_t index, const PairId& pair) {
    const auto it = j.find(field);
    if (it == j.end()) {
        throw Error(record_context(index, pair) + ": missing field '" + field + "'");
    }
    return *it;
}

std::string require_string(const json& j, const std::string& field, std::size_t index,
                           const PairId& pair) {
    const auto& v = require(j, field, index, pair);
    if (!v.is_string()) {
        throw Error(record_context(index, pair) + ": field '" + field + "' must be a string");
    }
    return v.get<std::string>();
}

std::string optional_string(const json& j, const std::string& field, std::size_t index,
                            const PairId& pair) {
    const auto it = j.find(field);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) {
        throw Error(record_context(index, pair) + ": field '" + field + "' must be a string");
    }
    return it->get<std::string>();
}

VAScore parse_va_value(const json& v, const Schema& schema, std::size_t index, const PairId& pair) {
    if (v.is_string()) {
        try {
            return parse_va(v.get<std::string>());
        } catch (const Error& e) {
            throw Error(record_context(index, pair) + ": field '" + schema.va + "': " + e.what());
        }
    }
    if (v.is_object()) {
        const auto component = [&](const std::string& name) {
            const auto it = v.find(name);
            if (it == v.end() || !it->is_number()) {
                throw Error(record_context(index, pair) + ": field '" + schema.va + "." + name +
                            "' must be a number");
            }
            return it->get<double>();
        };
        return {component(schema.valence), component(schema.arousal)};
    }
    throw Error(record_context(index, pair) + ": field '" + schema.va +
                "' must be a \"V#A\" string or an object");
}

std::optional<std::string> parse_aspect(const json& q, const Schema& schema, std::size_t index,
                                        const PairId& pair) {
    const auto it = q.find(schema.aspect);
    if (it == q.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
        throw Error(record_context(index, pair) + ": field '" + schema.aspect +
                    "' must be a string");
    }
    auto aspect = it->get<std::string>();
    if (aspect == schema.null_marker) return std::nullopt;
    return aspect;
}

}  // namespace

Schema Schema::from_json(const json& j) {
    Schema s;
    const auto bind = [&](const char* key, std::string& field) {
        if (const auto it = j.find(key); it != j.end()) field = it->get<std::string>();
    };
    bind("id", s.id);
    bind("text", s.text);
    bind("quadruplets", s.quadruplets);
    bind("aspect", s.aspect);
    bind("category", s.category);
    bind("opinion", s.opinion);
    bind("va", s.va);
    bind("valence", s.valence);
    bind("arousal", s.arousal);
    bind("null_marker", s.null_marker);
    return s;
}

Schema Schema::load(const std::filesystem::path& path) {
    try {
        return from_json(json::parse(io::read_file(path)));
    } catch (const json::exception& e) {
        throw Error("schema " + path.string() + ": " + e.what());
    }
}

json Schema::to_json() const {
    return {{"id", id},           {"text", text},       {"quadruplets", quadruplets},
            {"aspect", aspect},   {"category", category}, {"opinion", opinion},
            {"va", va},           {"valence", valence}, {"arousal", arousal},
            {"null_marker", null_marker}};
}

VAScore parse_va(std::string_view raw) {
    const auto hash = raw.find('#');
    VAScore va;
    if (hash == std::string_view::npos || raw.find('#', hash + 1) != std::string_view::npos ||
        !parse_decimal(raw.substr(0, hash), va.valence) ||
        !parse_decimal(raw.substr(hash + 1), va.arousal)) {
        throw Error("unparseable VA string \"" + std::string(raw) + "\"");
    }
    return va;
}

std::string format_va(const VAScore& va, int precision) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.*f#%.*f", precision, va.valence, precision, va.arousal);
    return buf;
}

RawRecord parse_record(const json& j, std::size_t index, const PairId& pair, const Schema& schema) {
    if (!j.is_object()) throw Error(record_context(index, pair) + ": not an object");
    RawRecord rec;
    rec.pair = pair;
    rec.id = require_string(j, schema.id, index, pair);
    rec.text = require_string(j, schema.text, index, pair);

    if (const auto quads = j.find(schema.quadruplets); quads != j.end()) {
        if (!quads->is_array()) {
            throw Error(record_context(index, pair) + ": field '" + schema.quadruplets +
                        "' must be a list");
        }
        for (const auto& q : *quads) {
            if (!q.is_object()) {
                throw Error(record_context(index, pair) + ": field '" + schema.quadruplets +
                            "' holds a non-object entry");
            }
            Quadruplet quad;
            quad.aspect = parse_aspect(q, schema, index, pair);
            quad.category = optional_string(q, schema.category, index, pair);
            quad.opinion = optional_string(q, schema.opinion, index, pair);
            if (const auto va = q.find(schema.va); va != q.end() && !va->is_null()) {
                quad.va = parse_va_value(*va, schema, index, pair);
            }
            rec.quadruplets.push_back(std::move(quad));
        }
    } else if (const auto aspects = j.find(schema.aspect); aspects != j.end()) {
        // Unlabelled layout: a bare aspect list with no VA.
        const auto add = [&](const json& a) {
            if (!a.is_string() && !a.is_null()) {
                throw Error(record_context(index, pair) + ": field '" + schema.aspect +
                            "' must hold strings");
            }
            Quadruplet quad;
            if (a.is_string() && a.get<std::string>() != schema.null_marker) {
                quad.aspect = a.get<std::string>();
            }
            rec.quadruplets.push_back(std::move(quad));
        };
        if (aspects->is_array()) {
            for (const auto& a : *aspects) add(a);
        } else {
            add(*aspects);
        }
    } else {
        throw Error(record_context(index, pair) + ": missing field '" + schema.quadruplets + "'");
    }
    return rec;
}

std::vector<RawRecord> parse_quadruplet_text(std::string_view content, const PairId& pair,
                                             const Schema& schema) {
    std::vector<RawRecord> records;
    const auto body = trim(content);
    if (body.empty()) return records;

    if (body.front() == '[') {
        json doc;
        try {
            doc = json::parse(body);
        } catch (const json::exception& e) {
            throw Error("malformed JSON array (" + pair.str() + "): " + e.what());
        }
        records.reserve(doc.size());
        for (std::size_t i = 0; i < doc.size(); ++i) {
            records.push_back(parse_record(doc[i], i, pair, schema));
        }
    } else {
        std::size_t index = 0;
        std::size_t pos = 0;
        while (pos <= body.size()) {
            auto end = body.find('\n', pos);
            if (end == std::string_view::npos) end = body.size();
            const auto line = trim(body.substr(pos, end - pos));
            pos = end + 1;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw Error(record_context(index, pair) + ": malformed JSON line: " + e.what());
            }
            records.push_back(parse_record(j, index, pair, schema));
            ++index;
        }
    }

    std::set<std::string> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!seen.insert(records[i].id).second) {
            throw Error(record_context(i, pair) + ": duplicate ID '" + records[i].id + "'");
        }
    }
    return records;
}

std::vector<RawRecord> parse_quadruplet_file(const std::filesystem::path& path, const PairId& pair,
                                             const Schema& schema) {
    try {
        return parse_quadruplet_text(io::read_file(path), pair, schema);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

bool PreprocessReport::reconciles() const {
    return quadruplets == null_dropped + range_dropped + duplicate_dropped + emitted;
}

PreprocessReport& PreprocessReport::operator+=(const PreprocessReport& o) {
    records += o.records;
    quadruplets += o.quadruplets;
    null_dropped += o.null_dropped;
    range_dropped += o.range_dropped;
    duplicate_dropped += o.duplicate_dropped;
    emitted += o.emitted;
    expanded_records += o.expanded_records;
    return *this;
}

json PreprocessReport::to_json() const {
    return {{"records", records},
            {"quadruplets", quadruplets},
            {"null_aspect_dropped", null_dropped},
            {"out_of_range_dropped", range_dropped},
            {"repeated_aspect_dropped", duplicate_dropped},
            {"instances_emitted", emitted},
            {"expanded_records", expanded_records}};
}

PreprocessResult preprocess(const std::vector<RawRecord>& records) {
    PreprocessResult out;
    auto& report = out.report;
    for (const auto& rec : records) {
        ++report.records;
        std::set<std::string> emitted_aspects;
        std::size_t from_record = 0;
        for (const auto& quad : rec.quadruplets) {
            ++report.quadruplets;
            if (!quad.aspect || quad.aspect->empty()) {
                ++report.null_dropped;
                continue;
            }
            if (quad.va && !quad.va->in_range()) {
                ++report.range_dropped;
                continue;
            }
            if (!emitted_aspects.insert(*quad.aspect).second) {
                ++report.duplicate_dropped;
                continue;
            }
            out.instances.push_back(Instance{rec.id, rec.text, *quad.aspect, quad.va, rec.pair});
            ++report.emitted;
            ++from_record;
        }
        if (from_record >= 2) ++report.expanded_records;
    }
    return out;
}

std::vector<RawRecord> to_records(const std::vector<Instance>& instances) {
    std::vector<RawRecord> records;
    for (const auto& inst : instances) {
        if (records.empty() || records.back().id != inst.id || records.back().pair != inst.pair) {
            records.push_back(RawRecord{inst.id, inst.text, {}, inst.pair});
        }
        records.back().quadruplets.push_back(Quadruplet{inst.aspect, {}, {}, inst.gold});
    }
    return records;
}

TrainValidation split_train_validation(const std::vector<Instance>& instances, double fraction,
                                       std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw Error("validation fraction must lie in (0, 1)");
    }
    if (instances.empty()) throw Error("cannot split an empty instance list");

    // Group by record in first-appearance order.
    std::map<std::pair<PairId, std::string>, std::size_t> group_of;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto [it, fresh] =
            group_of.try_emplace({instances[i].pair, instances[i].id}, groups.size());
        if (fresh) groups.emplace_back();
        groups[it->second].push_back(i);
    }
    if (groups.size() < 2) {
        throw Error("cannot split record-disjointly: all instances come from one record");
    }

    std::vector<std::size_t> order(groups.size());
    for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    auto held = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(groups.size()) + 1e-9));
    held = std::clamp<std::size_t>(held, 1, groups.size() - 1);

    TrainValidation out;
    const std::size_t cut = groups.size() - held;
    for (std::size_t g = 0; g < order.size(); ++g) {
        auto& side = g < cut ? out.train : out.validation;
        for (const auto i : groups[order[g]]) side.push_back(instances[i]);
    }
    return out;
}

std::vector<Instance> pool_pairs(const InstancesByPair& per_pair) {
    std::vector<Instance> pooled;
    for (const auto& [pair, list] : per_pair) pooled.insert(pooled.end(), list.begin(), list.end());
    return pooled;
}

void write_instances(const std::filesystem::path& path, const std::vector<Instance>& instances) {
    std::ostringstream out;
    for (const auto& inst : instances) {
        json j = {{"ID", inst.id}, {"Text", inst.text}, {"Aspect", inst.aspect},
                  {"Pair", inst.pair.str()}};
        if (inst.gold) j["VA"] = {{"Valence", inst.gold->valence}, {"Arousal", inst.gold->arousal}};
        out << j.dump() << '\n';
    }
    io::write_file(path, out.str());
}

std::vector<Instance> read_instances(const std::filesystem::path& path) {
    const auto content = io::read_file(path);
    std::vector<Instance> out;
    std::istringstream in(content);
    std::string line;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            Instance inst;
            inst.id = j.at("ID").get<std::string>();
            inst.text = j.at("Text").get<std::string>();
            inst.aspect = j.at("Aspect").get<std::string>();
            inst.pair = PairId::parse(j.at("Pair").get<std::string>());
            if (const auto va = j.find("VA"); va != j.end()) {
                inst.gold = VAScore{va->at("Valence").get<double>(), va->at("Arousal").get<double>()};
            }
            out.push_back(std::move(inst));
        } catch (const json::exception& e) {
            throw Error(path.string() + ": instance " + std::to_string(index) + ": " + e.what());
        }
        ++index;
    }
    return out;
}

}  // namespace dimasr::corpus
