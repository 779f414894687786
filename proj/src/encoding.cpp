#include "dimasr/encoding.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <mutex>

#include "dimasr/rng.hpp"

namespace dimasr::encoding {

using nlohmann::json;

std::string to_string(Backend b) { return b == Backend::Toy ? "toy" : "pretrained"; }
std::string to_string(Template t) { return t == Template::Bert ? "bert" : "roberta"; }

Backend parse_backend(std::string_view s) {
    if (s == "toy") return Backend::Toy;
    if (s == "pretrained") return Backend::Pretrained;
    throw Error("unknown encoder backend '" + std::string(s) + "'");
}

Template parse_template(std::string_view s) {
    if (s == "bert") return Template::Bert;
    if (s == "roberta") return Template::Roberta;
    throw Error("unknown input template '" + std::string(s) + "'");
}

void EncoderSpec::validate() const {
    if (max_len < 8) throw Error("encoder max_len must be >= 8");
    if (hidden_size < 2) throw Error("encoder hidden_size must be >= 2");
    if (backend == Backend::Pretrained && pretrained_name.empty()) {
        throw Error("pretrained backend requires a plug-in name");
    }
}

json EncoderSpec::to_json() const {
    return {{"backend", to_string(backend)},
            {"template", to_string(template_kind)},
            {"max_len", max_len},
            {"hidden_size", hidden_size},
            {"seed", seed},
            {"trainable_layer", trainable_layer},
            {"pretrained_name", pretrained_name}};
}

EncoderSpec EncoderSpec::from_json(const json& j) {
    EncoderSpec s;
    if (const auto it = j.find("backend"); it != j.end()) s.backend = parse_backend(it->get<std::string>());
    if (const auto it = j.find("template"); it != j.end()) {
        s.template_kind = parse_template(it->get<std::string>());
    }
    s.max_len = j.value("max_len", s.max_len);
    s.hidden_size = j.value("hidden_size", s.hidden_size);
    s.seed = j.value("seed", s.seed);
    s.trainable_layer = j.value("trainable_layer", s.trainable_layer);
    s.pretrained_name = j.value("pretrained_name", s.pretrained_name);
    s.validate();
    return s;
}

namespace {

// Decodes one UTF-8 code point starting at `i`; malformed bytes decode as
// themselves with length 1.
char32_t next_code_point(std::string_view s, std::size_t i, std::size_t& len) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    const auto cont = [&](std::size_t k) {
        return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    const auto byte = [&](std::size_t k) {
        return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F);
    };
    if (b0 < 0x80) {
        len = 1;
        return b0;
    }
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        len = 2;
        return (static_cast<char32_t>(b0 & 0x1F) << 6) | byte(1);
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        len = 3;
        return (static_cast<char32_t>(b0 & 0x0F) << 12) | (byte(1) << 6) | byte(2);
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        len = 4;
        return (static_cast<char32_t>(b0 & 0x07) << 18) | (byte(1) << 12) | (byte(2) << 6) |
               byte(3);
    }
    len = 1;
    return b0;
}

bool is_space(char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' ||
           c == 0x00A0 || c == 0x3000 || (c >= 0x2000 && c <= 0x200B);
}

// Characters that form a piece on their own.
bool is_standalone(char32_t c) {
    if (c < 0x80) return std::ispunct(static_cast<int>(c)) != 0;
    return (c >= 0x2010 && c <= 0x206F) ||  // general punctuation
           (c >= 0x3001 && c <= 0x30FF) ||  // CJK punctuation, hiragana, katakana
           (c >= 0x3400 && c <= 0x4DBF) || (c >= 0x4E00 && c <= 0x9FFF) ||
           (c >= 0xF900 && c <= 0xFAFF) || (c >= 0xFF00 && c <= 0xFFEF);
}

}  // namespace

std::vector<std::string> split_pieces(std::string_view text) {
    std::vector<std::string> pieces;
    std::string current;
    const auto flush = [&] {
        if (!current.empty()) pieces.push_back(std::move(current));
        current.clear();
    };
    for (std::size_t i = 0; i < text.size();) {
        std::size_t len = 1;
        const char32_t c = next_code_point(text, i, len);
        const auto raw = text.substr(i, len);
        i += len;
        if (is_space(c)) {
            flush();
        } else if (is_standalone(c)) {
            flush();
            pieces.emplace_back(raw);
        } else if (c < 0x80) {
            current.push_back(static_cast<char>(std::tolower(static_cast<int>(c))));
        } else {
            current.append(raw);
        }
    }
    flush();
    return pieces;
}

std::int32_t piece_id(std::string_view piece, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : piece) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    h = mix64(h ^ mix64(seed));
    constexpr std::uint64_t span = 0x7fffffffULL - kFirstWordId;
    return static_cast<std::int32_t>(kFirstWordId + h % span);
}

std::vector<std::int32_t> tokenize(std::string_view text, std::uint64_t seed) {
    std::vector<std::int32_t> ids;
    for (const auto& piece : split_pieces(text)) ids.push_back(piece_id(piece, seed));
    return ids;
}

SentencePairInput format_pair(std::string_view aspect, std::string_view text, Template kind,
                              int max_len, std::uint64_t seed) {
    if (max_len < 8) throw Error("max_len must be >= 8");
    const auto aspect_ids = tokenize(aspect, seed);
    if (aspect_ids.empty()) throw Error("aspect is empty");
    const auto budget = static_cast<std::size_t>(max_len - 4);
    if (aspect_ids.size() > budget) {
        throw Error("aspect '" + std::string(aspect) + "' has " +
                    std::to_string(aspect_ids.size()) + " tokens, more than max_len - 4 = " +
                    std::to_string(budget));
    }
    const auto text_ids = tokenize(text, seed);
    const std::size_t specials = kind == Template::Bert ? 3 : 4;
    const std::size_t room = static_cast<std::size_t>(max_len) - specials - aspect_ids.size();
    const std::size_t kept = std::min(room, text_ids.size());

    SentencePairInput out;
    auto& t = out.tokens;
    t.reserve(static_cast<std::size_t>(max_len));
    t.push_back(kind == Template::Bert ? kCls : kBos);
    t.insert(t.end(), aspect_ids.begin(), aspect_ids.end());
    if (kind == Template::Bert) {
        t.push_back(kSep);
    } else {
        t.push_back(kEos);
        t.push_back(kEos);
    }
    t.insert(t.end(), text_ids.begin(), text_ids.begin() + static_cast<std::ptrdiff_t>(kept));
    t.push_back(kind == Template::Bert ? kSep : kEos);
    t.resize(static_cast<std::size_t>(max_len), kPad);
    out.first_special_index = 0;
    return out;
}

DecodedPair decode_pair(const SentencePairInput& input, Template kind) {
    const auto& t = input.tokens;
    const std::int32_t open = kind == Template::Bert ? kCls : kBos;
    const std::int32_t sep = kind == Template::Bert ? kSep : kEos;
    if (t.empty() || t[0] != open) throw Error("sequence does not start with the template's first token");

    std::size_t i = 1;
    DecodedPair out;
    while (i < t.size() && t[i] != sep) out.aspect.push_back(t[i++]);
    if (i == t.size()) throw Error("missing separator after aspect");
    ++i;
    if (kind == Template::Roberta) {
        if (i == t.size() || t[i] != sep) throw Error("missing doubled separator");
        ++i;
    }
    while (i < t.size() && t[i] != sep) out.text.push_back(t[i++]);
    if (i == t.size()) throw Error("missing closing separator");
    for (++i; i < t.size(); ++i) {
        if (t[i] != kPad) throw Error("non-padding token after closing separator");
    }
    return out;
}

double positional_weight(int position) { return 1.0 / std::sqrt(1.0 + position); }

Embedding token_vector(std::int32_t id, int d, std::uint64_t seed) {
    Embedding v(static_cast<std::size_t>(d));
    const std::uint64_t base = mix64(seed ^ mix64(static_cast<std::uint64_t>(id)));
    for (int j = 0; j < d; ++j) {
        const std::uint64_t x = mix64(base + static_cast<std::uint64_t>(j) * 0x632be59bd9b4e019ULL);
        v[static_cast<std::size_t>(j)] = static_cast<double>(x >> 11) * 0x1.0p-52 - 1.0;
    }
    return v;
}

Embedding toy_encode_rule(const SentencePairInput& input, int d, std::uint64_t seed) {
    Embedding e(static_cast<std::size_t>(d), 0.0);
    std::size_t count = 0;
    for (std::size_t p = 0; p < input.tokens.size(); ++p) {
        if (input.tokens[p] == kPad) continue;
        ++count;
        const double w = positional_weight(static_cast<int>(p));
        const auto v = token_vector(input.tokens[p], d, seed);
        for (std::size_t j = 0; j < e.size(); ++j) e[j] += w * v[j];
    }
    if (count > 0) {
        for (auto& x : e) x /= static_cast<double>(count);
    }
    return e;
}

EncoderParams EncoderParams::identity(int d) {
    EncoderParams p;
    p.dim = d;
    p.proj.assign(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) p.proj[static_cast<std::size_t>(i * d + i)] = 1.0;
    p.bias.assign(static_cast<std::size_t>(d), 0.0);
    return p;
}

Embedding EncoderParams::apply(std::span<const double> features) const {
    if (empty()) return {features.begin(), features.end()};
    if (features.size() != static_cast<std::size_t>(dim)) {
        throw Error("encoder layer expects " + std::to_string(dim) + " features, got " +
                    std::to_string(features.size()));
    }
    const auto d = static_cast<std::size_t>(dim);
    Embedding out(bias);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += proj[i * d + j] * features[j];
        out[i] += acc;
    }
    return out;
}

std::vector<Embedding> encode(std::span<const SentencePairInput> inputs, const EncoderSpec& spec,
                              const EncoderParams& params) {
    spec.validate();
    if (spec.backend != Backend::Toy) {
        throw Error("token-level encode is only available for the toy backend");
    }
    if (spec.trainable_layer ? params.dim != spec.hidden_size : !params.empty()) {
        throw Error("encoder parameters do not match hidden_size " +
                    std::to_string(spec.hidden_size));
    }
    std::vector<Embedding> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) {
        if (in.tokens.size() != static_cast<std::size_t>(spec.max_len)) {
            throw Error("input length " + std::to_string(in.tokens.size()) + " != max_len " +
                        std::to_string(spec.max_len));
        }
        out.push_back(params.apply(toy_encode_rule(in, spec.hidden_size, spec.seed)));
    }
    return out;
}

namespace {

struct Registry {
    std::mutex mutex;
    std::map<std::string, PretrainedBackend> backends;
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

void register_pretrained_backend(const std::string& name, PretrainedBackend backend) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.backends[name] = std::move(backend);
}

void unregister_pretrained_backend(const std::string& name) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.backends.erase(name);
}

bool has_pretrained_backend(const std::string& name) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    return r.backends.contains(name);
}

std::vector<Embedding> featurize(std::span<const Instance> instances, const EncoderSpec& spec) {
    spec.validate();
    std::vector<Embedding> out;
    out.reserve(instances.size());
    if (spec.backend == Backend::Toy) {
        for (const auto& inst : instances) {
            const auto input =
                format_pair(inst.aspect, inst.text, spec.template_kind, spec.max_len, spec.seed);
            out.push_back(toy_encode_rule(input, spec.hidden_size, spec.seed));
        }
        return out;
    }

    PretrainedBackend backend;
    {
        auto& r = registry();
        std::lock_guard lock(r.mutex);
        const auto it = r.backends.find(spec.pretrained_name);
        if (it == r.backends.end()) {
            throw Error("no pretrained backend registered under '" + spec.pretrained_name + "'");
        }
        backend = it->second;
    }
    std::vector<PairText> pairs;
    pairs.reserve(instances.size());
    for (const auto& inst : instances) pairs.push_back({inst.aspect, inst.text});
    out = backend(pairs, spec);
    if (out.size() != instances.size()) {
        throw Error("pretrained backend returned " + std::to_string(out.size()) +
                    " embeddings for " + std::to_string(instances.size()) + " inputs");
    }
    for (const auto& e : out) {
        if (e.size() != static_cast<std::size_t>(spec.hidden_size)) {
            throw Error("pretrained backend returned dimension " + std::to_string(e.size()) +
                        ", expected hidden_size " + std::to_string(spec.hidden_size));
        }
    }
    return out;
}

}  // namespace dimasr::encoding
