#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dimasr/types.hpp"

namespace dimasr::encoding {

enum class Backend { Toy, Pretrained };

// bert:    [CLS] aspect [SEP] text [SEP]
// roberta: <s> aspect </s></s> text </s>
enum class Template { Bert, Roberta };

std::string to_string(Backend b);
std::string to_string(Template t);
Backend parse_backend(std::string_view s);
Template parse_template(std::string_view s);

struct EncoderSpec {
    Backend backend = Backend::Toy;
    Template template_kind = Template::Roberta;
    int max_len = 128;
    int hidden_size = 32;
    std::uint64_t seed = 42;
    // Toy backend only: a d x d linear layer (identity-initialised) trained
    // on top of the fixed features.
    bool trainable_layer = true;
    // Registry key of the plug-in when backend == Pretrained.
    std::string pretrained_name;

    void validate() const;
    nlohmann::json to_json() const;
    static EncoderSpec from_json(const nlohmann::json& j);
    bool operator==(const EncoderSpec&) const = default;
};

// Reserved ids. Every word piece hashes to an id >= kFirstWordId.
inline constexpr std::int32_t kPad = 0;
inline constexpr std::int32_t kCls = 1;
inline constexpr std::int32_t kSep = 2;
inline constexpr std::int32_t kBos = 3;
inline constexpr std::int32_t kEos = 4;
inline constexpr std::int32_t kFirstWordId = 5;

// Lowercased ASCII words; ASCII punctuation, CJK/kana characters and
// full-width punctuation each become a piece of their own.
std::vector<std::string> split_pieces(std::string_view text);
std::int32_t piece_id(std::string_view piece, std::uint64_t seed);
std::vector<std::int32_t> tokenize(std::string_view text, std::uint64_t seed);

struct SentencePairInput {
    std::vector<std::int32_t> tokens;  // exactly max_len long
    int first_special_index = 0;
};

// Text is truncated from its tail; the aspect never is. Throws when the
// aspect tokenises to nothing or to more than max_len - 4 pieces.
SentencePairInput format_pair(std::string_view aspect, std::string_view text, Template kind,
                              int max_len, std::uint64_t seed);

struct DecodedPair {
    std::vector<std::int32_t> aspect;
    std::vector<std::int32_t> text;
};
// Inverse of format_pair at the id level; throws if the separators are not
// where the template puts them.
DecodedPair decode_pair(const SentencePairInput& input, Template kind);

using Embedding = std::vector<double>;

double positional_weight(int position);
// Seeded hash of (id, component) into [-1, 1).
Embedding token_vector(std::int32_t id, int d, std::uint64_t seed);

// Mean over non-padding positions p of positional_weight(p) * token_vector(tok_p).
// An all-padding sequence maps to the zero vector.
Embedding toy_encode_rule(const SentencePairInput& input, int d, std::uint64_t seed);

// Trainable layer of the toy backend: e = P f + c.
struct EncoderParams {
    int dim = 0;
    std::vector<double> proj;  // dim x dim, row-major
    std::vector<double> bias;  // dim

    static EncoderParams identity(int d);
    bool empty() const { return dim == 0; }
    Embedding apply(std::span<const double> features) const;
    bool operator==(const EncoderParams&) const = default;
};

// Batch encode of pre-formatted inputs through the toy backend (and its
// layer when the encoder has one). Output order matches input order.
std::vector<Embedding> encode(std::span<const SentencePairInput> inputs, const EncoderSpec& spec,
                              const EncoderParams& params);

struct PairText {
    std::string aspect;
    std::string text;
};

// Plug-in for a pretrained multilingual encoder: returns one hidden_size
// vector (the first special token's hidden state) per pair.
using PretrainedBackend =
    std::function<std::vector<Embedding>(std::span<const PairText>, const EncoderSpec&)>;

void register_pretrained_backend(const std::string& name, PretrainedBackend backend);
void unregister_pretrained_backend(const std::string& name);
bool has_pretrained_backend(const std::string& name);

// Fixed (pre-layer) features for a list of instances under `spec`.
std::vector<Embedding> featurize(std::span<const Instance> instances, const EncoderSpec& spec);

}  // namespace dimasr::encoding
