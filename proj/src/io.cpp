#include "dimasr/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include "json.hpp"

#include "dimasr/corpus.hpp"

namespace dimasr::io {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + path.string());
}

std::string sha256_hex(std::string_view bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
        throw Error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void write_predictions(const std::filesystem::path& path, const std::vector<KeyedScore>& preds) {
    std::ostringstream out;
    for (const auto& p : preds) {
        const json j = {{"ID", p.key.id},
                        {"Aspect", p.key.aspect},
                        {"Valence", p.va.valence},
                        {"Arousal", p.va.arousal}};
        out << j.dump() << '\n';
    }
    write_file(path, out.str());
}

std::vector<KeyedScore> read_predictions(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<KeyedScore> out;
    std::string line;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = json::parse(line);
            KeyedScore p;
            p.key.id = j.at("ID").get<std::string>();
            p.key.aspect = j.at("Aspect").get<std::string>();
            if (const auto va = j.find("VA"); va != j.end() && va->is_string()) {
                p.va = corpus::parse_va(va->get<std::string>());
            } else {
                p.va = {j.at("Valence").get<double>(), j.at("Arousal").get<double>()};
            }
            out.push_back(std::move(p));
        } catch (const json::exception& e) {
            throw Error(path.string() + ": prediction " + std::to_string(index) + ": " + e.what());
        }
        ++index;
    }
    return out;
}

void clamp_predictions(PredictionSet& preds, std::vector<ClampEvent>* log) {
    for (auto& [pair, list] : preds) {
        for (auto& p : list) {
            const VAScore before = p.va;
            p.va.valence = std::clamp(p.va.valence, kVaMin, kVaMax);
            p.va.arousal = std::clamp(p.va.arousal, kVaMin, kVaMax);
            if (log && !(p.va == before)) log->push_back({pair, p.key, before, p.va});
        }
    }
}

std::string render_submission(const std::vector<KeyedScore>& preds, int precision) {
    std::ostringstream out;
    for (const auto& p : preds) {
        const json j = {{"ID", p.key.id},
                        {"Aspect", p.key.aspect},
                        {"VA", corpus::format_va(p.va, precision)}};
        out << j.dump() << '\n';
    }
    return out.str();
}

}  // namespace dimasr::io
