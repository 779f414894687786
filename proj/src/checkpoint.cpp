#include "dimasr/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "dimasr/io.hpp"

namespace dimasr {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "DIMASR-CKPT 1\n";

void put_f64le(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>(bits & 0xff));
        bits >>= 8;
    }
}

double get_f64le(const char* p) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(p[i]);
    return std::bit_cast<double>(bits);
}

}  // namespace

std::string Checkpoint::serialize() const {
    const auto payload = model.flatten();
    json header = {
        {"format", "dimasr-checkpoint"},
        {"id", id},
        {"encoder", encoder.to_json()},
        {"train_config", config.to_json()},
        {"bounded", model.head.bounded},
        {"seed", config.seed},
        {"dropout_rate", model.head.dropout_rate},
        {"hidden_size", model.head.dim},
        {"encoder_layer", !model.encoder.empty()},
        {"best_val_rmse", std::isfinite(best_val_rmse) ? json(best_val_rmse) : json(nullptr)},
        {"epoch_of_best", epoch_of_best},
        {"payload", {{"dtype", "f64le"}, {"count", payload.size()}}},
    };
    std::string out(kMagic);
    out += header.dump();
    out.push_back('\n');
    out.reserve(out.size() + 8 * payload.size());
    for (const double v : payload) put_f64le(out, v);
    return out;
}

Checkpoint Checkpoint::deserialize(std::string_view bytes) {
    if (bytes.substr(0, kMagic.size()) != kMagic) throw Error("not a dimasr checkpoint");
    bytes.remove_prefix(kMagic.size());
    const auto eol = bytes.find('\n');
    if (eol == std::string_view::npos) throw Error("checkpoint header is not terminated");

    Checkpoint ck;
    std::size_t count = 0;
    try {
        const auto header = json::parse(bytes.substr(0, eol));
        ck.id = header.at("id").get<std::string>();
        ck.encoder = encoding::EncoderSpec::from_json(header.at("encoder"));
        ck.config = TrainConfig::from_json(header.at("train_config"));
        const auto& best = header.at("best_val_rmse");
        ck.best_val_rmse = best.is_null() ? std::nan("") : best.get<double>();
        ck.epoch_of_best = header.at("epoch_of_best").get<int>();
        count = header.at("payload").at("count").get<std::size_t>();

        const int d = header.at("hidden_size").get<int>();
        ck.model.head.dim = d;
        ck.model.head.weight.assign(2 * static_cast<std::size_t>(d), 0.0);
        ck.model.head.bounded = header.at("bounded").get<bool>();
        ck.model.head.dropout_rate = header.at("dropout_rate").get<double>();
        if (header.at("encoder_layer").get<bool>()) {
            ck.model.encoder = encoding::EncoderParams::identity(d);
        }
    } catch (const json::exception& e) {
        throw Error(std::string("checkpoint header: ") + e.what());
    }

    bytes.remove_prefix(eol + 1);
    if (bytes.size() != 8 * count) {
        throw Error("checkpoint payload has " + std::to_string(bytes.size()) + " bytes, header says " +
                    std::to_string(count) + " doubles");
    }
    std::vector<double> payload(count);
    for (std::size_t i = 0; i < count; ++i) payload[i] = get_f64le(bytes.data() + 8 * i);
    ck.model.unflatten(payload);
    return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const { io::write_file(path, serialize()); }

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
    try {
        return deserialize(io::read_file(path));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace dimasr
