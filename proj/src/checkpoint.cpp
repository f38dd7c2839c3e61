#include "kgi/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "kgi/errors.hpp"

namespace kgi {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic{'K', 'G', 'I', 'C', 'K', 'P', 'T', '\n'};

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> b;
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b.data(), 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    std::array<char, 4> b;
    for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b.data(), 4);
}

std::uint64_t get_u64(std::istream& in) {
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char*>(b.data()), 8);
    if (!in) throw ParseError("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
}

std::uint32_t get_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (!in) throw ParseError("checkpoint truncated");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
}

template <typename Tensor>
void put_tensor(std::ostream& out, const Tensor& t) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) put_u64(out, std::bit_cast<std::uint64_t>(t(r, c)));
    }
}

template <typename Tensor>
void get_tensor(std::istream& in, Tensor& t) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = std::bit_cast<double>(get_u64(in));
    }
}

json loss_value(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double loss_value(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

}  // namespace

void save_checkpoint(const TrainingState& s, const std::filesystem::path& path) {
    json h;
    h["format"] = "kgi-checkpoint";
    h["encoder"] = {{"in_dim", s.encoder.in_dim},   {"hidden_dim", s.encoder.hidden_dim},
                    {"out_dim", s.encoder.out_dim}, {"seed", s.encoder.seed},
                    {"dropout", s.encoder.dropout}, {"weight_decay", s.encoder.weight_decay}};
    const TrainConfig& t = s.train;
    h["train"] = {{"margin", t.margin},
                  {"learning_rate", t.learning_rate},
                  {"epochs", t.epochs},
                  {"train_fraction", t.train_fraction},
                  {"seed", t.seed},
                  {"adam_beta1", t.adam_beta1},
                  {"adam_beta2", t.adam_beta2},
                  {"adam_eps", t.adam_eps},
                  {"checkpoint_every", t.checkpoint_every}};
    h["epochs_completed"] = s.epochs_completed;
    h["adam_step"] = s.optimizer.step;
    json history = json::array();
    for (const auto& e : s.history) history.push_back(json::array({e.epoch, loss_value(e.train_loss), loss_value(e.test_loss)}));
    h["history"] = std::move(history);
    json shapes = json::array();
    s.weights.for_each([&](std::string_view name, const auto& tensor) {
        shapes.push_back({{"name", name}, {"rows", tensor.rows()}, {"cols", tensor.cols()}});
    });
    h["tensors"] = std::move(shapes);
    const std::string header = h.dump();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write checkpoint " + tmp.string());
        out.write(kMagic.data(), kMagic.size());
        put_u32(out, kCheckpointVersion);
        put_u64(out, header.size());
        out.write(header.data(), static_cast<std::streamsize>(header.size()));
        const auto write_all = [&](const EncoderParameters& p) {
            p.for_each([&](std::string_view, const auto& tensor) { put_tensor(out, tensor); });
        };
        write_all(s.weights);
        write_all(s.optimizer.m);
        write_all(s.optimizer.v);
        if (!out) throw Error("write failed for checkpoint " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

TrainingState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read checkpoint " + path.string());
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw ParseError(path.string() + " is not a checkpoint");
    const auto version = get_u32(in);
    if (version != kCheckpointVersion) {
        throw ParseError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
    }
    const auto header_len = get_u64(in);
    if (header_len > (1u << 26)) throw ParseError(path.string() + ": implausible header length");
    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw ParseError(path.string() + ": checkpoint truncated");

    TrainingState s;
    try {
        const json h = json::parse(header);
        const json& e = h.at("encoder");
        s.encoder.in_dim = e.at("in_dim").get<std::size_t>();
        s.encoder.hidden_dim = e.at("hidden_dim").get<std::size_t>();
        s.encoder.out_dim = e.at("out_dim").get<std::size_t>();
        s.encoder.seed = e.at("seed").get<std::uint64_t>();
        s.encoder.dropout = e.at("dropout").get<double>();
        s.encoder.weight_decay = e.at("weight_decay").get<double>();
        const json& t = h.at("train");
        s.train.margin = t.at("margin").get<double>();
        s.train.learning_rate = t.at("learning_rate").get<double>();
        s.train.epochs = t.at("epochs").get<std::size_t>();
        s.train.train_fraction = t.at("train_fraction").get<double>();
        s.train.seed = t.at("seed").get<std::uint64_t>();
        s.train.adam_beta1 = t.at("adam_beta1").get<double>();
        s.train.adam_beta2 = t.at("adam_beta2").get<double>();
        s.train.adam_eps = t.at("adam_eps").get<double>();
        s.train.checkpoint_every = t.at("checkpoint_every").get<std::size_t>();
        s.epochs_completed = h.at("epochs_completed").get<std::size_t>();
        s.optimizer.step = h.at("adam_step").get<std::uint64_t>();
        for (const auto& row : h.at("history")) {
            s.history.push_back({row.at(0).get<std::size_t>(), loss_value(row.at(1)), loss_value(row.at(2))});
        }
    } catch (const json::exception& ex) {
        throw ParseError(path.string() + ": bad checkpoint header: " + ex.what());
    }
    s.encoder.validate();
    s.weights = EncoderWeights{};
    static_cast<EncoderParameters&>(s.weights) = EncoderParameters::zeros(s.encoder);
    s.optimizer.m = EncoderParameters::zeros(s.encoder);
    s.optimizer.v = EncoderParameters::zeros(s.encoder);
    const auto read_all = [&](EncoderParameters& p) {
        p.for_each([&](std::string_view, auto& tensor) { get_tensor(in, tensor); });
    };
    read_all(s.weights);
    read_all(s.optimizer.m);
    read_all(s.optimizer.v);
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError(path.string() + ": trailing bytes after tensors");
    return s;
}

}  // namespace kgi
