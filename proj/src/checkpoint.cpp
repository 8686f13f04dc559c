// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "sandhi/checkpoint.hpp"

#include "sandhi/error.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sandhi {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "weights.bin is written in host byte order");

namespace {

constexpr const char* kManifest = "manifest.txt";
constexpr const char* kWeights = "weights.bin";

std::string shape_text(const nn::Shape& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += (i ? "x" : "") + std::to_string(s[i]);
    }
    return out;
}

std::string fmt_float(double v, int digits) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// Write next to the target, then rename over it.
void write_file(const fs::path& path, const std::string& bytes) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw Error(ErrorCode::Io, "short write to " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw Error(ErrorCode::Io, "cannot replace " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Manifest {
public:
    explicit Manifest(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    const std::string& str(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) {
            throw Error(ErrorCode::Checkpoint, "manifest lacks '" + key + "'");
        }
        return it->second;
    }
    std::uint64_t u64(const std::string& key) const {
        const std::string& v = str(key);
        std::uint64_t out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            throw Error(ErrorCode::Checkpoint, "manifest key '" + key + "' is not an unsigned integer: " + v);
        }
        return out;
    }
    double f64(const std::string& key) const {
        const std::string& v = str(key);
        char* end = nullptr;
        const double out = std::strtod(v.c_str(), &end);
        if (v.empty() || end != v.c_str() + v.size()) {
            throw Error(ErrorCode::Checkpoint, "manifest key '" + key + "' is not a number: " + v);
        }
        return out;
    }

private:
    std::map<std::string, std::string> kv_;
};

std::map<std::string, std::string> parse_manifest(const std::string& text, const fs::path& where) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error(ErrorCode::Checkpoint, where.string() + ":" + std::to_string(lineno) + ": expected key=value");
        }
        if (!kv.emplace(line.substr(0, eq), line.substr(eq + 1)).second) {
            throw Error(ErrorCode::Checkpoint,
                        where.string() + ":" + std::to_string(lineno) + ": duplicate key " + line.substr(0, eq));
        }
    }
    return kv;
}

} // namespace

std::string_view code_version() noexcept {
#ifdef SANDHI_CODE_VERSION
    return SANDHI_CODE_VERSION;
#else
    return "unknown";
#endif
}

void save_checkpoint(const fs::path& dir, const DdRnnModel& model, const Vocabulary& vocab, const TrainConfig& train,
                     const PhaseState& state) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    }
    const ModelConfig& mc = model.config();
    std::ostringstream m;
    m << "format_version=" << kCheckpointFormat << '\n';
    m << "code_version=" << code_version() << '\n';
    m << "seed=" << train.seed << '\n';
    m << "phase=" << static_cast<int>(state.phase) << '\n';
    m << "epoch=" << state.epochs_done << '\n';
    m << "lr=" << fmt_float(state.lr, 9) << '\n';
    m << "best_val_ppl=" << fmt_float(state.best_val_ppl, 17) << '\n';
    m << "model.variant=" << variant_name(mc.variant) << '\n';
    m << "model.embed_dim=" << mc.embed_dim << '\n';
    m << "model.hidden=" << mc.hidden << '\n';
    m << "model.layers=" << mc.layers << '\n';
    m << "model.dropout=" << fmt_float(mc.dropout, 9) << '\n';
    m << "model.vocab_size=" << mc.vocab_size << '\n';
    m << "model.max_decode_len=" << mc.max_decode_len << '\n';
    m << "train.lr0=" << fmt_float(train.lr0, 9) << '\n';
    m << "train.decay=" << fmt_float(train.decay, 9) << '\n';
    m << "train.batch_size=" << train.batch_size << '\n';
    m << "train.epochs=" << train.epochs << '\n';
    m << "train.val_fraction=" << fmt_float(train.val_fraction, 17) << '\n';
    m << "train.clip_norm=" << fmt_float(train.clip_norm, 17) << '\n';
    m << "vocab=" << vocab.chars() << '\n';
    const auto& params = model.params().all();
    m << "params=" << params.size() << '\n';
    std::string blob;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& p = params[i];
        m << "param." << i << '=' << p.name << ' ' << shape_text(p.value.shape()) << '\n';
        const auto data = p.value.data();
        blob.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(float));
    }
    write_file(dir / kWeights, blob);
    write_file(dir / kManifest, m.str());
}

std::map<std::string, std::string> read_manifest(const fs::path& dir) {
    const fs::path path = dir / kManifest;
    if (!fs::exists(path)) {
        throw Error(ErrorCode::Io, "no checkpoint at " + dir.string() + " (missing " + kManifest + ")");
    }
    return parse_manifest(read_file(path), path);
}

LoadedCheckpoint load_checkpoint(const fs::path& dir) {
    const Manifest m(read_manifest(dir));
    const std::uint64_t format = m.u64("format_version");
    if (format != static_cast<std::uint64_t>(kCheckpointFormat)) {
        throw Error(ErrorCode::VersionMismatch, "checkpoint format " + std::to_string(format) + " at " + dir.string() +
                                                    "; this build reads format " + std::to_string(kCheckpointFormat));
    }

    CheckpointMeta meta;
    meta.code_version = m.str("code_version");
    meta.model.variant = parse_variant(m.str("model.variant"));
    meta.model.embed_dim = m.u64("model.embed_dim");
    meta.model.hidden = m.u64("model.hidden");
    meta.model.layers = m.u64("model.layers");
    meta.model.dropout = static_cast<float>(m.f64("model.dropout"));
    meta.model.vocab_size = m.u64("model.vocab_size");
    meta.model.max_decode_len = m.u64("model.max_decode_len");
    meta.train.seed = m.u64("seed");
    meta.train.lr0 = static_cast<float>(m.f64("train.lr0"));
    meta.train.decay = static_cast<float>(m.f64("train.decay"));
    meta.train.batch_size = m.u64("train.batch_size");
    meta.train.epochs = m.u64("train.epochs");
    meta.train.val_fraction = m.f64("train.val_fraction");
    meta.train.clip_norm = m.f64("train.clip_norm");
    meta.vocab = Vocabulary::from_chars(m.str("vocab"));
    if (meta.vocab.size() != meta.model.vocab_size) {
        throw Error(ErrorCode::ShapeMismatch, "manifest vocabulary has " + std::to_string(meta.vocab.size()) +
                                                  " symbols but model.vocab_size is " +
                                                  std::to_string(meta.model.vocab_size));
    }
    const std::uint64_t phase = m.u64("phase");
    if (phase != 1 && phase != 2) {
        throw Error(ErrorCode::Checkpoint, "manifest phase must be 1 or 2");
    }
    meta.state = PhaseState::start(static_cast<Phase>(phase), meta.train);
    meta.state.epochs_done = m.u64("epoch");
    meta.state.lr = static_cast<float>(m.f64("lr"));
    meta.state.best_val_ppl = m.f64("best_val_ppl");

    DdRnnModel model(meta.model, 0);
    auto& params = model.params().all();
    if (m.u64("params") != params.size()) {
        throw Error(ErrorCode::ShapeMismatch, "checkpoint lists " + m.str("params") + " parameters; the " +
                                                  std::string(variant_name(meta.model.variant)) + " model has " +
                                                  std::to_string(params.size()));
    }
    std::size_t total = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::string want = params[i].name + ' ' + shape_text(params[i].value.shape());
        const std::string& got = m.str("param." + std::to_string(i));
        if (got != want) {
            throw Error(ErrorCode::ShapeMismatch, "parameter " + std::to_string(i) + " is '" + got + "', expected '" +
                                                      want + "'");
        }
        total += params[i].value.numel();
    }
    const std::string blob = read_file(dir / kWeights);
    if (blob.size() != total * sizeof(float)) {
        throw Error(ErrorCode::Checkpoint, (dir / kWeights).string() + " holds " + std::to_string(blob.size()) +
                                               " bytes, expected " + std::to_string(total * sizeof(float)));
    }
    std::size_t offset = 0;
    for (auto& p : params) {
        auto data = p.value.data();
        std::memcpy(data.data(), blob.data() + offset, data.size() * sizeof(float));
        offset += data.size() * sizeof(float);
    }
    return LoadedCheckpoint{std::move(meta), std::move(model)};
}

} // namespace sandhi
