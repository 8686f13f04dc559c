// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include "sandhi/checkpoint.hpp"
#include "sandhi/error.hpp"
#include "sandhi/toy_language.hpp"
#include "sandhi/training.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace sandhi;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Io;
}

struct ToyData {
    std::vector<SandhiExample> examples;
    Vocabulary vocab;
    std::vector<EncodedExample> encoded;
};

const ToyData& toy_data() {
    static const ToyData data = [] {
        toy::ToyConfig tc;
        tc.compounds = 120;
        tc.lexicon_size = 10;
        tc.seed = 5;
        ToyData d;
        d.examples = label_records(toy::generate(tc)).examples;
        d.vocab = vocabulary_for(d.examples);
        d.encoded = encode_all(d.examples, d.vocab);
        return d;
    }();
    return data;
}

ModelConfig tiny(Variant v = Variant::DdRnn) {
    ModelConfig mc;
    mc.embed_dim = 6;
    mc.hidden = 8;
    mc.layers = 2;
    mc.dropout = 0.3f;
    mc.vocab_size = toy_data().vocab.size();
    mc.variant = v;
    return mc;
}

TrainConfig quick(std::size_t epochs = 2) {
    TrainConfig t;
    t.batch_size = 16;
    t.epochs = epochs;
    t.seed = 11;
    return t;
}

std::span<const EncodedExample> train_part() { return std::span(toy_data().encoded).first(100); }
std::span<const EncodedExample> val_part() { return std::span(toy_data().encoded).subspan(100); }

std::vector<std::vector<float>> snapshot(const DdRnnModel& m, std::string_view group) {
    std::vector<std::vector<float>> out;
    for (const auto& p : m.params().all()) {
        if (group.empty() || p.group == group) {
            out.emplace_back(p.value.data().begin(), p.value.data().end());
        }
    }
    return out;
}

bool is_power_of_half(float lr, float lr0) {
    for (int k = 0; k < 64; ++k) {
        if (lr == lr0 * std::pow(0.5f, static_cast<float>(k))) {
            return true;
        }
    }
    return false;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("sandhi_test_" + name)) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void rewrite_manifest_line(const fs::path& dir, const std::string& key, const std::string& value) {
    std::istringstream in(slurp(dir / "manifest.txt"));
    std::string line, out;
    while (std::getline(in, line)) {
        if (line.rfind(key + "=", 0) == 0) {
            line = key + "=" + value;
        }
        out += line + "\n";
    }
    std::ofstream(dir / "manifest.txt", std::ios::binary | std::ios::trunc) << out;
}

} // namespace

TEST_CASE("train config") {
    const TrainConfig d;
    CHECK(d.lr0 == 1.0f);
    CHECK(d.decay == 0.5f);
    CHECK(d.batch_size == 64);
    CHECK(d.epochs == 10);
    CHECK(d.val_fraction == 0.1);
    CHECK_NOTHROW(d.validate());
    TrainConfig bad = d;
    bad.decay = 1.0f;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::Config);
    bad = d;
    bad.batch_size = 0;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::Config);
}

TEST_CASE("learning-rate schedule") {
    PhaseState s = PhaseState::start(Phase::Location, TrainConfig{});
    CHECK(s.lr == 1.0f);
    CHECK(lr_schedule_step(s, 10.0) == 1.0f);  // first epoch always improves on +inf
    CHECK(lr_schedule_step(s, 12.0) == 0.5f);  // worse
    CHECK(lr_schedule_step(s, 9.0) == 0.5f);   // better
    CHECK(s.best_val_ppl == 9.0);
    CHECK(lr_schedule_step(s, 9.0) == 0.25f);  // a tie decays

    SUBCASE("random perplexity streams give lr0 * 0.5^k, non-increasing") {
        nn::Rng rng(21);
        for (int trial = 0; trial < 200; ++trial) {
            PhaseState st = PhaseState::start(Phase::Character, TrainConfig{});
            float prev = st.lr;
            for (int e = 0; e < 30; ++e) {
                const double ppl = 1.0 + static_cast<double>(rng.next_u64() % 50) / 10.0;
                const float lr = lr_schedule_step(st, ppl);
                CHECK(lr <= prev);
                CHECK(is_power_of_half(lr, 1.0f));
                prev = lr;
            }
        }
    }
}

TEST_CASE("phase state freezes the other decoder") {
    CHECK(PhaseState::start(Phase::Location, TrainConfig{}).frozen == std::set<std::string>{"char_decoder"});
    CHECK(PhaseState::start(Phase::Character, TrainConfig{}).frozen == std::set<std::string>{"location_decoder"});
}

TEST_CASE("make_batches") {
    const auto b = make_batches(130, 64, 3, 0);
    REQUIRE(b.size() == 3);
    CHECK(b[0].size() == 64);
    CHECK(b[1].size() == 64);
    CHECK(b[2].size() == 2);
    std::set<std::size_t> all;
    for (const auto& batch : b) all.insert(batch.begin(), batch.end());
    CHECK(all.size() == 130);
    CHECK(*all.rbegin() == 129);
    CHECK(make_batches(130, 64, 3, 0) == b);
    CHECK(make_batches(130, 64, 3, 1) != b);
    CHECK(make_batches(130, 64, 4, 0) != b);
    CHECK(make_batches(0, 8, 1, 0).empty());
    CHECK(code_of([] { make_batches(5, 0, 1, 0); }) == ErrorCode::Config);
}

TEST_CASE("padding never changes the loss") {
    const DdRnnModel m(tiny(), 2);
    const auto& data = toy_data().encoded;
    std::vector<const EncodedExample*> ptrs;
    for (std::size_t i = 0; i < 9; ++i) ptrs.push_back(&data[i]);
    for (Decoder which : {Decoder::Location, Decoder::Character}) {
        nn::Tape tape(false);
        const Batch b = collate(ptrs);
        const double batched = m.decoder_loss(tape, which, m.encode(tape, b, false, nullptr), b, false, nullptr).item();
        double singles = 0.0;
        for (const auto* p : ptrs) {
            const std::vector<const EncodedExample*> one{p};
            const Batch sb = collate(one);
            singles += m.decoder_loss(tape, which, m.encode(tape, sb, false, nullptr), sb, false, nullptr).item();
        }
        CHECK(std::abs(batched - singles) <= 1e-4);
    }
}

TEST_CASE("perplexity") {
    const auto& data = toy_data().encoded;
    const std::span<const EncodedExample> some(data.data(), 20);

    SUBCASE("uniform model gives V") {
        DdRnnModel m(tiny(), 3);
        for (auto& p : m.params().all()) {
            if (p.name == "char_decoder.w_out" || p.name == "char_decoder.b_out") {
                for (auto& v : p.value.data()) v = 0.0f;
            }
        }
        CHECK(perplexity(m, Decoder::Character, some) == doctest::Approx(double(m.config().vocab_size)).epsilon(1e-5));
    }
    SUBCASE("certain and right gives 1") {
        DdRnnModel m(tiny(), 3);
        for (auto& p : m.params().all()) {
            if (p.name == "loc_decoder.w_out") {
                for (auto& v : p.value.data()) v = 0.0f;
            }
            if (p.name == "loc_decoder.b_out") {
                p.value.data()[0] = 50.0f;
                p.value.data()[1] = -50.0f;
            }
        }
        std::vector<EncodedExample> no_splits(some.begin(), some.end());
        for (auto& e : no_splits) std::fill(e.locations.begin(), e.locations.end(), 0);
        CHECK(perplexity(m, Decoder::Location, no_splits) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("equals exp of the mean loss") {
        const DdRnnModel m(tiny(), 4);
        std::vector<const EncodedExample*> ptrs;
        for (const auto& e : some) ptrs.push_back(&e);
        const Batch b = collate(ptrs);
        nn::Tape tape(false);
        const auto lp = m.decoder_log_probs(tape, Decoder::Character, m.encode(tape, b, false, nullptr), b, false, nullptr);
        const NllSummary s = loss_nll(lp, b.char_out);
        CHECK(std::abs(perplexity(m, Decoder::Character, some, 7) - std::exp(s.per_token())) <= 1e-6 * std::exp(s.per_token()));
    }
    const DdRnnModel m(tiny(), 4);
    CHECK(code_of([&] { perplexity(m, Decoder::Character, std::span<const EncodedExample>()); }) ==
          ErrorCode::EmptyDataset);
}

TEST_CASE("validation split") {
    const auto& ex = toy_data().examples;
    const TrainValSplit s = split_validation(ex, 0.1, 9);
    CHECK(s.val.size() == static_cast<std::size_t>(std::llround(ex.size() * 0.1)));
    CHECK(s.train.size() + s.val.size() == ex.size());
    std::set<std::string> seen;
    for (const auto& e : s.train) seen.insert(e.split() + "|" + e.compound.str());
    for (const auto& e : s.val) CHECK(seen.insert(e.split() + "|" + e.compound.str()).second);
    const TrainValSplit again = split_validation(ex, 0.1, 9);
    CHECK(again.val == s.val);
}

TEST_CASE("frozen groups stay bit-identical across each phase") {
    DdRnnModel m(tiny(), 5);
    const auto chars0 = snapshot(m, "char_decoder");
    const auto enc0 = snapshot(m, "encoder");
    train_phase1(m, train_part(), val_part(), quick());
    CHECK(snapshot(m, "char_decoder") == chars0);
    CHECK(snapshot(m, "encoder") != enc0);

    const auto loc1 = snapshot(m, "location_decoder");
    const auto emb1 = snapshot(m, "embeddings");
    train_phase2(m, train_part(), val_part(), quick());
    CHECK(snapshot(m, "location_decoder") == loc1);
    CHECK(snapshot(m, "embeddings") != emb1);
    CHECK(snapshot(m, "char_decoder") != chars0);

    DdRnnModel baseline(tiny(Variant::BRnnA), 5);
    CHECK(code_of([&] { train_phase1(baseline, train_part(), val_part(), quick()); }) == ErrorCode::Config);
}

TEST_CASE("logged learning rates are powers of the decay") {
    DdRnnModel m(tiny(), 6);
    const auto log = train_phase1(m, train_part(), val_part(), quick(6));
    REQUIRE(log.size() == 6);
    float prev = 1.0f;
    for (const auto& e : log) {
        CHECK(e.lr <= prev);
        CHECK(is_power_of_half(e.lr, 1.0f));
        CHECK(std::isfinite(e.train_loss));
        CHECK(e.val_ppl >= 1.0);
        prev = e.lr;
    }
    CHECK(log.front().epoch == 1);
    CHECK(log.back().epoch == 6);
    const std::string json = log.front().to_json();
    for (const char* key : {"\"phase\":1", "\"epoch\":1", "\"lr\":", "\"train_loss\":", "\"val_ppl\":", "\"wall_time\":"}) {
        CHECK(json.find(key) != std::string::npos);
    }
}

TEST_CASE("zero epochs leave the model untouched") {
    DdRnnModel m(tiny(), 7);
    const auto before = snapshot(m, "");
    CHECK(train_phase1(m, train_part(), val_part(), quick(0)).empty());
    CHECK(train_phase2(m, train_part(), val_part(), quick(0)).empty());
    CHECK(snapshot(m, "") == before);
}

TEST_CASE("training is reproducible") {
    DdRnnModel a(tiny(), 8), b(tiny(), 8);
    const auto la = train_phase2(a, train_part(), val_part(), quick(2));
    const auto lb = train_phase2(b, train_part(), val_part(), quick(2));
    CHECK(snapshot(a, "") == snapshot(b, ""));
    for (std::size_t i = 0; i < la.size(); ++i) {
        CHECK(la[i].train_loss == lb[i].train_loss);
        CHECK(la[i].val_ppl == lb[i].val_ppl);
    }
}

TEST_CASE("non-finite loss is reported as divergence") {
    DdRnnModel m(tiny(), 9);
    TrainConfig t = quick(3);
    t.lr0 = 1e30f;
    t.clip_norm = 0.0;
    CHECK(code_of([&] { train_phase2(m, train_part(), val_part(), t); }) == ErrorCode::Diverged);
}

TEST_CASE("checkpoints") {
    TempDir dir("ckpt");
    DdRnnModel m(tiny(), 10);
    const Vocabulary& vocab = toy_data().vocab;
    TrainConfig t = quick(3);
    PhaseState st = PhaseState::start(Phase::Character, t);
    st.epochs_done = 2;
    st.lr = 0.25f;
    st.best_val_ppl = 3.141592653589793;
    save_checkpoint(dir.path / "a", m, vocab, t, st);

    SUBCASE("round trip") {
        const LoadedCheckpoint c = load_checkpoint(dir.path / "a");
        CHECK(snapshot(c.model, "") == snapshot(m, ""));
        CHECK(c.meta.vocab == vocab);
        CHECK(c.meta.model.hidden == 8);
        CHECK(c.meta.model.variant == Variant::DdRnn);
        CHECK(c.meta.train.seed == 11);
        CHECK(c.meta.train.clip_norm == t.clip_norm);
        CHECK(c.meta.state.phase == Phase::Character);
        CHECK(c.meta.state.epochs_done == 2);
        CHECK(c.meta.state.lr == 0.25f);
        CHECK(c.meta.state.best_val_ppl == 3.141592653589793);
        CHECK(c.meta.state.frozen == st.frozen);
        CHECK(c.meta.code_version == code_version());
        save_checkpoint(dir.path / "b", c.model, c.meta.vocab, c.meta.train, c.meta.state);
        CHECK(slurp(dir.path / "a" / "weights.bin") == slurp(dir.path / "b" / "weights.bin"));
        CHECK(slurp(dir.path / "a" / "manifest.txt") == slurp(dir.path / "b" / "manifest.txt"));
        const auto kv = read_manifest(dir.path / "a");
        CHECK(kv.at("seed") == "11");
        CHECK(kv.at("phase") == "2");
        CHECK(kv.at("epoch") == "2");
        CHECK(kv.at("param.0") == "embed.src " + std::to_string(vocab.size()) + "x6");
    }
    SUBCASE("untrained best perplexity survives") {
        save_checkpoint(dir.path / "c", m, vocab, t, PhaseState::start(Phase::Location, t));
        CHECK(std::isinf(load_checkpoint(dir.path / "c").meta.state.best_val_ppl));
    }
    SUBCASE("edited shape") {
        rewrite_manifest_line(dir.path / "a", "param.3", "encoder.fw.l0.b 33");
        CHECK(code_of([&] { load_checkpoint(dir.path / "a"); }) == ErrorCode::ShapeMismatch);
    }
    SUBCASE("edited config") {
        rewrite_manifest_line(dir.path / "a", "model.hidden", "9");
        CHECK(code_of([&] { load_checkpoint(dir.path / "a"); }) == ErrorCode::ShapeMismatch);
    }
    SUBCASE("other format version") {
        rewrite_manifest_line(dir.path / "a", "format_version", "2");
        CHECK(code_of([&] { load_checkpoint(dir.path / "a"); }) == ErrorCode::VersionMismatch);
    }
    SUBCASE("truncated weights") {
        const std::string w = slurp(dir.path / "a" / "weights.bin");
        std::ofstream(dir.path / "a" / "weights.bin", std::ios::binary | std::ios::trunc) << w.substr(0, w.size() - 4);
        CHECK(code_of([&] { load_checkpoint(dir.path / "a"); }) == ErrorCode::Checkpoint);
    }
    SUBCASE("missing directory") {
        CHECK(code_of([&] { load_checkpoint(dir.path / "nope"); }) == ErrorCode::Io);
    }
}

TEST_CASE("resuming from a checkpoint replays the same run") {
    TempDir dir("resume");
    const Vocabulary& vocab = toy_data().vocab;
    const TrainConfig t = quick(4);

    DdRnnModel full(tiny(), 12);
    train_phase1(full, train_part(), val_part(), t);
    const auto full_log = train_phase2(full, train_part(), val_part(), t);

    DdRnnModel first(tiny(), 12);
    train_phase1(first, train_part(), val_part(), t);
    train_phase2(first, train_part(), val_part(), t,
                 [&](const DdRnnModel& model, const PhaseState& st, const EpochMetrics&) {
                     if (st.epochs_done == 2) save_checkpoint(dir.path, model, vocab, t, st);
                 });

    LoadedCheckpoint c = load_checkpoint(dir.path);
    REQUIRE(c.meta.state.epochs_done == 2);
    const auto rest = train_phase(c.model, c.meta.state, train_part(), val_part(), c.meta.train);
    REQUIRE(rest.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(rest[i].epoch == full_log[i + 2].epoch);
        CHECK(rest[i].lr == full_log[i + 2].lr);
        CHECK(rest[i].train_loss == full_log[i + 2].train_loss);
        CHECK(rest[i].val_ppl == full_log[i + 2].val_ppl);
    }
    CHECK(snapshot(c.model, "") == snapshot(full, ""));
}

TEST_CASE("location phase halves its training loss on the toy benchmark") {
    const auto ex = label_records(toy::generate(toy::ToyConfig{})).examples;
    const Vocabulary vocab = vocabulary_for(ex);
    const TrainValSplit tv = split_validation(ex, 0.1, 1);
    const auto train = encode_all(tv.train, vocab), val = encode_all(tv.val, vocab);
    DdRnnModel m(toy::benchmark_model(vocab.size()), 1);
    const auto log = train_phase1(m, train, val, toy::benchmark_training(1));
    INFO("epoch 1 " << log.front().train_loss << ", epoch 10 " << log.back().train_loss);
    CHECK(log.back().train_loss < 0.5 * log.front().train_loss);
}
