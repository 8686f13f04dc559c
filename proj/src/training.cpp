// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "sandhi/training.hpp"

#include "sandhi/error.hpp"
#include "sandhi/nn/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace sandhi {

using nn::Rng;
using nn::Tape;
using nn::Tensor;

namespace {

// Stream keys under the root seed.
constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kDropoutStream = 0x4450;
constexpr std::uint64_t kValidationStream = 0x5641;

Decoder decoder_for(Phase p) { return p == Phase::Location ? Decoder::Location : Decoder::Character; }

} // namespace

void TrainConfig::validate() const {
    if (!(decay > 0.0f && decay < 1.0f)) {
        throw Error(ErrorCode::Config, "train.decay must be in (0, 1)");
    }
    if (batch_size == 0) {
        throw Error(ErrorCode::Config, "train.batch_size must be at least 1");
    }
    if (!(lr0 > 0.0f)) {
        throw Error(ErrorCode::Config, "train.lr0 must be positive");
    }
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
        throw Error(ErrorCode::Config, "train.val_fraction must be in [0, 1)");
    }
}

PhaseState PhaseState::start(Phase phase, const TrainConfig& cfg) {
    PhaseState s;
    s.phase = phase;
    s.lr = cfg.lr0;
    s.frozen = {std::string(phase == Phase::Location ? kGroupCharDecoder : kGroupLocationDecoder)};
    return s;
}

std::string EpochMetrics::to_json() const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\"phase\":%d,\"epoch\":%zu,\"lr\":%.9g,\"train_loss\":%.9g,\"val_ppl\":%.9g,\"wall_time\":%.3f}",
                  static_cast<int>(phase), epoch, static_cast<double>(lr), train_loss, val_ppl, wall_time);
    return buf;
}

float lr_schedule_step(PhaseState& state, double val_ppl, float decay) {
    if (val_ppl >= state.best_val_ppl) {
        state.lr *= decay;
    } else {
        state.best_val_ppl = val_ppl;
    }
    return state.lr;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t count, std::size_t batch_size, std::uint64_t seed,
                                                   std::size_t epoch) {
    if (batch_size == 0) {
        throw Error(ErrorCode::Config, "batch size must be at least 1");
    }
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng(seed).split(kShuffleStream).split(epoch);
    std::shuffle(order.begin(), order.end(), rng.engine());
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < count; start += batch_size) {
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(std::min(count, start + batch_size)));
    }
    return batches;
}

double perplexity(const DdRnnModel& model, Decoder which, std::span<const EncodedExample> data,
                  std::size_t batch_size) {
    if (data.empty()) {
        throw Error(ErrorCode::EmptyDataset, "perplexity of an empty dataset");
    }
    double total = 0.0;
    std::size_t tokens = 0;
    for (std::size_t start = 0; start < data.size(); start += batch_size) {
        std::vector<const EncodedExample*> ptrs;
        for (std::size_t i = start; i < std::min(data.size(), start + batch_size); ++i) {
            ptrs.push_back(&data[i]);
        }
        const Batch batch = collate(ptrs);
        Tape tape(false);
        const EncoderOutputs enc = model.encode(tape, batch, false, nullptr);
        const Tensor lp = model.decoder_log_probs(tape, which, enc, batch, false, nullptr);
        const NllSummary s = loss_nll(lp, which == Decoder::Location ? batch.loc_out : batch.char_out);
        total += s.total;
        tokens += s.tokens;
    }
    if (tokens == 0) {
        throw Error(ErrorCode::EmptyDataset, "dataset has no target tokens");
    }
    return std::exp(total / static_cast<double>(tokens));
}

TrainValSplit split_validation(std::span<const SandhiExample> train, double val_fraction, std::uint64_t seed) {
    const DatasetSplit s = train_test_split(train, 1.0 - val_fraction, Rng(seed).split(kValidationStream).next_u64());
    return {s.train, s.test};
}

std::vector<EpochMetrics> train_phase(DdRnnModel& model, PhaseState& state, std::span<const EncodedExample> train,
                                      std::span<const EncodedExample> val, const TrainConfig& cfg,
                                      const EpochHook& hook) {
    cfg.validate();
    if (train.empty()) {
        throw Error(ErrorCode::EmptyDataset, "no training examples");
    }
    const Decoder which = decoder_for(state.phase);
    if (which == Decoder::Location && !has_location_decoder(model.config().variant)) {
        throw Error(ErrorCode::Config, "phase 1 needs a model with a location decoder");
    }
    std::vector<Tensor> trainable;
    std::vector<Tensor> frozen;
    for (auto& p : model.params().all()) {
        (state.frozen.contains(p.group) ? frozen : trainable).push_back(p.value);
    }
    // The decoder that is not trained this phase never enters the graph.
    for (auto& t : frozen) {
        t.set_requires_grad(false);
    }
    for (auto& t : trainable) {
        t.set_requires_grad(true);
    }

    const Rng phase_root = Rng(cfg.seed).split(kDropoutStream).split(static_cast<std::uint64_t>(state.phase));
    const std::uint64_t shuffle_seed = Rng(cfg.seed).split(static_cast<std::uint64_t>(state.phase)).next_u64();

    std::vector<EpochMetrics> log;
    for (std::size_t epoch = state.epochs_done; epoch < cfg.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        const Rng epoch_root = phase_root.split(epoch);
        double loss_total = 0.0;
        std::size_t tokens = 0;
        const auto batches = make_batches(train.size(), cfg.batch_size, shuffle_seed, epoch);
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            std::vector<const EncodedExample*> ptrs;
            for (std::size_t i : batches[bi]) {
                ptrs.push_back(&train[i]);
            }
            const Batch batch = collate(ptrs);
            Rng dropout = epoch_root.split(bi);
            Tape tape;
            const EncoderOutputs enc = model.encode(tape, batch, true, &dropout);
            const Tensor summed = model.decoder_loss(tape, which, enc, batch, true, &dropout);
            const double value = summed.item();
            if (!std::isfinite(value)) {
                throw Error(ErrorCode::Diverged, "non-finite loss in phase " +
                                                     std::to_string(static_cast<int>(state.phase)) + ", epoch " +
                                                     std::to_string(epoch + 1) + ", batch " + std::to_string(bi + 1));
            }
            loss_total += value;
            tokens += which == Decoder::Location ? batch.loc_tokens : batch.char_tokens;
            tape.backward(tape.scale(summed, 1.0f / static_cast<float>(batch.size)));
            for (auto& t : trainable) {
                t.ensure_grad();
            }
            if (cfg.clip_norm > 0.0) {
                nn::clip_grad_norm(trainable, cfg.clip_norm);
            }
            nn::sgd_step(trainable, state.lr);
        }

        EpochMetrics m;
        m.phase = state.phase;
        m.epoch = epoch + 1;
        m.lr = state.lr;
        m.train_loss = tokens == 0 ? 0.0 : loss_total / static_cast<double>(tokens);
        m.val_ppl = val.empty() ? std::exp(m.train_loss) : perplexity(model, which, val, cfg.batch_size);
        if (!std::isfinite(m.val_ppl)) {
            throw Error(ErrorCode::Diverged, "non-finite validation perplexity after epoch " + std::to_string(epoch + 1));
        }
        lr_schedule_step(state, m.val_ppl, cfg.decay);
        state.epochs_done = epoch + 1;
        m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        log.push_back(m);
        if (hook) {
            hook(model, state, m);
        }
    }
    for (auto& p : model.params().all()) {
        p.value.set_requires_grad(true);
        p.value.drop_grad();
    }
    return log;
}

std::vector<EpochMetrics> train_phase1(DdRnnModel& model, std::span<const EncodedExample> train,
                                       std::span<const EncodedExample> val, const TrainConfig& cfg,
                                       const EpochHook& hook) {
    PhaseState state = PhaseState::start(Phase::Location, cfg);
    return train_phase(model, state, train, val, cfg, hook);
}

std::vector<EpochMetrics> train_phase2(DdRnnModel& model, std::span<const EncodedExample> train,
                                       std::span<const EncodedExample> val, const TrainConfig& cfg,
                                       const EpochHook& hook) {
    PhaseState state = PhaseState::start(Phase::Character, cfg);
    return train_phase(model, state, train, val, cfg, hook);
}

std::vector<EncodedExample> encode_all(std::span<const SandhiExample> examples, const Vocabulary& vocab) {
    std::vector<EncodedExample> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) {
        out.push_back(encode_example(ex, vocab));
    }
    return out;
}

Vocabulary vocabulary_for(std::span<const SandhiExample> examples) {
    std::vector<std::string> corpus;
    for (const auto& ex : examples) {
        corpus.push_back(ex.compound.str());
        corpus.push_back(ex.split());
    }
    return Vocabulary::build(corpus);
}

} // namespace sandhi
