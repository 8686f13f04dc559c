// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// Two-phase training. Phase 1 fits the location decoder with the character
// decoder frozen; phase 2 fits the character decoder with the location
// decoder frozen. Encoder, attention and embeddings train in both. Variants
// without a location decoder only run phase 2.
//
// Every random draw derives from the root seed by (phase, epoch, batch), so
// a run resumed from an end-of-epoch checkpoint replays the remaining epochs
// exactly.

#pragma once

#include "sandhi/model.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace sandhi {

struct TrainConfig {
    float lr0 = 1.0f;
    float decay = 0.5f;
    std::size_t batch_size = 64;
    std::size_t epochs = 10;  // per phase
    std::uint64_t seed = 0;
    double val_fraction = 0.1;
    double clip_norm = 5.0;  // global-norm clipping; 0 disables it

    void validate() const;
};

enum class Phase { Location = 1, Character = 2 };

struct PhaseState {
    Phase phase = Phase::Location;
    std::set<std::string> frozen;
    float lr = 1.0f;
    double best_val_ppl = std::numeric_limits<double>::infinity();
    std::size_t epochs_done = 0;

    static PhaseState start(Phase phase, const TrainConfig& cfg);
};

struct EpochMetrics {
    Phase phase = Phase::Location;
    std::size_t epoch = 0;  // 1-based
    float lr = 0.0f;        // rate used during the epoch
    double train_loss = 0.0;  // mean per-token NLL
    double val_ppl = 0.0;
    double wall_time = 0.0;   // seconds

    std::string to_json() const;
};

/// Decays lr when val_ppl does not improve on the best so far (a tie counts
/// as no improvement); otherwise records the new best. Returns the new lr.
float lr_schedule_step(PhaseState& state, double val_ppl, float decay = 0.5f);

/// Shuffled index batches; the order depends only on (seed, epoch).
std::vector<std::vector<std::size_t>> make_batches(std::size_t count, std::size_t batch_size, std::uint64_t seed,
                                                   std::size_t epoch);

/// exp(mean per-token NLL) of one decoder over a dataset (dropout off).
/// Throws EmptyDataset.
double perplexity(const DdRnnModel& model, Decoder which, std::span<const EncodedExample> data,
                  std::size_t batch_size = 64);

/// Carves a seeded validation subset out of the training examples.
struct TrainValSplit {
    std::vector<SandhiExample> train;
    std::vector<SandhiExample> val;
};
TrainValSplit split_validation(std::span<const SandhiExample> train, double val_fraction, std::uint64_t seed);

/// Called after each epoch with the updated state; may save a checkpoint.
using EpochHook = std::function<void(const DdRnnModel&, const PhaseState&, const EpochMetrics&)>;

/// Runs the remaining epochs of `state.phase` (state.epochs_done onward).
/// Throws Diverged on a non-finite loss.
std::vector<EpochMetrics> train_phase(DdRnnModel& model, PhaseState& state, std::span<const EncodedExample> train,
                                      std::span<const EncodedExample> val, const TrainConfig& cfg,
                                      const EpochHook& hook = {});

/// Phase 1 from scratch; requires a location decoder.
std::vector<EpochMetrics> train_phase1(DdRnnModel& model, std::span<const EncodedExample> train,
                                       std::span<const EncodedExample> val, const TrainConfig& cfg,
                                       const EpochHook& hook = {});
/// Phase 2 from scratch.
std::vector<EpochMetrics> train_phase2(DdRnnModel& model, std::span<const EncodedExample> train,
                                       std::span<const EncodedExample> val, const TrainConfig& cfg,
                                       const EpochHook& hook = {});

std::vector<EncodedExample> encode_all(std::span<const SandhiExample> examples, const Vocabulary& vocab);

/// Vocabulary over every compound and constituent character.
Vocabulary vocabulary_for(std::span<const SandhiExample> examples);

} // namespace sandhi
