// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// A small synthetic sandhi language for benchmarking at desk scale.
//
// Morphemes are drawn from ten letters (a A i u e y t r n s). Joining two
// morphemes applies at most one junction rule to the touching characters:
//
//     a+u -> o    a+a -> A    a+i -> e    i+a -> ya
//     t+n -> nn   s+r -> r    e+a -> e
//
// and, before the junction, one long-distance rule: when the left morpheme
// contains r, the first n of the right morpheme becomes R. The compound
// alphabet is therefore the ten letters plus o and R.

#pragma once

#include "sandhi/corpus.hpp"
#include "sandhi/model.hpp"
#include "sandhi/training.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sandhi::toy {

struct ToyConfig {
    std::size_t compounds = 2000;
    std::size_t lexicon_size = 30;
    std::size_t min_morpheme = 3;
    std::size_t max_morpheme = 5;
    std::size_t min_parts = 2;
    std::size_t max_parts = 4;
    std::uint64_t seed = 1;
};

std::string_view alphabet() noexcept;  // the 12 compound characters

/// Deterministic lexicon of distinct morphemes.
std::vector<std::string> make_lexicon(const ToyConfig& cfg);

/// Applies the fusion rules left to right.
std::string fuse(std::span<const std::string> morphemes);

/// Compounds with unique analyses: any surface form reachable from two
/// different morpheme sequences is excluded, as are forms whose gold
/// locations cannot be derived. Output order is deterministic for a seed.
std::vector<RawRecord> generate(const ToyConfig& cfg);

// Reduced-scale settings for the toy benchmark: embed 32, hidden 64, two
// layers, dropout 0.3; batch 32, 10 epochs per phase, lr 1.0 halved on a
// validation plateau.
ModelConfig benchmark_model(std::size_t vocab_size, Variant variant = Variant::DdRnn);
TrainConfig benchmark_training(std::uint64_t seed);

} // namespace sandhi::toy
