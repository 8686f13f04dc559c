// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace sandhi::nn {

/// Seeded generator that can derive independent child streams by key, so
/// every consumer (init, dropout per batch, shuffles) gets a reproducible
/// stream without sharing mutable state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

    /// Child stream determined only by this generator's seed and `key`.
    Rng split(std::uint64_t key) const { return Rng(mix(seed_ ^ mix(key + 0x9E3779B97F4A7C15ULL))); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 24 bits of resolution.
    float uniform() { return static_cast<float>(engine_() >> 40) * 0x1.0p-24f; }
    float uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }

    std::mt19937_64& engine() noexcept { return engine_; }

    static std::uint64_t mix(std::uint64_t x) noexcept {
        // splitmix64 finalizer
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace sandhi::nn
