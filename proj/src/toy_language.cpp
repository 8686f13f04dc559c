// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "sandhi/toy_language.hpp"

#include "sandhi/error.hpp"
#include "sandhi/nn/rng.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_map>

namespace sandhi::toy {

namespace {

constexpr std::string_view kVowels = "aAiue";
constexpr std::string_view kConsonants = "ytrns";

std::uint64_t hash_of(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h = nn::Rng::mix(h ^ static_cast<unsigned char>(c));
    }
    return h;
}

// Joins `right` onto `out` in place.
void join(std::string& out, std::string_view left_morpheme, std::string right) {
    if (left_morpheme.find('r') != std::string_view::npos) {
        if (auto n = right.find('n'); n != std::string::npos) {
            right[n] = 'R';
        }
    }
    const char l = out.back();
    const char r = right.front();
    if (l == 'a' && r == 'u') {
        out.back() = 'o';
        right.erase(0, 1);
    } else if (l == 'a' && r == 'a') {
        out.back() = 'A';
        right.erase(0, 1);
    } else if (l == 'a' && r == 'i') {
        out.back() = 'e';
        right.erase(0, 1);
    } else if (l == 'i' && r == 'a') {
        out.back() = 'y';
    } else if (l == 't' && r == 'n') {
        out.back() = 'n';
    } else if (l == 's' && r == 'r') {
        out.pop_back();
    } else if (l == 'e' && r == 'a') {
        right.erase(0, 1);
    }
    out += right;
}

} // namespace

std::string_view alphabet() noexcept { return "AReainorstuy"; }

std::vector<std::string> make_lexicon(const ToyConfig& cfg) {
    if (cfg.min_morpheme == 0 || cfg.min_morpheme > cfg.max_morpheme) {
        throw Error(ErrorCode::Config, "invalid toy morpheme length range");
    }
    nn::Rng rng = nn::Rng(cfg.seed).split(11);
    std::set<std::string> seen;
    std::vector<std::string> lexicon;
    while (lexicon.size() < cfg.lexicon_size) {
        const std::size_t len = cfg.min_morpheme + rng.next_u64() % (cfg.max_morpheme - cfg.min_morpheme + 1);
        bool vowel = rng.next_u64() % 2 == 0;
        std::string m;
        for (std::size_t i = 0; i < len; ++i) {
            const std::string_view pool = vowel ? kVowels : kConsonants;
            m.push_back(pool[rng.next_u64() % pool.size()]);
            // Mostly alternate, sometimes cluster.
            if (rng.next_u64() % 5 != 0) {
                vowel = !vowel;
            }
        }
        if (seen.insert(m).second) {
            lexicon.push_back(m);
        }
    }
    return lexicon;
}

std::string fuse(std::span<const std::string> morphemes) {
    if (morphemes.empty()) {
        return {};
    }
    std::string out = morphemes[0];
    for (std::size_t i = 1; i < morphemes.size(); ++i) {
        join(out, morphemes[i - 1], morphemes[i]);
    }
    return out;
}

std::vector<RawRecord> generate(const ToyConfig& cfg) {
    if (cfg.min_parts < 2 || cfg.min_parts > cfg.max_parts) {
        throw Error(ErrorCode::Config, "invalid toy part-count range");
    }
    const std::vector<std::string> lexicon = make_lexicon(cfg);
    const std::size_t L = lexicon.size();

    // How many morpheme sequences reach each surface form.
    std::unordered_map<std::uint64_t, std::uint32_t> reach;
    std::vector<std::string> parts;
    std::function<void(std::size_t)> enumerate = [&](std::size_t depth) {
        if (depth >= cfg.min_parts) {
            ++reach[hash_of(fuse(parts))];
        }
        if (depth == cfg.max_parts) {
            return;
        }
        for (std::size_t i = 0; i < L; ++i) {
            parts.push_back(lexicon[i]);
            enumerate(depth + 1);
            parts.pop_back();
        }
    };
    enumerate(0);

    nn::Rng rng = nn::Rng(cfg.seed).split(12);
    std::set<std::string> taken;
    std::vector<RawRecord> out;
    const std::size_t max_attempts = cfg.compounds * 200;
    for (std::size_t attempt = 0; attempt < max_attempts && out.size() < cfg.compounds; ++attempt) {
        const std::size_t n = cfg.min_parts + rng.next_u64() % (cfg.max_parts - cfg.min_parts + 1);
        std::vector<std::string> pick;
        for (std::size_t k = 0; k < n; ++k) {
            pick.push_back(lexicon[rng.next_u64() % L]);
        }
        const std::string surface = fuse(pick);
        if (reach[hash_of(surface)] != 1 || taken.contains(surface)) {
            continue;
        }
        try {
            (void)derive_split_locations(surface, pick);
        } catch (const Error&) {
            continue;
        }
        taken.insert(surface);
        out.push_back({surface, pick, out.size() + 1});
    }
    if (out.size() < cfg.compounds) {
        throw Error(ErrorCode::Config, "toy language too ambiguous: only " + std::to_string(out.size()) +
                                           " unique compounds found");
    }
    return out;
}

ModelConfig benchmark_model(std::size_t vocab_size, Variant variant) {
    ModelConfig mc;
    mc.embed_dim = 32;
    mc.hidden = 64;
    mc.layers = 2;
    mc.dropout = 0.3f;
    mc.vocab_size = vocab_size;
    mc.variant = variant;
    return mc;
}

TrainConfig benchmark_training(std::uint64_t seed) {
    TrainConfig t;
    t.batch_size = 32;
    t.epochs = 10;
    t.seed = seed;
    return t;
}

} // namespace sandhi::toy
