// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference checks used by both the unit tests and the
// acceptance runner. Each returns a mismatch count (0 == pass) and records
// the first offending case.

#pragma once

#include "sandhi/corpus.hpp"
#include "sandhi/nn/rng.hpp"
#include "sandhi/translit.hpp"

#include <set>
#include <string>
#include <vector>

namespace sandhi::testing {

struct OracleResult {
    std::size_t cases = 0;
    std::size_t mismatches = 0;
    std::string first;

    void fail(std::string what) {
        if (mismatches++ == 0) {
            first = std::move(what);
        }
    }
};

// Every single letter and every ordered letter pair of the SLP1 table
// survives SLP1 -> Devanagari -> SLP1 and Devanagari -> SLP1 -> Devanagari;
// the per-letter Devanagari images are pairwise distinct.
inline OracleResult translit_table_roundtrip() {
    OracleResult r;
    const std::string alpha(slp1::alphabet());
    std::set<std::string> images;
    auto check = [&](const std::string& s) {
        ++r.cases;
        const std::string deva = slp1_to_devanagari(s);
        const std::string back = devanagari_to_slp1(deva);
        if (back != s) {
            r.fail(s + " -> " + deva + " -> " + back);
        }
        if (slp1_to_devanagari(back) != deva) {
            r.fail("devanagari " + deva + " is not stable");
        }
    };
    for (char c : alpha) {
        check(std::string(1, c));
        // IAST digraphs (kh, ai, ...) make letter pairs ambiguous, so only
        // single letters are round-tripped through IAST.
        const std::string iast = slp1_to_iast(std::string(1, c));
        if (iast_to_slp1(iast) != std::string(1, c)) {
            r.fail(std::string(1, c) + " -> iast " + iast);
        }
        images.insert(slp1_to_devanagari(std::string(1, c)));
    }
    if (images.size() != alpha.size()) {
        r.fail("Devanagari images are not injective");
    }
    for (char a : alpha) {
        for (char b : alpha) {
            check(std::string{a, b});
        }
    }
    return r;
}

inline std::string random_slp1_word(nn::Rng& rng, std::size_t min_len, std::size_t max_len) {
    const std::string_view alpha = slp1::alphabet();
    const std::size_t len = min_len + rng.next_u64() % (max_len - min_len + 1);
    std::string w;
    for (std::size_t i = 0; i < len; ++i) {
        w.push_back(alpha[rng.next_u64() % alpha.size()]);
    }
    return w;
}

inline OracleResult translit_random_roundtrip(std::size_t count, std::uint64_t seed) {
    OracleResult r;
    nn::Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const std::string w = random_slp1_word(rng, 1, 16);
        ++r.cases;
        const std::string deva = slp1_to_devanagari(w);
        if (devanagari_to_slp1(deva) != w) {
            r.fail(w);
        } else if (slp1_to_devanagari(devanagari_to_slp1(deva)) != deva) {
            r.fail("devanagari of " + w);
        }
    }
    return r;
}

struct TranslitFixture {
    Scheme scheme;
    std::string input;
    std::string slp1;
};

inline std::vector<TranslitFixture> translit_fixtures() {
    return {
        {Scheme::Devanagari, "प्रोत्साहः", "protsAhaH"},
        {Scheme::Iast, "protsāhaḥ", "protsAhaH"},
        {Scheme::Iast, "paropakāraḥ", "paropakAraH"},
        {Scheme::Iast, "uttarāyaṇa", "uttarAyaRa"},
        {Scheme::Devanagari, "क", "ka"},
        {Scheme::Iast, "a", "a"},
    };
}

inline OracleResult translit_fixture_check() {
    OracleResult r;
    for (const auto& f : translit_fixtures()) {
        ++r.cases;
        const std::string got = to_slp1(f.input, f.scheme);
        if (got != f.slp1) {
            r.fail(f.input + " -> " + got + " (want " + f.slp1 + ")");
        }
    }
    return r;
}

// Pure concatenations: the mark for each non-final constituent sits on its
// last character, so plain index arithmetic gives the gold vector.
inline OracleResult alignment_concatenation_oracle(std::size_t count, std::uint64_t seed) {
    OracleResult r;
    nn::Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t parts = 2 + rng.next_u64() % 3;
        std::vector<std::string> constituents;
        std::string compound;
        std::vector<std::uint8_t> want;
        for (std::size_t p = 0; p < parts; ++p) {
            constituents.push_back(random_slp1_word(rng, 1, 7));
            compound += constituents.back();
        }
        want.assign(compound.size(), 0);
        std::size_t offset = 0;
        for (std::size_t p = 0; p + 1 < parts; ++p) {
            offset += constituents[p].size();
            want[offset - 1] = 1;
        }
        ++r.cases;
        try {
            if (derive_split_locations(compound, constituents) != want) {
                r.fail(compound);
            }
        } catch (const std::exception& e) {
            r.fail(compound + ": " + e.what());
        }
    }
    return r;
}

} // namespace sandhi::testing
