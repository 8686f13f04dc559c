// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include "sandhi/corpus.hpp"
#include "sandhi/error.hpp"
#include "support/oracles.hpp"

#include <map>
#include <set>
#include <sstream>

using namespace sandhi;

namespace {

std::vector<std::string> parts(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Io;
}

// Brute force: walk every alignment path, keep the minimal-cost ones, and
// record where each target character lands (deleted characters land on the
// next compound character, clamped to the last one).
struct BruteAlignment {
    std::size_t best = SIZE_MAX;
    std::vector<std::set<std::size_t>> landing;  // per target char, over minimal paths
};

void walk(const std::string& a, const std::string& b, std::size_t i, std::size_t j, std::size_t cost,
          std::vector<std::size_t>& land, BruteAlignment& out) {
    if (cost > out.best) {
        return;
    }
    if (i == a.size() && j == b.size()) {
        if (cost < out.best) {
            out.best = cost;
            out.landing.assign(b.size(), {});
        }
        for (std::size_t t = 0; t < b.size(); ++t) {
            out.landing[t].insert(land[t]);
        }
        return;
    }
    if (i < a.size() && j < b.size()) {
        land[j] = i;
        walk(a, b, i + 1, j + 1, cost + (a[i] != b[j]), land, out);
    }
    if (j < b.size()) {
        land[j] = std::min(i, a.size() - 1);
        walk(a, b, i, j + 1, cost + 1, land, out);
    }
    if (i < a.size()) {
        walk(a, b, i + 1, j, cost + 1, land, out);
    }
}

} // namespace

TEST_CASE("parse dataset records") {
    std::istringstream in("protsAhaH\tpra+utsAhaH\n"
                          "paropakAraH\tpara+upakAraH\n"
                          "\n"
                          "noseparator\n"
                          "single\tone\n"
                          "x\ta++b\n");
    auto r = parse_dataset(in, Scheme::Slp1);
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].compound == "protsAhaH");
    CHECK(r.records[0].constituents == parts({"pra", "utsAhaH"}));
    CHECK(r.records[1].constituents == parts({"para", "upakAraH"}));
    REQUIRE(r.errors.size() == 3);
    CHECK(r.errors[0].line == 4);
    CHECK(r.errors[1].line == 5);
    CHECK(r.errors[2].line == 6);
}

TEST_CASE("parse dataset in other schemes") {
    std::istringstream deva("प्रोत्साहः\tप्र+उत्साहः\n");
    auto d = parse_dataset(deva, Scheme::Devanagari);
    REQUIRE(d.records.size() == 1);
    CHECK(d.records[0].compound == "protsAhaH");
    CHECK(d.records[0].split() == "pra+utsAhaH");

    std::istringstream iast("paropakāraḥ\tpara+upakāraḥ\nbad\tcafé+x\n");
    auto i = parse_dataset(iast, Scheme::Iast);
    REQUIRE(i.records.size() == 1);
    CHECK(i.records[0].compound == "paropakAraH");
    CHECK(i.errors.size() == 1);

    CHECK(code_of([] { parse_dataset(std::filesystem::path("/nonexistent/data.tsv"), Scheme::Slp1); }) ==
          ErrorCode::Io);
}

TEST_CASE("curation") {
    RawRecord a{"protsAhaH", parts({"pra", "utsAhaH"}), 1};
    std::vector<RawRecord> dup{a, a};
    CHECK(curate(dup).size() == 1);

    RawRecord at31{std::string(31, 'a'), parts({"aaaaaaaaaaaaaaa", "aaaaaaaaaaaaaaaa"}), 2};
    RawRecord at32{std::string(32, 'a'), parts({"aaaaaaaaaaaaaaaa", "aaaaaaaaaaaaaaaa"}), 3};
    RawRecord bad{"ab1", parts({"a", "b1"}), 4};
    std::vector<RawRecord> all{a, at31, at32, bad, a};
    auto res = curate_with_report(all);
    REQUIRE(res.kept.size() == 2);
    CHECK(res.kept[0] == a);
    CHECK(res.kept[1] == at31);
    std::multiset<std::string> reasons;
    for (const auto& r : res.rejected) {
        reasons.insert(r.reason);
    }
    CHECK(reasons == std::multiset<std::string>{"duplicate", "non_slp1", "too_long"});

    auto once = curate(all);
    CHECK(curate(once) == once);

    WordFilter only_short = [](const RawRecord& r) { return r.compound.size() < 20; };
    CHECK(curate(all, kDefaultMaxLen, only_short).size() == 1);
}

TEST_CASE("split locations for worked examples") {
    CHECK(derive_split_locations("protsAhaH", parts({"pra", "utsAhaH"})) ==
          std::vector<std::uint8_t>{0, 0, 1, 0, 0, 0, 0, 0, 0});
    auto t = derive_split_locations("tattvam", parts({"tat", "tvam"}));
    CHECK(t == std::vector<std::uint8_t>{0, 0, 1, 0, 0, 0, 0});
    auto p = derive_split_locations("paropakAraH", parts({"para", "upakAraH"}));
    CHECK(p == std::vector<std::uint8_t>{0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0});
    auto ab = derive_split_locations("ab", parts({"a", "b"}));
    CHECK(ab == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("split location failures") {
    CHECK(code_of([] { derive_split_locations("xyz", parts({"abc", "def"})); }) == ErrorCode::AlignmentFailed);
    CHECK(code_of([] { derive_split_locations("ab", parts({"ab"})); }) == ErrorCode::AlignmentFailed);
    // "aa" vs "a"+"a"+"a": the extra 'a' can be dropped at any position.
    CHECK(code_of([] { derive_split_locations("aaaaaa", parts({"aa", "aaa", "aa"})); }) ==
          ErrorCode::AlignmentAmbiguous);
}

TEST_CASE("pure concatenation matches index arithmetic") {
    auto r = sandhi::testing::alignment_concatenation_oracle(500, 99);
    INFO(r.first);
    CHECK(r.mismatches == 0);
}

TEST_CASE("alignment agrees with brute-force path enumeration") {
    nn::Rng rng(123);
    const std::string letters = "aAiuort";
    int agreed = 0;
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> cs;
        std::string target;
        const std::size_t k = 2 + rng.next_u64() % 2;
        for (std::size_t c = 0; c < k; ++c) {
            std::string w;
            const std::size_t len = 1 + rng.next_u64() % 3;
            for (std::size_t i = 0; i < len; ++i) {
                w.push_back(letters[rng.next_u64() % letters.size()]);
            }
            cs.push_back(w);
            target += w;
        }
        // One random edit near the junction mimics a fusion.
        std::string compound = target;
        const std::size_t at = rng.next_u64() % compound.size();
        switch (rng.next_u64() % 3) {
            case 0: compound[at] = letters[rng.next_u64() % letters.size()]; break;
            case 1: compound.erase(at, 1); break;
            default: compound.insert(at, 1, letters[rng.next_u64() % letters.size()]); break;
        }
        if (compound.empty()) {
            continue;
        }
        BruteAlignment brute;
        std::vector<std::size_t> land(target.size());
        walk(compound, target, 0, 0, 0, land, brute);

        std::vector<std::set<std::size_t>> marks;
        std::size_t offset = 0;
        for (std::size_t c = 0; c + 1 < cs.size(); ++c) {
            offset += cs[c].size();
            marks.push_back(brute.landing[offset - 1]);
        }
        const bool ambiguous = std::any_of(marks.begin(), marks.end(), [](const auto& s) { return s.size() != 1; });
        std::set<std::size_t> distinct;
        for (const auto& s : marks) {
            distinct.insert(*s.begin());
        }
        const bool too_far = 2 * brute.best > compound.size();
        INFO(compound, " vs ", target);
        try {
            auto got = derive_split_locations(compound, cs);
            CHECK_FALSE(too_far);
            CHECK_FALSE(ambiguous);
            std::vector<std::uint8_t> want(compound.size(), 0);
            for (const auto& s : marks) {
                want[*s.begin()] = 1;
            }
            CHECK(got == want);
            ++agreed;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::AlignmentAmbiguous) {
                CHECK_FALSE(too_far);
                CHECK(ambiguous);
            } else {
                CHECK((too_far || (!ambiguous && distinct.size() != marks.size())));
            }
        }
    }
    CHECK(agreed > 50);
}

TEST_CASE("edit distance") {
    CHECK(edit_distance("", "abc") == 3);
    CHECK(edit_distance("kitten", "sitting") == 3);
    CHECK(edit_distance("protsAhaH", "prautsAhaH") == 2);
}

TEST_CASE("examples and labeling") {
    std::vector<RawRecord> records{{"protsAhaH", parts({"pra", "utsAhaH"}), 1},
                                   {"xyz", parts({"abc", "def"}), 2},
                                   {"aaaaaa", parts({"aa", "aaa", "aa"}), 3}};
    auto l = label_records(records);
    REQUIRE(l.examples.size() == 1);
    REQUIRE(l.rejected.size() == 2);
    CHECK(l.rejected[0].reason == "alignment_failed");
    CHECK(l.rejected[1].reason == "ambiguous");
    const auto& ex = l.examples[0];
    CHECK(ex.split() == "pra+utsAhaH");
    CHECK(std::count(ex.locations.begin(), ex.locations.end(), 1) == 1);
}

TEST_CASE("train/test split") {
    std::vector<SandhiExample> exs;
    for (int i = 0; i < 10; ++i) {
        std::string a(1 + i % 3, 'a'), b(1 + i / 3, 't');
        exs.push_back(make_example({a + b, {a, b}, 0}));
    }
    auto s = train_test_split(exs, 0.8, 7);
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);
    auto s2 = train_test_split(exs, 0.8, 7);
    CHECK(s.train == s2.train);
    CHECK(s.test == s2.test);
    for (const auto& t : s.test) {
        CHECK(std::find(s.train.begin(), s.train.end(), t) == s.train.end());
    }
    // 71,747 examples (only the arithmetic matters, so reuse one example)
    std::vector<SandhiExample> big(71747, exs[0]);
    auto sb = train_test_split(big, 0.8, 1);
    CHECK(sb.train.size() == 57397);
    CHECK(sb.test.size() == 14350);
}

TEST_CASE("encode and decode examples") {
    auto ex = make_example({"protsAhaH", parts({"pra", "utsAhaH"}), 0});
    std::vector<std::string> corpus{ex.compound.str(), ex.split()};
    auto vocab = Vocabulary::build(corpus);
    auto enc = encode_example(ex, vocab);
    CHECK(enc.input.size() == 9);
    CHECK(enc.locations == std::vector<int>{0, 0, 1, 0, 0, 0, 0, 0, 0});
    CHECK(enc.chars.front() == Vocabulary::kBos);
    CHECK(enc.chars.back() == Vocabulary::kEos);
    CHECK(vocab.decode(enc.chars) == "pra+utsAhaH");
    CHECK(decode_example(enc, vocab) == ex);

    auto ab = make_example({"ab", parts({"a", "b"}), 0});
    auto enc_ab = encode_example(ab, vocab.find('b') ? vocab : Vocabulary::build(std::vector<std::string>{"ab"}));
    CHECK(enc_ab.locations == std::vector<int>{1, 0});

    auto other = Vocabulary::build(std::vector<std::string>{"abc"});
    CHECK(code_of([&] { encode_example(ex, other); }) == ErrorCode::OovCharacter);
}

TEST_CASE("dataset writing round-trips through the parser") {
    std::vector<SandhiExample> exs{make_example({"protsAhaH", parts({"pra", "utsAhaH"}), 0}),
                                   make_example({"tattvam", parts({"tat", "tvam"}), 0})};
    std::ostringstream out;
    write_dataset(out, exs);
    std::istringstream in(out.str());
    auto r = parse_dataset(in, Scheme::Slp1);
    auto l = label_records(r.records);
    CHECK(l.examples == exs);
}
