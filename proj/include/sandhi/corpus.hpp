// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// Dataset parsing, curation and gold-label derivation.
//
// A dataset file holds one record per line:
//
//     compound<TAB>c1+c2+...+cn
//
// Records are normalized to SLP1 on parse. Gold split locations are derived
// by aligning the compound against the concatenated constituents (see
// derive_split_locations).

#pragma once

#include "sandhi/translit.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sandhi {

struct RawRecord {
    std::string compound;
    std::vector<std::string> constituents;
    std::size_t line = 0;  // 1-based source line, 0 when synthetic

    std::string split() const;  // constituents joined by '+'

    friend bool operator==(const RawRecord& a, const RawRecord& b) {
        return a.compound == b.compound && a.constituents == b.constituents;
    }
};

struct ParseError {
    std::size_t line = 0;
    std::string reason;
};

struct ParseResult {
    std::vector<RawRecord> records;
    std::vector<ParseError> errors;
};

/// Throws Error(Io) if the file cannot be read. Malformed lines are
/// collected in `errors`; blank lines are skipped.
ParseResult parse_dataset(const std::filesystem::path& path, Scheme scheme);
ParseResult parse_dataset(std::istream& in, Scheme scheme);

/// Optional acceptance predicate applied during curation (for example a
/// dictionary word list). An empty filter accepts everything.
using WordFilter = std::function<bool(const RawRecord&)>;

/// Accepts a record when the compound and every constituent appear in the
/// word list (one SLP1 word per line).
WordFilter word_list_filter(const std::filesystem::path& path);

inline constexpr std::size_t kDefaultMaxLen = 31;

struct Rejection {
    RawRecord record;
    std::string reason;  // duplicate | too_long | non_slp1 | filtered | ambiguous | alignment_failed
};

struct CurationResult {
    std::vector<RawRecord> kept;
    std::vector<Rejection> rejected;
};

/// Removes exact duplicates (first occurrence wins), compounds longer than
/// `max_len` SLP1 characters, records with non-SLP1 text, and records
/// refused by `filter`. Order of the survivors is preserved.
CurationResult curate_with_report(std::span<const RawRecord> records, std::size_t max_len = kDefaultMaxLen,
                                  const WordFilter& filter = {});
std::vector<RawRecord> curate(std::span<const RawRecord> records, std::size_t max_len = kDefaultMaxLen,
                              const WordFilter& filter = {});

/// Bit vector over the compound's characters; 1 marks the character that
/// closes (or absorbs the end of) a non-final constituent.
///
/// Computed from a minimal unit-cost alignment of the compound against the
/// concatenated constituents. A constituent's last character maps to the
/// compound character it aligns with, or, if it was deleted, to the next
/// compound character. Throws AlignmentAmbiguous when two minimal
/// alignments disagree on a mark, and AlignmentFailed when the edit distance
/// exceeds half the compound length or two marks coincide.
std::vector<std::uint8_t> derive_split_locations(std::string_view compound,
                                                 std::span<const std::string> constituents);

/// Unit-cost edit distance; exposed for tests and diagnostics.
std::size_t edit_distance(std::string_view a, std::string_view b);

struct SandhiExample {
    Slp1Text compound;
    std::vector<Slp1Text> constituents;
    std::vector<std::uint8_t> locations;

    std::string split() const;

    friend bool operator==(const SandhiExample&, const SandhiExample&) = default;
};

/// Validates the record and derives its locations; throws on failure.
SandhiExample make_example(const RawRecord& record);

struct LabelingResult {
    std::vector<SandhiExample> examples;
    std::vector<Rejection> rejected;
};

/// make_example over many records, collecting alignment failures.
LabelingResult label_records(std::span<const RawRecord> records);

struct DatasetSplit {
    std::vector<SandhiExample> train;
    std::vector<SandhiExample> test;
    std::uint64_t seed = 0;
};

/// Seeded shuffle followed by a floor(ratio * n) / rest partition.
DatasetSplit train_test_split(std::span<const SandhiExample> examples, double ratio, std::uint64_t seed);

struct EncodedExample {
    std::vector<int> input;      // compound character ids
    std::vector<int> locations;  // 0/1 per compound character
    std::vector<int> chars;      // BOS, split string ids, EOS
};

/// Throws OovCharacter if the vocabulary lacks a character.
EncodedExample encode_example(const SandhiExample& example, const Vocabulary& vocab);
SandhiExample decode_example(const EncodedExample& encoded, const Vocabulary& vocab);

/// Splits "a+b+c" into its constituents.
std::vector<std::string> split_constituents(std::string_view split);

void write_dataset(std::ostream& out, std::span<const SandhiExample> examples);
void write_dataset(const std::filesystem::path& path, std::span<const SandhiExample> examples);
void write_rejects(const std::filesystem::path& path, std::span<const Rejection> rejected);

} // namespace sandhi
