// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// Scoring and reports. Location accuracy is word-level: a word counts only
// if its whole bit vector is right. Split accuracy is exact equality of the
// '+'-joined constituents.

#pragma once

#include "sandhi/corpus.hpp"
#include "sandhi/model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sandhi {

/// Throws LengthMismatch on differing counts or a pred/gold pair of
/// different lengths. An empty set scores 0.
double location_accuracy(std::span<const std::vector<std::uint8_t>> preds,
                         std::span<const std::vector<std::uint8_t>> golds);

/// Throws LengthMismatch on differing counts. Surrounding whitespace is
/// ignored; nothing else is normalized.
double split_accuracy(std::span<const std::string> preds, std::span<const std::string> golds);

/// A tool's ranked split candidates for one compound.
struct CandidateList {
    std::string compound;
    std::vector<std::string> candidates;  // best first
    std::vector<double> weights;          // empty or one per candidate
};

/// One JSON object per line: {"compound": ..., "candidates": [...],
/// "weights": [...]} (weights optional). Blank lines are skipped. Throws
/// UnsupportedFormat with the line number on malformed input, Io when the
/// file cannot be read.
std::vector<CandidateList> read_candidate_lists(std::istream& in);
std::vector<CandidateList> read_candidate_lists(const std::filesystem::path& path);
std::string candidate_list_json(const CandidateList& list);

/// A word is correct when its gold split is among the first min(k, size)
/// candidates. Throws Config for k == 0, LengthMismatch on differing counts.
double topk_accuracy(std::span<const CandidateList> lists, std::span<const std::string> golds, std::size_t k);

struct LengthBucket {
    std::size_t lo = 0;
    std::size_t hi = 0;  // inclusive; 0 means open-ended
    std::size_t n = 0;
    std::size_t correct = 0;

    double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n); }
    std::string label() const;  // "6-10", "31+"
    friend bool operator==(const LengthBucket&, const LengthBucket&) = default;
};

/// Lower bucket edges, ascending; the last bucket is open-ended.
std::vector<std::size_t> default_length_edges();  // 1, 6, 11, ..., 31

/// Split accuracy bucketed on compound length (in characters). Every
/// bucket is reported, empty ones included. Throws LengthMismatch, or
/// Config on bad edges.
std::vector<LengthBucket> accuracy_by_length(std::span<const std::string> compounds,
                                             std::span<const std::string> preds, std::span<const std::string> golds,
                                             std::span<const std::size_t> edges);

struct ModelResult {
    std::string name;
    std::size_t n = 0;
    std::optional<double> location_acc;
    double split_acc = 0.0;
    std::vector<LengthBucket> by_length;

    friend bool operator==(const ModelResult&, const ModelResult&) = default;
};

struct TopkResult {
    std::string tool;
    std::size_t k = 1;
    std::size_t n = 0;
    double accuracy = 0.0;

    friend bool operator==(const TopkResult&, const TopkResult&) = default;
};

struct EvalReport {
    std::optional<std::uint64_t> seed;
    std::vector<ModelResult> models;
    std::vector<TopkResult> topk;

    /// Throws Config if an accuracy leaves [0, 1] or bucket counts do not sum
    /// to n.
    void validate() const;
    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Scores model output against gold examples. When the predictions carry
/// no location vectors (models without a location decoder), locations are
/// derived from the predicted split by the same alignment as the gold
/// labels; a split that cannot be aligned counts as a location miss.
ModelResult score_predictions(std::string name, std::span<const SandhiExample> gold,
                              std::span<const Prediction> preds,
                              std::span<const std::size_t> edges);

/// "DD-RNN" for Variant::DdRnn, and so on.
std::string display_name(Variant v);

enum class ReportFormat { Json, Csv, Text };

/// Throws UnsupportedFormat.
ReportFormat parse_report_format(std::string_view name);

/// Deterministic rendering. Text lays out one row per tool (top-k) and model
/// with location and split columns in percent, then per-length tables.
std::string render_report(const EvalReport& report, ReportFormat format);

/// Inverses of the json and csv renderings. Throw UnsupportedFormat.
EvalReport parse_report_json(std::string_view text);
EvalReport parse_report_csv(std::string_view text);

} // namespace sandhi
