// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "app_config.hpp"

#include "sandhi/checkpoint.hpp"
#include "sandhi/error.hpp"
#include "sandhi/eval.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sandhi::app {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kInputError = 2, kModelError = 3, kDiverged = 4 };

/// Input problems map to 2, model and checkpoint problems to 3, divergence
/// to 4.
int exit_code_for(ErrorCode code) noexcept;

/// Raised for failures whose exit code does not follow from the error code
/// alone (an unreadable checkpoint is a model error even though it is Io).
struct CommandError : Error {
    CommandError(int exit, ErrorCode code, const std::string& message) : Error(code, message), exit_code(exit) {}
    int exit_code;
};

/// SANDHI_FORGE_THREADS if set (must be a positive integer), else the
/// hardware concurrency.
std::size_t worker_threads();

/// A checkpoint directory, or a training directory holding phase2/ or
/// phase1/; the latest phase wins.
fs::path resolve_checkpoint(const fs::path& path);
LoadedCheckpoint load_model(const fs::path& path);

int cmd_translit(Scheme from, Scheme to, std::istream& in, std::ostream& out, std::ostream& err);

struct CurateOptions {
    fs::path in;
    fs::path out_train;
    fs::path out_test;
    std::optional<fs::path> rejects;  // default: <in>.rejects
    std::optional<fs::path> word_list;
};
struct CurateSummary {
    std::size_t kept = 0;
    std::size_t train = 0;
    std::size_t test = 0;
    std::size_t rejected = 0;
    fs::path rejects;
};
CurateSummary cmd_curate(const AppConfig& cfg, const CurateOptions& opt);

enum class PhaseChoice { One, Two, Both };
PhaseChoice parse_phase_choice(const std::string& s);

struct TrainOptions {
    fs::path train;
    fs::path checkpoint_dir;
    PhaseChoice phase = PhaseChoice::Both;
    bool resume = false;
};
/// Writes <dir>/phase{1,2}/ checkpoints after every epoch and appends one
/// JSON line per epoch to <dir>/metrics.jsonl and to `metrics`.
void cmd_train(const AppConfig& cfg, const TrainOptions& opt, std::ostream& metrics);

struct SplitOptions {
    fs::path model;
    Scheme scheme = Scheme::Slp1;
    bool locations = false;
    std::size_t threads = 1;
};
int cmd_split(const SplitOptions& opt, std::istream& in, std::ostream& out, std::ostream& err);

/// Reads a curated dataset file; throws UnsupportedFormat if any line is
/// malformed or unalignable.
std::vector<SandhiExample> read_examples(const fs::path& path);

EvalReport eval_model(const fs::path& model, const fs::path& test, std::size_t threads,
                      const std::optional<std::string>& name = std::nullopt);

/// Lists are matched to gold words by compound; a gold word without a list
/// counts as wrong.
EvalReport eval_lists(const std::vector<fs::path>& lists, const std::vector<std::string>& tools,
                      const fs::path& gold, const std::vector<std::size_t>& ks);

/// Format from the extension (.json, .csv, .txt/.text), else json.
ReportFormat format_for_path(const fs::path& path);
EvalReport read_report(const fs::path& path);
/// Concatenates models and top-k rows; the seed survives only if all agree.
EvalReport merge_reports(const std::vector<EvalReport>& reports);
void write_text_file(const fs::path& path, const std::string& text);

void cmd_generate(const AppConfig& cfg, const fs::path& out);

struct PipelineOptions {
    fs::path dataset;
    fs::path out;
    std::size_t threads = 1;
};
/// out/config.txt, out/data/{train,test,rejects}.tsv, out/ckpt/phase{1,2}/,
/// out/ckpt/metrics.jsonl, out/reports/report.{json,csv,txt}.
EvalReport cmd_pipeline(const AppConfig& cfg, const PipelineOptions& opt, std::ostream& log);

} // namespace sandhi::app
