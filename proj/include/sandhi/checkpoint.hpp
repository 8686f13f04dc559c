// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// A checkpoint is a directory:
//   manifest.txt  key=value lines: format, code version, seed, training
//                 progress, model and train config, vocabulary, and one
//                 "param.N=name shape" line per parameter
//   weights.bin   the parameters as little-endian f32, in manifest order
//
// Saving the same state twice gives byte-identical files.

#pragma once

#include "sandhi/model.hpp"
#include "sandhi/training.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace sandhi {

inline constexpr int kCheckpointFormat = 1;

/// git describe of the build, or "unknown".
std::string_view code_version() noexcept;

struct CheckpointMeta {
    ModelConfig model;
    TrainConfig train;
    Vocabulary vocab;
    PhaseState state;  // progress at save time
    std::string code_version;
};

struct LoadedCheckpoint {
    CheckpointMeta meta;
    DdRnnModel model;
};

/// Creates `dir` if needed and overwrites its files. Throws Io.
void save_checkpoint(const std::filesystem::path& dir, const DdRnnModel& model, const Vocabulary& vocab,
                     const TrainConfig& train, const PhaseState& state);

/// Throws Io (missing/unreadable), VersionMismatch (format), ShapeMismatch
/// (parameter list disagrees with the recorded config) or Checkpoint
/// (malformed manifest, truncated weights).
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

/// Raw manifest entries, for inspection and tests.
std::map<std::string, std::string> read_manifest(const std::filesystem::path& dir);

} // namespace sandhi
