// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "sandhi/error.hpp"

#include <cstdio>

namespace sandhi {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnknownCodePoint: return "UnknownCodePoint";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::OovCharacter: return "OovCharacter";
        case ErrorCode::AlignmentAmbiguous: return "AlignmentAmbiguous";
        case ErrorCode::AlignmentFailed: return "AlignmentFailed";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Config: return "Config";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::NotScalar: return "NotScalar";
        case ErrorCode::DetachedFromTape: return "DetachedFromTape";
        case ErrorCode::MissingGrad: return "MissingGrad";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::Checkpoint: return "Checkpoint";
        case ErrorCode::Diverged: return "Diverged";
    }
    return "Unknown";
}

namespace {

std::string describe(std::size_t position, char32_t cp) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "U+%04X at position %zu", static_cast<unsigned>(cp), position);
    return buf;
}

} // namespace

UnknownCodePointError::UnknownCodePointError(std::size_t position, char32_t code_point)
    : Error(ErrorCode::UnknownCodePoint, describe(position, code_point)),
      position_(position),
      code_point_(code_point) {}

} // namespace sandhi
