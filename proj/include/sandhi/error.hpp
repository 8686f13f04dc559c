// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// Error taxonomy shared by all modules. Each error carries a code so the
// CLI can map it onto a process exit status.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sandhi {

enum class ErrorCode {
    // input / data errors (exit 2)
    UnknownCodePoint,
    EmptyCorpus,
    EmptyInput,
    EmptyDataset,
    OovCharacter,
    AlignmentAmbiguous,
    AlignmentFailed,
    Io,
    Config,
    LengthMismatch,
    UnsupportedFormat,
    // engine errors
    ShapeMismatch,
    IndexOutOfRange,
    NotScalar,
    DetachedFromTape,
    MissingGrad,
    // model / checkpoint errors (exit 3)
    VersionMismatch,
    Checkpoint,
    // training (exit 4)
    Diverged,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Transliteration failure at a code-point offset of the input.
class UnknownCodePointError : public Error {
public:
    UnknownCodePointError(std::size_t position, char32_t code_point);

    std::size_t position() const noexcept { return position_; }
    char32_t code_point() const noexcept { return code_point_; }

private:
    std::size_t position_;
    char32_t code_point_;
};

} // namespace sandhi
