// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// Flat dotted-key configuration shared by the sandhi-forge commands.
// A config file holds "key = value" lines ('#' starts a comment); command
// line flags of the same name override it.

#pragma once

#include "sandhi/model.hpp"
#include "sandhi/toy_language.hpp"
#include "sandhi/training.hpp"
#include "sandhi/translit.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sandhi::app {

struct DataConfig {
    Scheme scheme = Scheme::Slp1;
    std::size_t max_len = kDefaultMaxLen;
    double train_ratio = 0.8;
};

struct AppConfig {
    std::optional<std::uint64_t> seed;
    ModelConfig model;
    TrainConfig train;
    DataConfig data;
    toy::ToyConfig toy;

    /// Throws Config naming the key for unknown keys or unparsable values.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;

    /// Applies a config file. Throws Io if unreadable, Config on bad lines,
    /// unknown or repeated keys.
    void load_file(const std::filesystem::path& path);

    /// Throws Config when no seed was given.
    std::uint64_t require_seed() const;

    /// Every key with its current value, in key-table order; loadable by
    /// load_file.
    std::string to_text() const;
};

/// Key groups, used to attach only the relevant flags to each command.
enum class KeyGroup { Seed, Model, Train, Data, Toy };

struct KeyInfo {
    std::string key;
    KeyGroup group;
    std::string help;
};

const std::vector<KeyInfo>& config_keys();

/// Parses "key=value" lines from text; `where` prefixes error messages.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text, const std::string& where);

} // namespace sandhi::app
