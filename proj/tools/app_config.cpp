// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "app_config.hpp"

#include "sandhi/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sandhi::app {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
    throw Error(ErrorCode::Config, "config key '" + key + "': expected " + want + ", got '" + value + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || p != v.data() + v.size()) {
        bad_value(key, v, "a non-negative integer");
    }
    return out;
}

double to_f64(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) {
        bad_value(key, v, "a finite number");
    }
    return out;
}

// Shortest text that reads back to the same value.
template <typename F>
std::string num(F v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

struct Accessor {
    std::function<void(AppConfig&, const std::string& key, const std::string&)> set;
    std::function<std::string(const AppConfig&)> get;
};

template <typename T>
Accessor size_field(T AppConfig::*section, std::size_t T::*field) {
    return {[=](AppConfig& c, const std::string& k, const std::string& v) { c.*section.*field = to_u64(k, v); },
            [=](const AppConfig& c) { return std::to_string(c.*section.*field); }};
}

template <typename T, typename F>
Accessor real_field(T AppConfig::*section, F T::*field) {
    return {[=](AppConfig& c, const std::string& k, const std::string& v) {
                c.*section.*field = static_cast<F>(to_f64(k, v));
            },
            [=](const AppConfig& c) { return num(c.*section.*field); }};
}

const std::map<std::string, Accessor>& accessors() {
    static const std::map<std::string, Accessor> table = {
        {"seed",
         {[](AppConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); },
          [](const AppConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); }}},
        {"model.variant",
         {[](AppConfig& c, const std::string&, const std::string& v) { c.model.variant = parse_variant(v); },
          [](const AppConfig& c) { return std::string(variant_name(c.model.variant)); }}},
        {"model.embed_dim", size_field(&AppConfig::model, &ModelConfig::embed_dim)},
        {"model.hidden", size_field(&AppConfig::model, &ModelConfig::hidden)},
        {"model.layers", size_field(&AppConfig::model, &ModelConfig::layers)},
        {"model.dropout", real_field(&AppConfig::model, &ModelConfig::dropout)},
        {"model.max_decode_len", size_field(&AppConfig::model, &ModelConfig::max_decode_len)},
        {"train.lr0", real_field(&AppConfig::train, &TrainConfig::lr0)},
        {"train.decay", real_field(&AppConfig::train, &TrainConfig::decay)},
        {"train.batch_size", size_field(&AppConfig::train, &TrainConfig::batch_size)},
        {"train.epochs", size_field(&AppConfig::train, &TrainConfig::epochs)},
        {"train.val_fraction", real_field(&AppConfig::train, &TrainConfig::val_fraction)},
        {"train.clip_norm", real_field(&AppConfig::train, &TrainConfig::clip_norm)},
        {"data.scheme",
         {[](AppConfig& c, const std::string&, const std::string& v) { c.data.scheme = parse_scheme(v); },
          [](const AppConfig& c) { return std::string(scheme_name(c.data.scheme)); }}},
        {"data.max_len", size_field(&AppConfig::data, &DataConfig::max_len)},
        {"data.train_ratio", real_field(&AppConfig::data, &DataConfig::train_ratio)},
        {"toy.compounds", size_field(&AppConfig::toy, &toy::ToyConfig::compounds)},
        {"toy.lexicon_size", size_field(&AppConfig::toy, &toy::ToyConfig::lexicon_size)},
        {"toy.min_morpheme", size_field(&AppConfig::toy, &toy::ToyConfig::min_morpheme)},
        {"toy.max_morpheme", size_field(&AppConfig::toy, &toy::ToyConfig::max_morpheme)},
        {"toy.min_parts", size_field(&AppConfig::toy, &toy::ToyConfig::min_parts)},
        {"toy.max_parts", size_field(&AppConfig::toy, &toy::ToyConfig::max_parts)},
    };
    return table;
}

} // namespace

const std::vector<KeyInfo>& config_keys() {
    static const std::vector<KeyInfo> keys = {
        {"seed", KeyGroup::Seed, "root seed for every random choice"},
        {"model.variant", KeyGroup::Model, "rnn | b-rnn | b-rnn-a | dd-rnn"},
        {"model.embed_dim", KeyGroup::Model, "character embedding size"},
        {"model.hidden", KeyGroup::Model, "LSTM hidden size"},
        {"model.layers", KeyGroup::Model, "stacked LSTM layers"},
        {"model.dropout", KeyGroup::Model, "dropout between layers and on the attentional state"},
        {"model.max_decode_len", KeyGroup::Model, "cap on generated split length"},
        {"train.lr0", KeyGroup::Train, "initial SGD learning rate (each phase)"},
        {"train.decay", KeyGroup::Train, "lr factor when validation perplexity does not improve"},
        {"train.batch_size", KeyGroup::Train, "examples per batch"},
        {"train.epochs", KeyGroup::Train, "epochs per phase"},
        {"train.val_fraction", KeyGroup::Train, "share of the training file held out for validation"},
        {"train.clip_norm", KeyGroup::Train, "global gradient-norm clip; 0 disables"},
        {"data.scheme", KeyGroup::Data, "input transliteration: slp1 | iast | deva"},
        {"data.max_len", KeyGroup::Data, "longest compound kept, in SLP1 characters"},
        {"data.train_ratio", KeyGroup::Data, "train share of the train/test split"},
        {"toy.compounds", KeyGroup::Toy, "toy compounds to generate"},
        {"toy.lexicon_size", KeyGroup::Toy, "toy morphemes"},
        {"toy.min_morpheme", KeyGroup::Toy, "shortest toy morpheme"},
        {"toy.max_morpheme", KeyGroup::Toy, "longest toy morpheme"},
        {"toy.min_parts", KeyGroup::Toy, "fewest morphemes per toy compound"},
        {"toy.max_parts", KeyGroup::Toy, "most morphemes per toy compound"},
    };
    return keys;
}

void AppConfig::set(const std::string& key, const std::string& value) {
    const auto& table = accessors();
    auto it = table.find(key);
    if (it == table.end()) {
        throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
    }
    try {
        it->second.set(*this, key, value);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) {
            throw;
        }
        throw Error(ErrorCode::Config, "config key '" + key + "': " + e.what());
    }
}

std::string AppConfig::get(const std::string& key) const {
    const auto& table = accessors();
    auto it = table.find(key);
    if (it == table.end()) {
        throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
    }
    return it->second.get(*this);
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text, const std::string& where) {
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        line = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        const std::string at = where + ":" + std::to_string(lineno) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::Config, at + "expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        if (!seen.insert(key).second) {
            throw Error(ErrorCode::Config, at + "key '" + key + "' given twice");
        }
        out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
    }
    return out;
}

void AppConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read config file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    for (const auto& [k, v] : parse_config_text(ss.str(), path.string())) {
        try {
            set(k, v);
        } catch (const Error& e) {
            std::string msg = e.what();
            const std::string prefix = std::string(to_string(e.code())) + ": ";
            if (msg.rfind(prefix, 0) == 0) {
                msg.erase(0, prefix.size());
            }
            throw Error(ErrorCode::Config, path.string() + ": " + msg);
        }
    }
}

std::uint64_t AppConfig::require_seed() const {
    if (!seed) {
        throw Error(ErrorCode::Config, "a seed is required (--seed N or 'seed = N' in the config file)");
    }
    return *seed;
}

std::string AppConfig::to_text() const {
    std::string out;
    for (const auto& k : config_keys()) {
        const std::string v = get(k.key);
        if (!v.empty()) {
            out += k.key + " = " + v + "\n";
        }
    }
    return out;
}

} // namespace sandhi::app
