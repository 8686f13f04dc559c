// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "sandhi/corpus.hpp"

#include "sandhi/error.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <unordered_set>

namespace sandhi {

namespace {

std::string join(std::span<const std::string> parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out.push_back(kSeparator);
        }
        out += parts[i];
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \r\n");
    return s.substr(first, last - first + 1);
}

} // namespace

std::string RawRecord::split() const { return join(constituents); }

std::vector<std::string> split_constituents(std::string_view split) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = split.find(kSeparator, start);
        parts.emplace_back(split.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return parts;
}

// ---------------------------------------------------------------------------
// Parsing

ParseResult parse_dataset(std::istream& in, Scheme scheme) {
    ParseResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) {
            continue;
        }
        const auto tab = text.find('\t');
        if (tab == std::string_view::npos) {
            result.errors.push_back({line_no, "missing TAB separator"});
            continue;
        }
        const std::string_view compound = trim(text.substr(0, tab));
        const std::string_view split = trim(text.substr(tab + 1));
        if (compound.empty()) {
            result.errors.push_back({line_no, "empty compound"});
            continue;
        }
        RawRecord record;
        record.line = line_no;
        try {
            if (scheme == Scheme::Slp1) {
                // Character validity is a curation concern for SLP1 input.
                record.compound = std::string(compound);
                record.constituents = split_constituents(split);
            } else {
                record.compound = to_slp1(compound, scheme);
                for (auto& part : split_constituents(split)) {
                    record.constituents.push_back(to_slp1(part, scheme));
                }
            }
        } catch (const UnknownCodePointError& e) {
            result.errors.push_back({line_no, e.what()});
            continue;
        }
        if (record.constituents.size() < 2) {
            result.errors.push_back({line_no, "fewer than two constituents"});
            continue;
        }
        if (std::any_of(record.constituents.begin(), record.constituents.end(),
                        [](const std::string& c) { return c.empty(); })) {
            result.errors.push_back({line_no, "empty constituent"});
            continue;
        }
        result.records.push_back(std::move(record));
    }
    return result;
}

ParseResult parse_dataset(const std::filesystem::path& path, Scheme scheme) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read dataset '" + path.string() + "'");
    }
    return parse_dataset(in, scheme);
}

WordFilter word_list_filter(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read word list '" + path.string() + "'");
    }
    auto words = std::make_shared<std::unordered_set<std::string>>();
    std::string line;
    while (std::getline(in, line)) {
        if (auto w = trim(line); !w.empty()) {
            words->emplace(w);
        }
    }
    return [words](const RawRecord& r) {
        if (!words->contains(r.compound)) {
            return false;
        }
        return std::all_of(r.constituents.begin(), r.constituents.end(),
                           [&](const std::string& c) { return words->contains(c); });
    };
}

// ---------------------------------------------------------------------------
// Curation

CurationResult curate_with_report(std::span<const RawRecord> records, std::size_t max_len,
                                  const WordFilter& filter) {
    CurationResult result;
    std::set<std::pair<std::string, std::vector<std::string>>> seen;
    for (const auto& r : records) {
        const bool valid = Slp1Text::is_valid(r.compound) && r.compound.find(kSeparator) == std::string::npos &&
                           std::all_of(r.constituents.begin(), r.constituents.end(), [](const std::string& c) {
                               return !c.empty() && Slp1Text::is_valid(c) &&
                                      c.find(kSeparator) == std::string::npos;
                           });
        if (!valid) {
            result.rejected.push_back({r, "non_slp1"});
            continue;
        }
        if (r.compound.size() > max_len) {
            result.rejected.push_back({r, "too_long"});
            continue;
        }
        if (!seen.emplace(r.compound, r.constituents).second) {
            result.rejected.push_back({r, "duplicate"});
            continue;
        }
        if (filter && !filter(r)) {
            result.rejected.push_back({r, "filtered"});
            continue;
        }
        result.kept.push_back(r);
    }
    return result;
}

std::vector<RawRecord> curate(std::span<const RawRecord> records, std::size_t max_len, const WordFilter& filter) {
    return curate_with_report(records, max_len, filter).kept;
}

// ---------------------------------------------------------------------------
// Alignment

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        prev[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1] ? 1u : 0u)});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::vector<std::uint8_t> derive_split_locations(std::string_view compound,
                                                 std::span<const std::string> constituents) {
    if (constituents.size() < 2) {
        throw Error(ErrorCode::AlignmentFailed, "need at least two constituents for '" + std::string(compound) + "'");
    }
    const std::string target = [&] {
        std::string s;
        for (const auto& c : constituents) {
            s += c;
        }
        return s;
    }();
    const std::size_t n = compound.size();
    const std::size_t m = target.size();
    if (n == 0) {
        throw Error(ErrorCode::AlignmentFailed, "empty compound");
    }

    // prefix[i][j]: distance between compound[:i] and target[:j];
    // suffix[i][j]: distance between compound[i:] and target[j:].
    const std::size_t w = m + 1;
    std::vector<std::size_t> prefix((n + 1) * w), suffix((n + 1) * w);
    auto P = [&](std::size_t i, std::size_t j) -> std::size_t& { return prefix[i * w + j]; };
    auto S = [&](std::size_t i, std::size_t j) -> std::size_t& { return suffix[i * w + j]; };
    auto sub = [&](std::size_t i, std::size_t j) -> std::size_t { return compound[i] != target[j] ? 1 : 0; };

    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = 0; j <= m; ++j) {
            if (i == 0 || j == 0) {
                P(i, j) = i + j;
            } else {
                P(i, j) = std::min({P(i - 1, j) + 1, P(i, j - 1) + 1, P(i - 1, j - 1) + sub(i - 1, j - 1)});
            }
        }
    }
    for (std::size_t i = n + 1; i-- > 0;) {
        for (std::size_t j = m + 1; j-- > 0;) {
            if (i == n || j == m) {
                S(i, j) = (n - i) + (m - j);
            } else {
                S(i, j) = std::min({S(i + 1, j) + 1, S(i, j + 1) + 1, S(i + 1, j + 1) + sub(i, j)});
            }
        }
    }
    const std::size_t total = P(n, m);
    if (2 * total > n) {
        throw Error(ErrorCode::AlignmentFailed, "edit distance " + std::to_string(total) + " too large for '" +
                                                    std::string(compound) + "'");
    }

    std::vector<std::uint8_t> marks(n, 0);
    std::size_t boundary = 0;
    for (std::size_t k = 0; k + 1 < constituents.size(); ++k) {
        boundary += constituents[k].size();
        const std::size_t j = boundary - 1;
        // Every compound index the boundary character takes over all
        // minimal alignments.
        std::set<std::size_t> candidates;
        for (std::size_t i = 0; i < n; ++i) {
            if (P(i, j) + sub(i, j) + S(i + 1, j + 1) == total) {
                candidates.insert(i);
            }
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (P(i, j) + 1 + S(i, j + 1) == total) {
                candidates.insert(std::min(i, n - 1));
            }
        }
        if (candidates.size() != 1) {
            throw Error(ErrorCode::AlignmentAmbiguous,
                        "constituent " + std::to_string(k + 1) + " of '" + std::string(compound) + "' has " +
                            std::to_string(candidates.size()) + " candidate split positions");
        }
        const std::size_t at = *candidates.begin();
        if (marks[at] != 0) {
            throw Error(ErrorCode::AlignmentFailed, "two split marks coincide in '" + std::string(compound) + "'");
        }
        marks[at] = 1;
    }
    return marks;
}

// ---------------------------------------------------------------------------
// Examples

std::string SandhiExample::split() const {
    std::string out;
    for (std::size_t i = 0; i < constituents.size(); ++i) {
        if (i > 0) {
            out.push_back(kSeparator);
        }
        out += constituents[i].str();
    }
    return out;
}

SandhiExample make_example(const RawRecord& record) {
    SandhiExample ex;
    ex.compound = Slp1Text::parse(record.compound);
    for (const auto& c : record.constituents) {
        ex.constituents.push_back(Slp1Text::parse(c));
    }
    ex.locations = derive_split_locations(record.compound, record.constituents);
    return ex;
}

LabelingResult label_records(std::span<const RawRecord> records) {
    LabelingResult result;
    result.examples.reserve(records.size());
    for (const auto& r : records) {
        try {
            result.examples.push_back(make_example(r));
        } catch (const Error& e) {
            result.rejected.push_back(
                {r, e.code() == ErrorCode::AlignmentAmbiguous ? "ambiguous" : "alignment_failed"});
        }
    }
    return result;
}

DatasetSplit train_test_split(std::span<const SandhiExample> examples, double ratio, std::uint64_t seed) {
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_train = static_cast<std::size_t>(ratio * static_cast<double>(examples.size()) + 1e-9);

    DatasetSplit split;
    split.seed = seed;
    split.train.reserve(n_train);
    split.test.reserve(examples.size() - n_train);
    for (std::size_t k = 0; k < order.size(); ++k) {
        (k < n_train ? split.train : split.test).push_back(examples[order[k]]);
    }
    return split;
}

EncodedExample encode_example(const SandhiExample& example, const Vocabulary& vocab) {
    EncodedExample enc;
    enc.input = vocab.encode(example.compound.str());
    enc.locations.assign(example.locations.begin(), example.locations.end());
    enc.chars.push_back(Vocabulary::kBos);
    for (int id : vocab.encode(example.split())) {
        enc.chars.push_back(id);
    }
    enc.chars.push_back(Vocabulary::kEos);
    return enc;
}

SandhiExample decode_example(const EncodedExample& encoded, const Vocabulary& vocab) {
    SandhiExample ex;
    ex.compound = Slp1Text::parse(vocab.decode(encoded.input));
    for (const auto& part : split_constituents(vocab.decode(encoded.chars))) {
        ex.constituents.push_back(Slp1Text::parse(part));
    }
    ex.locations.assign(encoded.locations.begin(), encoded.locations.end());
    return ex;
}

void write_dataset(std::ostream& out, std::span<const SandhiExample> examples) {
    for (const auto& ex : examples) {
        out << ex.compound.str() << '\t' << ex.split() << '\n';
    }
}

void write_dataset(const std::filesystem::path& path, std::span<const SandhiExample> examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    }
    write_dataset(out, examples);
}

void write_rejects(const std::filesystem::path& path, std::span<const Rejection> rejected) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    }
    for (const auto& r : rejected) {
        out << r.reason << '\t' << r.record.line << '\t' << r.record.compound << '\t' << r.record.split() << '\n';
    }
}

} // namespace sandhi
