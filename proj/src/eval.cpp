// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "sandhi/eval.hpp"

#include "sandhi/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sandhi {

using nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

void check_counts(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw Error(ErrorCode::LengthMismatch,
                    std::string(what) + ": " + std::to_string(a) + " predictions for " + std::to_string(b) + " gold items");
    }
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::vector<std::string> split_on(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.append(width - s.size(), ' ');
    }
    return s;
}

std::string lpad(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.insert(0, width - s.size(), ' ');
    }
    return s;
}

} // namespace

double location_accuracy(std::span<const std::vector<std::uint8_t>> preds,
                         std::span<const std::vector<std::uint8_t>> golds) {
    check_counts(preds.size(), golds.size(), "location accuracy");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].size() != golds[i].size()) {
            throw Error(ErrorCode::LengthMismatch, "location vector " + std::to_string(i) + " has length " +
                                                       std::to_string(preds[i].size()) + ", gold has " +
                                                       std::to_string(golds[i].size()));
        }
        correct += preds[i] == golds[i];
    }
    return ratio(correct, preds.size());
}

double split_accuracy(std::span<const std::string> preds, std::span<const std::string> golds) {
    check_counts(preds.size(), golds.size(), "split accuracy");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        correct += trim(preds[i]) == trim(golds[i]);
    }
    return ratio(correct, preds.size());
}

std::vector<CandidateList> read_candidate_lists(std::istream& in) {
    std::vector<CandidateList> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        const auto where = "candidate list line " + std::to_string(lineno) + ": ";
        CandidateList list;
        try {
            const auto j = ordered_json::parse(line);
            list.compound = j.at("compound").get<std::string>();
            list.candidates = j.at("candidates").get<std::vector<std::string>>();
            if (j.contains("weights")) {
                list.weights = j.at("weights").get<std::vector<double>>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::UnsupportedFormat, where + e.what());
        }
        if (!list.weights.empty() && list.weights.size() != list.candidates.size()) {
            throw Error(ErrorCode::UnsupportedFormat, where + "weights and candidates differ in length");
        }
        std::vector<std::string> sorted = list.candidates;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw Error(ErrorCode::UnsupportedFormat, where + "a candidate appears twice");
        }
        (void)Slp1Text::parse(list.compound);  // throws UnknownCodePoint
        out.push_back(std::move(list));
    }
    return out;
}

std::vector<CandidateList> read_candidate_lists(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read " + path.string());
    }
    return read_candidate_lists(in);
}

std::string candidate_list_json(const CandidateList& list) {
    ordered_json j;
    j["compound"] = list.compound;
    j["candidates"] = list.candidates;
    if (!list.weights.empty()) {
        j["weights"] = list.weights;
    }
    return j.dump();
}

double topk_accuracy(std::span<const CandidateList> lists, std::span<const std::string> golds, std::size_t k) {
    if (k == 0) {
        throw Error(ErrorCode::Config, "top-k needs k >= 1");
    }
    check_counts(lists.size(), golds.size(), "top-k accuracy");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < lists.size(); ++i) {
        const auto& c = lists[i].candidates;
        const auto end = c.begin() + static_cast<std::ptrdiff_t>(std::min(k, c.size()));
        const auto gold = trim(golds[i]);
        correct += std::any_of(c.begin(), end, [&](const std::string& s) { return trim(s) == gold; });
    }
    return ratio(correct, lists.size());
}

std::string LengthBucket::label() const {
    return hi == 0 ? std::to_string(lo) + "+" : std::to_string(lo) + "-" + std::to_string(hi);
}

std::vector<std::size_t> default_length_edges() {
    return {1, 6, 11, 16, 21, 26, 31};
}

std::vector<LengthBucket> accuracy_by_length(std::span<const std::string> compounds,
                                             std::span<const std::string> preds, std::span<const std::string> golds,
                                             std::span<const std::size_t> edges) {
    check_counts(preds.size(), golds.size(), "length buckets");
    check_counts(preds.size(), compounds.size(), "length buckets");
    if (edges.empty() || edges.front() != 1 || !std::is_sorted(edges.begin(), edges.end()) ||
        std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
        throw Error(ErrorCode::Config, "length bucket edges must be strictly increasing and start at 1");
    }
    std::vector<LengthBucket> buckets;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        buckets.push_back({edges[i], i + 1 < edges.size() ? edges[i + 1] - 1 : 0, 0, 0});
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const std::size_t len = compounds[i].size();
        auto it = std::upper_bound(edges.begin(), edges.end(), len);
        // length 0 with edges starting at 1 lands in the first bucket
        auto& b = buckets[it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1];
        ++b.n;
        b.correct += trim(preds[i]) == trim(golds[i]);
    }
    return buckets;
}

void EvalReport::validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    for (const auto& m : models) {
        if (!in_unit(m.split_acc) || (m.location_acc && !in_unit(*m.location_acc))) {
            throw Error(ErrorCode::Config, "accuracy of " + m.name + " is outside [0, 1]");
        }
        std::size_t total = 0;
        for (const auto& b : m.by_length) {
            if (b.correct > b.n) {
                throw Error(ErrorCode::Config, m.name + " bucket " + b.label() + " has more correct than total");
            }
            total += b.n;
        }
        if (!m.by_length.empty() && total != m.n) {
            throw Error(ErrorCode::Config, m.name + " length buckets cover " + std::to_string(total) + " of " +
                                               std::to_string(m.n) + " words");
        }
    }
    for (const auto& t : topk) {
        if (!in_unit(t.accuracy) || t.k == 0) {
            throw Error(ErrorCode::Config, "bad top-k entry for " + t.tool);
        }
    }
}

ModelResult score_predictions(std::string name, std::span<const SandhiExample> gold,
                              std::span<const Prediction> preds, std::span<const std::size_t> edges) {
    check_counts(preds.size(), gold.size(), name.c_str());
    ModelResult r;
    r.name = std::move(name);
    r.n = gold.size();

    std::vector<std::string> compounds, pred_splits, gold_splits;
    std::size_t loc_correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        compounds.push_back(gold[i].compound.str());
        pred_splits.push_back(preds[i].split);
        gold_splits.push_back(gold[i].split());

        std::vector<std::uint8_t> loc = preds[i].locations;
        if (loc.empty() && !preds[i].empty) {
            try {
                loc = derive_split_locations(compounds.back(), split_on(preds[i].split, '+'));
            } catch (const Error&) {
                loc.clear();
            }
        }
        loc_correct += loc == gold[i].locations;
    }
    r.location_acc = ratio(loc_correct, gold.size());
    r.split_acc = split_accuracy(pred_splits, gold_splits);
    r.by_length = accuracy_by_length(compounds, pred_splits, gold_splits, edges);
    return r;
}

std::string display_name(Variant v) {
    std::string s(variant_name(v));
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "json") {
        return ReportFormat::Json;
    }
    if (name == "csv") {
        return ReportFormat::Csv;
    }
    if (name == "text" || name == "txt") {
        return ReportFormat::Text;
    }
    throw Error(ErrorCode::UnsupportedFormat, "unknown report format '" + std::string(name) + "' (json, csv, text)");
}

namespace {

std::string render_json(const EvalReport& r) {
    ordered_json j;
    j["seed"] = r.seed ? ordered_json(*r.seed) : ordered_json(nullptr);
    j["models"] = ordered_json::array();
    for (const auto& m : r.models) {
        ordered_json mj;
        mj["name"] = m.name;
        mj["n"] = m.n;
        mj["location_acc"] = m.location_acc ? ordered_json(*m.location_acc) : ordered_json(nullptr);
        mj["split_acc"] = m.split_acc;
        mj["by_length"] = ordered_json::array();
        for (const auto& b : m.by_length) {
            mj["by_length"].push_back({{"lo", b.lo}, {"hi", b.hi}, {"n", b.n}, {"correct", b.correct}});
        }
        j["models"].push_back(std::move(mj));
    }
    j["topk"] = ordered_json::array();
    for (const auto& t : r.topk) {
        j["topk"].push_back({{"tool", t.tool}, {"k", t.k}, {"n", t.n}, {"accuracy", t.accuracy}});
    }
    return j.dump(2) + "\n";
}

constexpr const char* kCsvHeader = "kind,name,k,lo,hi,n,correct,location_acc,split_acc";

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

std::string render_csv(const EvalReport& r) {
    std::ostringstream o;
    o << kCsvHeader << '\n';
    if (r.seed) {
        o << "seed,," << *r.seed << ",,,,,,\n";
    }
    for (const auto& t : r.topk) {
        o << "topk," << csv_field(t.tool) << ',' << t.k << ",,," << t.n << ",,," << fmt17(t.accuracy) << '\n';
    }
    for (const auto& m : r.models) {
        o << "model," << csv_field(m.name) << ",,,," << m.n << ",,"
          << (m.location_acc ? fmt17(*m.location_acc) : "") << ',' << fmt17(m.split_acc) << '\n';
        for (const auto& b : m.by_length) {
            o << "bucket," << csv_field(m.name) << ",," << b.lo << ',' << b.hi << ',' << b.n << ',' << b.correct
              << ",,\n";
        }
    }
    return o.str();
}

std::string render_text(const EvalReport& r) {
    std::size_t w = 5;
    for (const auto& t : r.topk) {
        w = std::max(w, t.tool.size() + 12);
    }
    for (const auto& m : r.models) {
        w = std::max(w, m.name.size());
    }
    w += 2;
    std::ostringstream o;
    if (r.seed) {
        o << "seed " << *r.seed << "\n\n";
    }
    o << pad("Model", w) << lpad("Location", 10) << lpad("Split", 8) << lpad("n", 8) << '\n';
    for (const auto& t : r.topk) {
        o << pad(t.tool + " (Top " + std::to_string(t.k) + ")", w) << lpad("-", 10) << lpad(pct(t.accuracy), 8)
          << lpad(std::to_string(t.n), 8) << '\n';
    }
    for (const auto& m : r.models) {
        o << pad(m.name, w) << lpad(m.location_acc ? pct(*m.location_acc) : "-", 10) << lpad(pct(m.split_acc), 8)
          << lpad(std::to_string(m.n), 8) << '\n';
    }
    for (const auto& m : r.models) {
        if (m.by_length.empty()) {
            continue;
        }
        o << '\n' << m.name << " split accuracy by compound length\n";
        for (const auto& b : m.by_length) {
            o << "  " << pad(b.label(), 7) << lpad(b.n == 0 ? "-" : pct(b.accuracy()), 7)
              << lpad(std::to_string(b.correct) + "/" + std::to_string(b.n), 12) << '\n';
        }
    }
    return o.str();
}

std::size_t to_size(const std::string& s, const char* what) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw Error(ErrorCode::UnsupportedFormat, std::string("report csv: bad ") + what + " '" + s + "'");
    }
    return v;
}

double to_double(const std::string& s, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw Error(ErrorCode::UnsupportedFormat, std::string("report csv: bad ") + what + " '" + s + "'");
    }
    return v;
}

// Minimal RFC 4180 record splitter; rows never span lines here.
std::vector<std::string> csv_row(std::string_view line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

} // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
    switch (format) {
    case ReportFormat::Json:
        return render_json(report);
    case ReportFormat::Csv:
        return render_csv(report);
    case ReportFormat::Text:
        return render_text(report);
    }
    return {};
}

EvalReport parse_report_json(std::string_view text) {
    EvalReport r;
    try {
        const auto j = ordered_json::parse(text);
        if (!j.at("seed").is_null()) {
            r.seed = j.at("seed").get<std::uint64_t>();
        }
        for (const auto& mj : j.at("models")) {
            ModelResult m;
            m.name = mj.at("name").get<std::string>();
            m.n = mj.at("n").get<std::size_t>();
            if (!mj.at("location_acc").is_null()) {
                m.location_acc = mj.at("location_acc").get<double>();
            }
            m.split_acc = mj.at("split_acc").get<double>();
            for (const auto& bj : mj.at("by_length")) {
                m.by_length.push_back({bj.at("lo").get<std::size_t>(), bj.at("hi").get<std::size_t>(),
                                       bj.at("n").get<std::size_t>(), bj.at("correct").get<std::size_t>()});
            }
            r.models.push_back(std::move(m));
        }
        for (const auto& tj : j.at("topk")) {
            r.topk.push_back({tj.at("tool").get<std::string>(), tj.at("k").get<std::size_t>(),
                              tj.at("n").get<std::size_t>(), tj.at("accuracy").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::UnsupportedFormat, std::string("report json: ") + e.what());
    }
    return r;
}

EvalReport parse_report_csv(std::string_view text) {
    EvalReport r;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || trim(line) != kCsvHeader) {
        throw Error(ErrorCode::UnsupportedFormat, "report csv: missing header");
    }
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        const auto f = csv_row(trim(line));
        if (f.size() != 9) {
            throw Error(ErrorCode::UnsupportedFormat, "report csv: expected 9 fields in '" + line + "'");
        }
        const std::string& kind = f[0];
        if (kind == "seed") {
            r.seed = to_size(f[2], "seed");
        } else if (kind == "topk") {
            r.topk.push_back({f[1], to_size(f[2], "k"), to_size(f[5], "n"), to_double(f[8], "accuracy")});
        } else if (kind == "model") {
            ModelResult m;
            m.name = f[1];
            m.n = to_size(f[5], "n");
            if (!f[7].empty()) {
                m.location_acc = to_double(f[7], "location_acc");
            }
            m.split_acc = to_double(f[8], "split_acc");
            r.models.push_back(std::move(m));
        } else if (kind == "bucket") {
            if (r.models.empty() || r.models.back().name != f[1]) {
                throw Error(ErrorCode::UnsupportedFormat, "report csv: bucket row before its model row");
            }
            r.models.back().by_length.push_back(
                {to_size(f[3], "lo"), to_size(f[4], "hi"), to_size(f[5], "n"), to_size(f[6], "correct")});
        } else {
            throw Error(ErrorCode::UnsupportedFormat, "report csv: unknown row kind '" + kind + "'");
        }
    }
    return r;
}

} // namespace sandhi
