// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include "sandhi/corpus.hpp"
#include "sandhi/toy_language.hpp"
#include "sandhi/training.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace sandhi::app {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

std::string bits(std::span<const std::uint8_t> v) {
    std::string s;
    for (auto b : v) {
        s += b ? '1' : '0';
    }
    return s;
}

std::string split_from_slp1(const std::string& split, Scheme to) {
    std::string out;
    const auto parts = split_constituents(split);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        out += (i ? std::string(1, kSeparator) : std::string()) + from_slp1(parts[i], to);
    }
    return out;
}

bool same_model(const ModelConfig& a, const ModelConfig& b) {
    return a.variant == b.variant && a.embed_dim == b.embed_dim && a.hidden == b.hidden && a.layers == b.layers &&
           a.dropout == b.dropout && a.max_decode_len == b.max_decode_len;
}

bool same_train(const TrainConfig& a, const TrainConfig& b) {
    return a.lr0 == b.lr0 && a.decay == b.decay && a.batch_size == b.batch_size && a.epochs == b.epochs &&
           a.seed == b.seed && a.val_fraction == b.val_fraction && a.clip_norm == b.clip_norm;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    }
}

} // namespace

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Diverged:
        return kDiverged;
    case ErrorCode::ShapeMismatch:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::NotScalar:
    case ErrorCode::DetachedFromTape:
    case ErrorCode::MissingGrad:
    case ErrorCode::VersionMismatch:
    case ErrorCode::Checkpoint:
        return kModelError;
    default:
        return kInputError;
    }
}

std::size_t worker_threads() {
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("SANDHI_FORGE_THREADS");
    if (env == nullptr || *env == '\0') {
        return hw;
    }
    std::size_t n = 0;
    const std::string_view v(env);
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || p != v.data() + v.size() || n == 0) {
        throw Error(ErrorCode::Config, "SANDHI_FORGE_THREADS must be a positive integer, got '" + std::string(v) + "'");
    }
    return n;
}

fs::path resolve_checkpoint(const fs::path& path) {
    for (const fs::path& p : {path, path / "phase2", path / "phase1"}) {
        if (fs::exists(p / "manifest.txt")) {
            return p;
        }
    }
    throw CommandError(kModelError, ErrorCode::Checkpoint, "no checkpoint found at " + path.string());
}

LoadedCheckpoint load_model(const fs::path& path) {
    const fs::path dir = resolve_checkpoint(path);
    try {
        return load_checkpoint(dir);
    } catch (const Error& e) {
        throw CommandError(kModelError, e.code(), e.what());
    }
}

int cmd_translit(Scheme from, Scheme to, std::istream& in, std::ostream& out, std::ostream& err) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        try {
            out << from_slp1(to_slp1(line, from), to) << '\n';
        } catch (const UnknownCodePointError& e) {
            out.flush();
            err << "line " << lineno << ", position " << e.position() << ": " << e.what() << '\n';
            return kInputError;
        }
    }
    return kOk;
}

CurateSummary cmd_curate(const AppConfig& cfg, const CurateOptions& opt) {
    const std::uint64_t seed = cfg.require_seed();
    if (!fs::exists(opt.in)) {
        throw Error(ErrorCode::Io, "dataset not found: " + opt.in.string());
    }
    const ParseResult parsed = parse_dataset(opt.in, cfg.data.scheme);
    std::vector<Rejection> rejected;
    for (const auto& e : parsed.errors) {
        RawRecord r;
        r.line = e.line;
        rejected.push_back({r, "malformed"});
    }
    WordFilter filter;
    if (opt.word_list) {
        filter = word_list_filter(*opt.word_list);
    }
    CurationResult cur = curate_with_report(parsed.records, cfg.data.max_len, filter);
    LabelingResult lab = label_records(cur.kept);
    rejected.insert(rejected.end(), cur.rejected.begin(), cur.rejected.end());
    rejected.insert(rejected.end(), lab.rejected.begin(), lab.rejected.end());
    std::stable_sort(rejected.begin(), rejected.end(),
                     [](const Rejection& a, const Rejection& b) { return a.record.line < b.record.line; });

    if (lab.examples.empty()) {
        throw Error(ErrorCode::EmptyDataset, "no usable records in " + opt.in.string());
    }
    const DatasetSplit split = train_test_split(lab.examples, cfg.data.train_ratio, seed);
    for (const auto& p : {opt.out_train, opt.out_test}) {
        if (p.has_parent_path()) {
            ensure_dir(p.parent_path());
        }
    }
    write_dataset(opt.out_train, split.train);
    write_dataset(opt.out_test, split.test);
    CurateSummary s;
    s.rejects = opt.rejects ? *opt.rejects : fs::path(opt.in.string() + ".rejects");
    write_rejects(s.rejects, rejected);
    s.kept = lab.examples.size();
    s.train = split.train.size();
    s.test = split.test.size();
    s.rejected = rejected.size();
    return s;
}

PhaseChoice parse_phase_choice(const std::string& s) {
    if (s == "1") {
        return PhaseChoice::One;
    }
    if (s == "2") {
        return PhaseChoice::Two;
    }
    if (s == "both") {
        return PhaseChoice::Both;
    }
    throw Error(ErrorCode::Config, "--phase must be 1, 2 or both, got '" + s + "'");
}

std::vector<SandhiExample> read_examples(const fs::path& path) {
    if (!fs::exists(path)) {
        throw Error(ErrorCode::Io, "dataset not found: " + path.string());
    }
    const ParseResult parsed = parse_dataset(path, Scheme::Slp1);
    if (!parsed.errors.empty()) {
        const auto& e = parsed.errors.front();
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ":" + std::to_string(e.line) + ": " + e.reason +
                                                      " (" + std::to_string(parsed.errors.size()) +
                                                      " bad lines; run curate first)");
    }
    LabelingResult lab = label_records(parsed.records);
    if (!lab.rejected.empty()) {
        const auto& r = lab.rejected.front();
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ":" + std::to_string(r.record.line) + ": " +
                                                      r.reason + " (" + std::to_string(lab.rejected.size()) +
                                                      " records fail alignment; run curate first)");
    }
    return std::move(lab.examples);
}

void cmd_train(const AppConfig& cfg, const TrainOptions& opt, std::ostream& metrics) {
    TrainConfig tc = cfg.train;
    tc.seed = cfg.require_seed();
    tc.validate();
    const Variant variant = cfg.model.variant;
    const bool two_phase = has_location_decoder(variant);
    if (opt.phase == PhaseChoice::One && !two_phase) {
        throw Error(ErrorCode::Config, "phase 1 trains the location decoder, which " +
                                           std::string(variant_name(variant)) + " does not have");
    }

    const auto examples = read_examples(opt.train);
    const auto tv = split_validation(examples, tc.val_fraction, tc.seed);

    const fs::path p1 = opt.checkpoint_dir / "phase1";
    const fs::path p2 = opt.checkpoint_dir / "phase2";
    ensure_dir(opt.checkpoint_dir);

    std::optional<LoadedCheckpoint> start;
    auto load_checked = [&](const fs::path& dir) {
        auto ck = load_model(dir);
        if (!same_model(ck.meta.model, cfg.model) || !same_train(ck.meta.train, tc)) {
            throw Error(ErrorCode::Config, dir.string() +
                                               " was written with different model or training settings; "
                                               "use the same config or a fresh --checkpoint-dir");
        }
        return ck;
    };
    if (opt.resume) {
        for (const auto& dir : {p2, p1}) {
            if (fs::exists(dir / "manifest.txt")) {
                start.emplace(load_checked(dir));
                break;
            }
        }
    } else if (opt.phase == PhaseChoice::Two && two_phase) {
        if (!fs::exists(p1 / "manifest.txt")) {
            throw CommandError(kModelError, ErrorCode::Checkpoint,
                               "phase 2 of " + std::string(variant_name(variant)) + " starts from " + p1.string() +
                                   ", which does not exist; run phase 1 first");
        }
        start.emplace(load_checked(p1));
        if (start->meta.state.epochs_done < tc.epochs) {
            throw CommandError(kModelError, ErrorCode::Checkpoint,
                               p1.string() + " is mid-phase; finish it with --phase 1 --resume");
        }
    }

    Vocabulary vocab;
    std::optional<DdRnnModel> model;
    PhaseState state;
    bool fresh = !start.has_value();
    if (start) {
        vocab = start->meta.vocab;
        model.emplace(std::move(start->model));
        state = start->meta.state;
        if (state.phase == Phase::Location && state.epochs_done >= tc.epochs && opt.phase != PhaseChoice::One) {
            state = PhaseState::start(Phase::Character, tc);
        }
    } else {
        vocab = vocabulary_for(examples);
        ModelConfig mc = cfg.model;
        mc.vocab_size = vocab.size();
        mc.validate();
        model.emplace(mc, tc.seed);
        state = PhaseState::start(two_phase && opt.phase != PhaseChoice::Two ? Phase::Location : Phase::Character, tc);
    }

    const auto train = encode_all(tv.train, vocab);
    const auto val = encode_all(tv.val, vocab);

    const fs::path metrics_path = opt.checkpoint_dir / "metrics.jsonl";
    std::ofstream log(metrics_path, fresh ? std::ios::trunc : std::ios::app);
    if (!log) {
        throw Error(ErrorCode::Io, "cannot write " + metrics_path.string());
    }
    auto run = [&](Phase phase) {
        const fs::path dir = phase == Phase::Location ? p1 : p2;
        EpochHook hook = [&](const DdRnnModel& m, const PhaseState& st, const EpochMetrics& e) {
            save_checkpoint(dir, m, vocab, tc, st);
            const std::string line = e.to_json();
            log << line << '\n';
            log.flush();
            metrics << line << '\n';
            metrics.flush();
        };
        train_phase(*model, state, train, val, tc, hook);
        save_checkpoint(dir, *model, vocab, tc, state);
    };

    if (state.phase == Phase::Location) {
        run(Phase::Location);
        if (opt.phase == PhaseChoice::One) {
            return;
        }
        state = PhaseState::start(Phase::Character, tc);
    }
    run(Phase::Character);
}

int cmd_split(const SplitOptions& opt, std::istream& in, std::ostream& out, std::ostream& err) {
    const LoadedCheckpoint ck = load_model(opt.model);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(trim(line));
    }
    std::vector<std::string> words;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        std::string w;
        try {
            w = to_slp1(lines[i], opt.scheme);
        } catch (const UnknownCodePointError& e) {
            err << "line " << i + 1 << ": " << e.what() << '\n';
            return kInputError;
        }
        for (char c : w) {
            if (!ck.meta.vocab.find(c)) {
                err << "line " << i + 1 << ": character '" << c << "' of " << lines[i]
                    << " is not in the model's vocabulary\n";
                return kInputError;
            }
        }
        words.push_back(std::move(w));
    }
    const auto preds = predict_parallel(ck.model, ck.meta.vocab, words, opt.threads);
    std::size_t k = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            out << '\n';
            continue;
        }
        const Prediction& p = preds[k];
        out << split_from_slp1(p.split, opt.scheme);
        if (opt.locations) {
            std::vector<std::uint8_t> loc = p.locations;
            if (loc.empty()) {
                try {
                    loc = derive_split_locations(words[k], split_constituents(p.split));
                } catch (const Error&) {
                    loc.clear();
                }
            }
            out << '\t' << (loc.empty() ? std::string("-") : bits(loc));
        }
        out << '\n';
        if (p.truncated) {
            err << "line " << i + 1 << ": output hit the decode length cap\n";
        }
        ++k;
    }
    return kOk;
}

EvalReport eval_model(const fs::path& model, const fs::path& test, std::size_t threads,
                      const std::optional<std::string>& name) {
    const LoadedCheckpoint ck = load_model(model);
    const auto gold = read_examples(test);
    std::vector<std::string> words;
    std::vector<std::size_t> known;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const std::string& w = gold[i].compound.str();
        if (std::all_of(w.begin(), w.end(), [&](char c) { return ck.meta.vocab.find(c).has_value(); })) {
            words.push_back(w);
            known.push_back(i);
        }
    }
    // words with characters the model never saw score as wrong
    std::vector<Prediction> preds(gold.size());
    for (auto& p : preds) {
        p.empty = true;
    }
    const auto got = predict_parallel(ck.model, ck.meta.vocab, words, threads);
    for (std::size_t j = 0; j < known.size(); ++j) {
        preds[known[j]] = got[j];
    }
    EvalReport r;
    r.seed = ck.meta.train.seed;
    const auto edges = default_length_edges();
    r.models.push_back(score_predictions(name ? *name : display_name(ck.meta.model.variant), gold, preds, edges));
    return r;
}

EvalReport eval_lists(const std::vector<fs::path>& lists, const std::vector<std::string>& tools,
                      const fs::path& gold_path, const std::vector<std::size_t>& ks) {
    if (!tools.empty() && tools.size() != lists.size()) {
        throw Error(ErrorCode::Config, "give one --tool name per --lists file");
    }
    if (ks.empty()) {
        throw Error(ErrorCode::Config, "--k needs at least one value");
    }
    const auto gold = read_examples(gold_path);
    std::vector<std::string> golds;
    for (const auto& g : gold) {
        golds.push_back(g.split());
    }
    EvalReport r;
    for (std::size_t t = 0; t < lists.size(); ++t) {
        std::map<std::string, CandidateList> by_word;
        for (auto& l : read_candidate_lists(lists[t])) {
            const std::string key = l.compound;
            if (!by_word.emplace(key, std::move(l)).second) {
                throw Error(ErrorCode::UnsupportedFormat, lists[t].string() + ": two lists for " + key);
            }
        }
        std::vector<CandidateList> aligned;
        for (const auto& g : gold) {
            auto it = by_word.find(g.compound.str());
            aligned.push_back(it == by_word.end() ? CandidateList{g.compound.str(), {}, {}} : it->second);
        }
        const std::string tool = tools.empty() ? lists[t].stem().string() : tools[t];
        for (auto k : ks) {
            r.topk.push_back({tool, k, gold.size(), topk_accuracy(aligned, golds, k)});
        }
    }
    return r;
}

ReportFormat format_for_path(const fs::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".csv") {
        return ReportFormat::Csv;
    }
    if (ext == ".txt" || ext == ".text") {
        return ReportFormat::Text;
    }
    return ReportFormat::Json;
}

EvalReport read_report(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read report " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    switch (format_for_path(path)) {
    case ReportFormat::Csv:
        return parse_report_csv(ss.str());
    case ReportFormat::Json:
        return parse_report_json(ss.str());
    case ReportFormat::Text:
        break;
    }
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": text reports cannot be read back; use json or csv");
}

EvalReport merge_reports(const std::vector<EvalReport>& reports) {
    EvalReport out;
    bool first = true;
    for (const auto& r : reports) {
        if (first) {
            out.seed = r.seed;
            first = false;
        } else if (out.seed != r.seed) {
            out.seed.reset();
        }
        out.topk.insert(out.topk.end(), r.topk.begin(), r.topk.end());
        out.models.insert(out.models.end(), r.models.begin(), r.models.end());
    }
    return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        ensure_dir(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
}

void cmd_generate(const AppConfig& cfg, const fs::path& out) {
    toy::ToyConfig tc = cfg.toy;
    tc.seed = cfg.require_seed();
    const LabelingResult lab = label_records(toy::generate(tc));
    if (out.has_parent_path()) {
        ensure_dir(out.parent_path());
    }
    write_dataset(out, lab.examples);
}

EvalReport cmd_pipeline(const AppConfig& cfg, const PipelineOptions& opt, std::ostream& log) {
    cfg.require_seed();
    if (!fs::exists(opt.dataset)) {
        throw Error(ErrorCode::Io, "dataset not found: " + opt.dataset.string());
    }
    ensure_dir(opt.out);
    write_text_file(opt.out / "config.txt", cfg.to_text());

    CurateOptions co;
    co.in = opt.dataset;
    co.out_train = opt.out / "data" / "train.tsv";
    co.out_test = opt.out / "data" / "test.tsv";
    co.rejects = opt.out / "data" / "rejects.tsv";
    const CurateSummary cs = cmd_curate(cfg, co);
    log << "curate: " << cs.kept << " kept (" << cs.train << " train, " << cs.test << " test), " << cs.rejected
        << " rejected\n";

    TrainOptions to;
    to.train = co.out_train;
    to.checkpoint_dir = opt.out / "ckpt";
    cmd_train(cfg, to, log);

    EvalReport report = eval_model(to.checkpoint_dir, co.out_test, opt.threads);
    report.seed = cfg.seed;
    const fs::path reports = opt.out / "reports";
    write_text_file(reports / "report.json", render_report(report, ReportFormat::Json));
    write_text_file(reports / "report.csv", render_report(report, ReportFormat::Csv));
    write_text_file(reports / "report.txt", render_report(report, ReportFormat::Text));
    return report;
}

} // namespace sandhi::app
