// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "app_config.hpp"
#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>

using namespace sandhi;
using namespace sandhi::app;

namespace {

// Config-file plus per-key flags for one subcommand.
class ConfigFlags {
public:
    void attach(CLI::App* cmd, std::initializer_list<KeyGroup> groups,
                const std::map<std::string, std::string>& aliases = {}) {
        cmd->add_option("--config", file_, "config file of 'key = value' lines; flags override it")
            ->check(CLI::ExistingFile);
        for (const auto& k : config_keys()) {
            if (std::find(groups.begin(), groups.end(), k.group) == groups.end()) {
                continue;
            }
            std::string names = "--" + k.key;
            if (auto it = aliases.find(k.key); it != aliases.end() && it->second != names) {
                names = it->second + "," + names;
            }
            const std::string def = defaults_.get(k.key);
            auto* opt = cmd->add_option(names, values_[k.key], k.help + (def.empty() ? "" : " [" + def + "]"));
            opt->group("Config keys")->type_name("VALUE")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            opts_.emplace_back(k.key, opt);
        }
    }

    AppConfig resolve() const {
        AppConfig cfg;
        if (!file_.empty()) {
            cfg.load_file(file_);
        }
        for (const auto& [key, opt] : opts_) {
            if (opt->count() > 0) {
                cfg.set(key, values_.at(key));
            }
        }
        return cfg;
    }

private:
    AppConfig defaults_;
    std::string file_;
    std::map<std::string, std::string> values_;
    std::vector<std::pair<std::string, CLI::Option*>> opts_;
};

std::ostream& write_or_stdout(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") {
        return std::cout;
    }
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw Error(ErrorCode::Io, "cannot write " + path);
    }
    return file;
}

std::vector<std::size_t> parse_ks(const std::string& text) {
    std::vector<std::size_t> ks;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        std::size_t k = 0;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), k);
        if (part.empty() || ec != std::errc() || p != part.data() + part.size() || k == 0) {
            throw Error(ErrorCode::Config, "--k takes positive integers separated by commas, got '" + text + "'");
        }
        ks.push_back(k);
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return ks;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sandhi-forge: Sanskrit sandhi splitting with a double-decoder RNN"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every command");

    // translit
    auto* translit = app.add_subcommand("translit", "convert lines on stdin between transliteration schemes");
    std::string from = "slp1", to = "slp1";
    translit->add_option("--from", from, "input scheme: slp1 | iast | deva")->required();
    translit->add_option("--to", to, "output scheme: slp1 | iast | deva")->required();

    // curate
    auto* curate = app.add_subcommand("curate", "clean, label and split a dataset file");
    ConfigFlags curate_cfg;
    CurateOptions curate_opt;
    std::string rejects, word_list;
    curate->add_option("--in", curate_opt.in, "dataset: compound<TAB>a+b per line")->required();
    curate->add_option("--out-train", curate_opt.out_train, "training split output")->required();
    curate->add_option("--out-test", curate_opt.out_test, "test split output")->required();
    curate->add_option("--rejects", rejects, "rejected records with reasons [<in>.rejects]");
    curate->add_option("--word-list", word_list, "keep only records whose words all appear here");
    curate_cfg.attach(curate, {KeyGroup::Seed, KeyGroup::Data},
                      {{"data.scheme", "--scheme"}, {"data.max_len", "--max-len"}});

    // train
    auto* train = app.add_subcommand("train", "train a model, writing checkpoints after every epoch");
    ConfigFlags train_cfg;
    TrainOptions train_opt;
    std::string phase = "both";
    train->add_option("--train", train_opt.train, "curated training file")->required();
    train->add_option("--checkpoint-dir", train_opt.checkpoint_dir, "output directory")->required();
    train->add_option("--phase", phase, "1, 2 or both")->check(CLI::IsMember({"1", "2", "both"}));
    train->add_flag("--resume", train_opt.resume, "continue from the latest checkpoint in --checkpoint-dir");
    train_cfg.attach(train, {KeyGroup::Seed, KeyGroup::Model, KeyGroup::Train});

    // split
    auto* split = app.add_subcommand("split", "split words read from stdin, one per line");
    SplitOptions split_opt;
    std::string split_scheme = "slp1";
    split->add_option("--model", split_opt.model, "checkpoint or training directory")->required();
    split->add_flag("--locations", split_opt.locations, "also print the split-location bit vector");
    split->add_option("--scheme", split_scheme, "scheme of input and output: slp1 | iast | deva");

    // eval
    auto* eval = app.add_subcommand("eval", "score a model on a test file, or rank lists from other tools");
    std::string eval_model_path, eval_test, eval_out, eval_format, eval_name, eval_gold, eval_ks = "1,10";
    std::vector<std::string> eval_lists_paths, eval_tools;
    auto* o_model = eval->add_option("--model", eval_model_path, "checkpoint or training directory");
    auto* o_test = eval->add_option("--test", eval_test, "curated test file (with --model)");
    eval->add_option("--name", eval_name, "row name in the report [variant name]");
    auto* o_lists = eval->add_option("--lists", eval_lists_paths, "candidate lists, one JSON object per line");
    eval->add_option("--tool", eval_tools, "tool name per --lists file [file stem]");
    auto* o_gold = eval->add_option("--gold", eval_gold, "curated gold file (with --lists)");
    eval->add_option("--k", eval_ks, "comma-separated k values for top-k [1,10]");
    eval->add_option("--out", eval_out, "report file; format from extension [stdout]");
    eval->add_option("--format", eval_format, "json | csv | text [from --out, else text]");
    o_model->needs(o_test);
    o_test->needs(o_model);
    o_lists->needs(o_gold);
    o_gold->needs(o_lists);
    o_model->excludes(o_lists);

    // report
    auto* report = app.add_subcommand("report", "merge and convert evaluation reports");
    std::vector<std::string> report_in;
    std::string report_out, report_format;
    report->add_option("--in", report_in, "json or csv reports")->required();
    report->add_option("--out", report_out, "output file [stdout]");
    report->add_option("--format", report_format, "json | csv | text [from --out, else text]");

    // generate
    auto* generate = app.add_subcommand("generate", "write the toy sandhi dataset");
    ConfigFlags generate_cfg;
    std::string generate_out;
    generate->add_option("--out", generate_out, "dataset output")->required();
    generate_cfg.attach(generate, {KeyGroup::Seed, KeyGroup::Toy});

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "curate, train and evaluate into one directory");
    ConfigFlags pipeline_cfg;
    PipelineOptions pipeline_opt;
    pipeline->add_option("--dataset", pipeline_opt.dataset, "raw dataset file")->required();
    pipeline->add_option("--out", pipeline_opt.out, "output directory")->required();
    pipeline_cfg.attach(pipeline, {KeyGroup::Seed, KeyGroup::Model, KeyGroup::Train, KeyGroup::Data},
                        {});

    app.footer("Exit status: 0 ok, 2 input error, 3 model or checkpoint error, 4 training diverged.\n"
               "SANDHI_FORGE_THREADS caps the worker threads used for inference.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInputError;
    }

    auto report_format_for = [](const std::string& flag, const std::string& out) {
        if (!flag.empty()) {
            return parse_report_format(flag);
        }
        return out.empty() || out == "-" ? ReportFormat::Text : format_for_path(out);
    };

    try {
        if (translit->parsed()) {
            return cmd_translit(parse_scheme(from), parse_scheme(to), std::cin, std::cout, std::cerr);
        }
        if (curate->parsed()) {
            const AppConfig cfg = curate_cfg.resolve();
            if (!rejects.empty()) {
                curate_opt.rejects = rejects;
            }
            if (!word_list.empty()) {
                curate_opt.word_list = word_list;
            }
            const auto s = cmd_curate(cfg, curate_opt);
            std::cerr << "kept " << s.kept << " (train " << s.train << ", test " << s.test << "), rejected "
                      << s.rejected << " -> " << s.rejects.string() << '\n';
            return kOk;
        }
        if (train->parsed()) {
            train_opt.phase = parse_phase_choice(phase);
            cmd_train(train_cfg.resolve(), train_opt, std::cout);
            return kOk;
        }
        if (split->parsed()) {
            split_opt.scheme = parse_scheme(split_scheme);
            split_opt.threads = worker_threads();
            return cmd_split(split_opt, std::cin, std::cout, std::cerr);
        }
        if (eval->parsed()) {
            EvalReport r;
            if (!eval_model_path.empty()) {
                r = eval_model(eval_model_path, eval_test, worker_threads(),
                               eval_name.empty() ? std::nullopt : std::optional<std::string>(eval_name));
            } else if (!eval_lists_paths.empty()) {
                std::vector<fs::path> paths(eval_lists_paths.begin(), eval_lists_paths.end());
                r = eval_lists(paths, eval_tools, eval_gold, parse_ks(eval_ks));
            } else {
                throw Error(ErrorCode::Config, "eval needs --model and --test, or --lists and --gold");
            }
            const ReportFormat fmt = report_format_for(eval_format, eval_out);
            std::ofstream file;
            write_or_stdout(eval_out, file) << render_report(r, fmt);
            if (!eval_out.empty() && eval_out != "-") {
                std::cout << render_report(r, ReportFormat::Text);
            }
            return kOk;
        }
        if (report->parsed()) {
            std::vector<EvalReport> parts;
            for (const auto& p : report_in) {
                parts.push_back(read_report(p));
            }
            const EvalReport merged = merge_reports(parts);
            merged.validate();
            std::ofstream file;
            write_or_stdout(report_out, file) << render_report(merged, report_format_for(report_format, report_out));
            return kOk;
        }
        if (generate->parsed()) {
            cmd_generate(generate_cfg.resolve(), generate_out);
            return kOk;
        }
        if (pipeline->parsed()) {
            pipeline_opt.threads = worker_threads();
            const EvalReport r = cmd_pipeline(pipeline_cfg.resolve(), pipeline_opt, std::cerr);
            std::cout << render_report(r, ReportFormat::Text);
            return kOk;
        }
    } catch (const CommandError& e) {
        std::cerr << "sandhi-forge: " << e.what() << '\n';
        return e.exit_code;
    } catch (const Error& e) {
        std::cerr << "sandhi-forge: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "sandhi-forge: " << e.what() << '\n';
        return kModelError;
    }
    return kOk;
}
