#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <thread>

#include "gazepath/pipeline.hpp"

namespace fs = std::filesystem;
using namespace gazepath;

namespace {

struct Globals {
    std::string config = "gazepath.ini";
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    bool verbose = false;
    bool config_given = false;
};

ExperimentConfig resolve_config(const Globals& g) {
    // The default config file is optional; built-in defaults apply without it.
    auto cfg = g.config_given || fs::exists(g.config) ? load_config(g.config) : ExperimentConfig{};
    const auto base = fs::path(g.config).parent_path();
    for (const auto& o : g.overrides) apply_override(cfg, o, base);
    if (g.seed) {
        cfg.synth.seed = *g.seed;
        cfg.study.seed = *g.seed;
    }
    return cfg;
}

void report(const RunLog& log, const fs::path& output, bool verbose) {
    for (const auto& [name, value] : log.counts) std::fprintf(stderr, "%s: %s = %zu\n", log.command.c_str(), name.c_str(), value);
    if (log.warnings.empty()) return;
    if (verbose) {
        for (const auto& w : log.warnings) std::fprintf(stderr, "warning [%s] %s\n", w.code.c_str(), w.message.c_str());
        return;
    }
    std::map<std::string, std::size_t> by_code;
    for (const auto& w : log.warnings) ++by_code[w.code];
    std::fprintf(stderr, "%s: %zu warning(s):", log.command.c_str(), log.warnings.size());
    for (const auto& [code, n] : by_code) std::fprintf(stderr, " %s=%zu", code.c_str(), n);
    std::fprintf(stderr, " (details in %s)\n", OutputLayout{output}.log(log.command).string().c_str());
}

std::vector<std::pair<SplitKind, fs::path>> baseline_predictions(const ExperimentConfig& cfg, const std::string& name) {
    std::vector<std::pair<SplitKind, fs::path>> out;
    for (const auto kind : cfg.split_kinds) out.emplace_back(kind, OutputLayout{cfg.output}.predictions(name, kind));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gazepath: eye-tracking scanpath dataset and evaluation pipeline"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("-c,--config", g.config, "INI config file")->capture_default_str();
    app.add_option("-j,--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--seed", g.seed, "Override synth.seed and study.seed");
    app.add_option("--set", g.overrides, "Override a config key: section.key=value (repeatable)");
    app.add_flag("-v,--verbose", g.verbose, "Print every warning");

    bool generate_study = false;
    auto* synth = app.add_subcommand("synth", "Render scripted trials to gaze JSONL");
    synth->add_flag("--generate-study", generate_study, "First generate a 27 x 25-of-68 method corpus and scripts");

    auto* fixations = app.add_subcommand("fixations", "Gaze JSONL -> fixations JSONL");
    auto* scanpaths = app.add_subcommand("scanpaths", "Fixations + method corpus -> scanpaths JSONL");
    auto* splits = app.add_subcommand("splits", "Write per-split manifests and prompt files");

    std::string baseline = "markov";
    bool sample = false;
    auto* predict = app.add_subcommand("predict", "Baseline predictions for every test trial");
    predict->add_option("--baseline", baseline, "reading_order | name_first | markov")
        ->check(CLI::IsMember({"reading_order", "name_first", "markov"}))
        ->capture_default_str();
    predict->add_flag("--sample", sample, "Sample Markov transitions instead of greedy decoding");

    std::string ingest_kind;
    std::string completions_name = "completions.txt";
    std::string ingest_out;
    auto* ingest = app.add_subcommand("ingest", "Model completions + manifests -> predictions JSONL");
    ingest->add_option("--kind", ingest_kind, "participant_holdout | method_holdout")->required();
    ingest->add_option("--completions", completions_name, "Completions file name inside each split directory")
        ->capture_default_str();
    ingest->add_option("--out", ingest_out, "Output path (default: <output>/predictions/external_<kind>.jsonl)");

    std::vector<std::string> prediction_args;
    std::string score_baseline;
    auto* score = app.add_subcommand("score", "Score predictions and write report CSVs");
    score->add_option("--predictions", prediction_args, "kind=path (repeatable)");
    score->add_option("--baseline", score_baseline, "Score <output>/predictions/<baseline>_<kind>.jsonl for every kind");

    std::string run_baseline = "markov";
    auto* run = app.add_subcommand("run", "synth --generate-study, fixations, scanpaths, splits, predict, score");
    run->add_option("--baseline", run_baseline, "Baseline used for predict and score")
        ->check(CLI::IsMember({"reading_order", "name_first", "markov"}))
        ->capture_default_str();

    auto* show = app.add_subcommand("config", "Print the effective config");

    CLI11_PARSE(app, argc, argv);
    g.config_given = app.count("--config") > 0;

    try {
        const auto cfg = resolve_config(g);
        const RunOptions opts{g.jobs};
        MarkovDecodeOptions decode{sample, g.seed.value_or(0)};

        if (synth->parsed()) report(cmd_synth(cfg, generate_study, opts), cfg.output, g.verbose);
        if (fixations->parsed()) report(cmd_fixations(cfg, opts), cfg.output, g.verbose);
        if (scanpaths->parsed()) report(cmd_scanpaths(cfg, opts), cfg.output, g.verbose);
        if (splits->parsed()) report(cmd_splits(cfg, opts), cfg.output, g.verbose);
        if (predict->parsed()) report(cmd_predict(cfg, predictor_source_from_string(baseline), opts, decode), cfg.output, g.verbose);
        if (ingest->parsed()) {
            const auto kind = split_kind_from_string(ingest_kind);
            const fs::path out = ingest_out.empty() ? OutputLayout{cfg.output}.predictions("external", kind) : fs::path(ingest_out);
            report(cmd_ingest(cfg, kind, completions_name, out), cfg.output, g.verbose);
        }
        if (score->parsed()) {
            std::vector<std::pair<SplitKind, fs::path>> preds;
            if (!score_baseline.empty()) preds = baseline_predictions(cfg, score_baseline);
            for (const auto& arg : prediction_args) {
                const auto eq = arg.find('=');
                if (eq == std::string::npos) throw ParameterError("--predictions expects kind=path, got '" + arg + "'");
                preds.emplace_back(split_kind_from_string(arg.substr(0, eq)), arg.substr(eq + 1));
            }
            report(cmd_score(cfg, preds, opts), cfg.output, g.verbose);
        }
        if (run->parsed()) {
            report(cmd_synth(cfg, true, opts), cfg.output, g.verbose);
            report(cmd_fixations(cfg, opts), cfg.output, g.verbose);
            report(cmd_scanpaths(cfg, opts), cfg.output, g.verbose);
            report(cmd_splits(cfg, opts), cfg.output, g.verbose);
            report(cmd_predict(cfg, predictor_source_from_string(run_baseline), opts, decode), cfg.output, g.verbose);
            report(cmd_score(cfg, baseline_predictions(cfg, run_baseline), opts), cfg.output, g.verbose);
        }
        if (show->parsed()) write_config(std::cout, cfg, fs::path(g.config).parent_path());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
