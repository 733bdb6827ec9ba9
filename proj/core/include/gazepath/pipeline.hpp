#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gazepath/config.hpp"
#include "gazepath/predictors.hpp"

namespace gazepath {

/// Output locations under ExperimentConfig::output.
struct OutputLayout {
    std::filesystem::path root;

    std::filesystem::path fixations() const { return root / "fixations.jsonl"; }
    std::filesystem::path scanpaths() const { return root / "scanpaths.jsonl"; }
    std::filesystem::path layouts() const { return root / "layouts.jsonl"; }
    std::filesystem::path splits(SplitKind kind) const { return root / "splits" / std::string(to_string(kind)); }
    std::filesystem::path predictions(std::string_view predictor, SplitKind kind) const;
    std::filesystem::path scores() const { return root / "scores.csv"; }
    std::filesystem::path report() const { return root / "report.csv"; }
    std::filesystem::path report_long() const { return root / "report_long.csv"; }
    std::filesystem::path histogram(SplitKind kind, std::size_t n) const;
    std::filesystem::path log(std::string_view command) const;
};

/// Directory name of split `index` ("003_p04"); unsafe id characters become '_'.
std::string split_dir_name(std::size_t index, const std::string& test_id);

/// Warnings and counters gathered by one command; also written to its log file.
struct RunLog {
    std::string command;
    Warnings warnings;
    std::vector<std::pair<std::string, std::size_t>> counts;

    void count(std::string name, std::size_t value) { counts.emplace_back(std::move(name), value); }
};

struct RunOptions {
    std::size_t jobs = 1;
};

/// Layouts from the method corpus plus scanpaths from the output directory.
Corpus load_corpus(const ExperimentConfig& cfg);

/// With `generate_study`, first writes a synthetic method corpus and script spec
/// to the configured paths. Then renders every script to gaze, one file per
/// study sampling rate (paths.gaze[i] holds study.sampling_rates[i]).
RunLog cmd_synth(const ExperimentConfig& cfg, bool generate_study, const RunOptions& opts = {});

/// Gaze files -> fixations.jsonl.
RunLog cmd_fixations(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// fixations.jsonl + method corpus -> scanpaths.jsonl (empty trials excluded).
RunLog cmd_scanpaths(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// One directory per split with manifest.json, train.txt, val.txt (fine-tuning
/// prompts) and test.txt (inference prompts).
RunLog cmd_splits(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Baseline predictions for every test trial of every split, at max(n_values).
RunLog cmd_predict(const ExperimentConfig& cfg, PredictorSource baseline, const RunOptions& opts = {},
                   const MarkovDecodeOptions& decode = {});

/// Pairs each split's completions file with its manifest and writes one
/// predictions JSONL for the experiment.
RunLog cmd_ingest(const ExperimentConfig& cfg, SplitKind kind, const std::string& completions_name,
                  const std::filesystem::path& out);

/// Scores each experiment's predictions against the reference scanpaths and
/// writes scores.csv, report.csv, report_long.csv and per-(experiment, n) histograms.
RunLog cmd_score(const ExperimentConfig& cfg,
                 const std::vector<std::pair<SplitKind, std::filesystem::path>>& predictions,
                 const RunOptions& opts = {});

}  // namespace gazepath
