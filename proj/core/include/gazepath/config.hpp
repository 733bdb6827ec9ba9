#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "gazepath/dataset.hpp"
#include "gazepath/fixation.hpp"
#include "gazepath/gaze_ingest.hpp"
#include "gazepath/scanpath.hpp"
#include "gazepath/stimulus.hpp"
#include "gazepath/synth.hpp"

namespace gazepath {

/// Everything a pipeline run needs. Relative paths resolve against the
/// directory of the config file.
struct ExperimentConfig {
    std::filesystem::path corpus = "methods.jsonl";
    std::vector<std::filesystem::path> gaze{"gaze_60hz.jsonl", "gaze_120hz.jsonl"};
    std::filesystem::path scripts = "scripts.jsonl";
    std::filesystem::path output = "out";

    FilterConfig filter;
    CodePane pane;
    ScreenGeometry screen;
    ScanpathConfig scanpath;

    std::vector<std::size_t> n_values{1, 2, 3, 4};
    std::vector<SplitKind> split_kinds{SplitKind::participant_holdout, SplitKind::method_holdout};
    std::optional<std::size_t> prompt_n;  // nullopt: full scanpaths in prompts

    SynthConfig synth;
    StudyShape study;
};

/// INI-style file: [paths] [filter] [pane] [screen] [scanpath] [experiment]
/// [synth] [study] sections of key = value lines. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                              const std::string& source_name = "<stream>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one "section.key=value" assignment, as if it appeared in the file.
void apply_override(ExperimentConfig& cfg, const std::string& assignment, const std::filesystem::path& base_dir);

/// Throws ParameterError if any section violates its invariants.
void validate_config(const ExperimentConfig& cfg);

/// Renders a config that parse_config reads back unchanged (paths relative to `base_dir`).
void write_config(std::ostream& out, const ExperimentConfig& cfg, const std::filesystem::path& base_dir);

}  // namespace gazepath
