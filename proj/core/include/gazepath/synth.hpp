#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gazepath/fixation.hpp"
#include "gazepath/gaze_ingest.hpp"
#include "gazepath/stimulus.hpp"

namespace gazepath {

struct SynthConfig {
    double sampling_rate_hz = 60.0;
    double dwell_ms_per_token = 300.0;
    double saccade_ms = 20.0;
    double noise_sd_norm = 0.0;
    std::uint64_t seed = 0;
};

/// Gaze that dwells on each scripted AOI centre (Gaussian jitter of
/// `noise_sd_norm`) joined by linearly interpolated saccade samples.
/// Throws ParameterError when a dwell is shorter than one sample period, an
/// index is out of range, or a saccade would not exceed the I-VT threshold.
GazeStream generate(const StimulusLayout& layout, const std::vector<std::size_t>& script,
                    const SynthConfig& cfg, const ScreenGeometry& geom,
                    const std::string& participant_id = "synthetic",
                    const FilterConfig& filter = {});

/// Smallest centre-to-centre distance between consecutive scripted AOIs for
/// which the saccade clears the velocity threshold at this rate.
double required_separation_deg(const SynthConfig& cfg, const FilterConfig& filter);

/// A random script of up to `length` substantive AOIs in which consecutive
/// entries have different lexemes and centres at least `min_separation_deg` apart.
std::vector<std::size_t> sample_script(const StimulusLayout& layout, std::size_t length,
                                       std::uint64_t seed, const ScreenGeometry& geom,
                                       double min_separation_deg);

/// Deterministic Java-like methods built from common Java lexemes. The first
/// method is always the `testNegativeParseCases` example.
std::vector<MethodSource> synthetic_methods(std::size_t count, std::uint64_t seed);

/// One scripted trial.
struct ScriptSpec {
    std::string participant_id;
    std::string method_id;
    double sampling_rate_hz = 60.0;
    std::vector<std::size_t> tokens;

    bool operator==(const ScriptSpec&) const = default;
};

struct StudyShape {
    std::size_t participants = 27;
    std::size_t methods = 68;
    std::size_t methods_per_participant = 25;
    std::vector<double> sampling_rates{60.0, 120.0};  // assigned round-robin by participant
    std::size_t min_script_length = 4;
    std::size_t max_script_length = 7;
    std::uint64_t seed = 0;
};

struct SyntheticStudy {
    std::vector<MethodSource> methods;
    std::vector<ScriptSpec> scripts;  // ordered by (participant, method)
};

/// Participant p sees methods p*k .. p*k + k - 1 (mod pool size), so every
/// method is seen whenever participants * k >= pool size.
SyntheticStudy synthetic_study(const StudyShape& shape, const CodePane& pane,
                               const ScreenGeometry& geom, const SynthConfig& synth,
                               const FilterConfig& filter);

/// Script spec JSONL: {"participant_id", "method_id", "sampling_rate_hz", "tokens": [...]}.
void write_scripts_jsonl(std::ostream& out, const std::vector<ScriptSpec>& scripts);
std::vector<ScriptSpec> parse_scripts_jsonl(std::istream& in, const std::string& source_name = "<stream>");
std::vector<ScriptSpec> load_scripts(const std::filesystem::path& path);

/// Participant ids are zero-padded ("p01") so lexicographic order is numeric.
std::string synthetic_participant_id(std::size_t index);

}  // namespace gazepath
