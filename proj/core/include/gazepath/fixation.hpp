#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gazepath/gaze_ingest.hpp"

namespace gazepath {

/// I-VT parameters. The defaults are conventional I-VT values, not measured ones.
struct FilterConfig {
    int smoothing_window_samples = 3;
    double velocity_threshold_deg_s = 30.0;
    double min_fixation_duration_ms = 100.0;
    double merge_max_gap_ms = 75.0;
    double merge_max_dist_deg = 0.7;

    bool operator==(const FilterConfig&) const = default;
};

/// Throws ParameterError on an even/zero window or non-positive thresholds.
void validate_filter_config(const FilterConfig& cfg);

struct Fixation {
    std::int64_t t_start_us = 0;
    std::int64_t t_end_us = 0;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    std::size_t sample_count = 0;

    std::int64_t duration_us() const { return t_end_us - t_start_us; }
    bool operator==(const Fixation&) const = default;
};

/// Centered moving median over `window` samples, per coordinate. Invalid samples
/// stay invalid and are excluded from every window; the window shrinks
/// symmetrically at the stream edges.
GazeStream low_pass(const GazeStream& stream, int window);

/// Velocity for each consecutive sample pair (size = samples - 1). A pair that
/// touches an invalid sample has no value. Empty if fewer than 2 valid samples.
std::vector<std::optional<double>> angular_velocity(const GazeStream& stream,
                                                    const ScreenGeometry& geom);

/// Velocity-threshold classification. Each fixation spans from its first sample
/// to one sampling period after its last (clipped at the next sample).
std::vector<Fixation> ivt_classify(const GazeStream& stream, const FilterConfig& cfg,
                                   const ScreenGeometry& geom);

/// Merges neighbours that are close in time and space until nothing changes.
/// Throws ParameterError if the input is not time-ordered and non-overlapping.
std::vector<Fixation> merge_fixations(const std::vector<Fixation>& fixations,
                                      const FilterConfig& cfg, const ScreenGeometry& geom);

/// low_pass -> ivt_classify -> merge_fixations. Windows wider than the stream
/// are narrowed to the largest odd width that fits.
std::vector<Fixation> detect_fixations(const GazeStream& stream, const FilterConfig& cfg,
                                       const ScreenGeometry& geom);

/// Fixations of one trial, as stored in fixation JSONL.
struct TrialFixations {
    std::string participant_id;
    std::string method_id;
    std::vector<Fixation> fixations;
};

/// One line per fixation: {"participant_id", "method_id", "t_start_us", "t_end_us",
/// "x", "y", "sample_count"}. Reading groups lines by trial, preserving order.
void write_fixations_jsonl(std::ostream& out, const std::vector<TrialFixations>& trials);
std::vector<TrialFixations> parse_fixations_jsonl(std::istream& in,
                                                  const std::string& source_name = "<stream>");
std::vector<TrialFixations> load_fixations(const std::filesystem::path& path);

}  // namespace gazepath
