#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gazepath/errors.hpp"

namespace gazepath {

/// Physical display and viewing distance; converts normalized gaze to visual angle.
struct ScreenGeometry {
    int width_px = 1920;
    int height_px = 1080;
    double width_mm = 531.4;  // 24" 16:9 panel
    double height_mm = 298.9;
    double viewer_distance_mm = 650.0;

    double mm_per_px_x() const { return width_mm / width_px; }
    double mm_per_px_y() const { return height_mm / height_px; }

    bool operator==(const ScreenGeometry&) const = default;
};

/// Throws ValidationError if any field is non-positive. Returns a warning when
/// the pixel and millimetre aspect ratios disagree by more than 5%.
Warnings validate_geometry(const ScreenGeometry& geom);

/// Angle subtended at the eye by a planar displacement centred on the line of sight.
double visual_angle_deg(double dx_mm, double dy_mm, const ScreenGeometry& geom);

/// Visual angle between two normalized display points.
double normalized_distance_deg(double x0, double y0, double x1, double y1,
                               const ScreenGeometry& geom);

/// Visual angle between two pixel positions.
double pixel_distance_deg(double x0, double y0, double x1, double y1,
                          const ScreenGeometry& geom);

struct GazeSample {
    std::int64_t t_us = 0;
    double x = 0.0;  // normalized [0,1]; NaN when invalid
    double y = 0.0;
    bool valid = false;

    bool operator==(const GazeSample& o) const;
};

/// All samples recorded for one (participant, method) trial.
struct GazeStream {
    std::string participant_id;
    std::string method_id;
    double sampling_rate_hz = 60.0;
    std::vector<GazeSample> samples;

    std::size_t valid_count() const;
};

struct GazeFileHeader {
    double sampling_rate_hz = 60.0;
    ScreenGeometry screen;
};

/// Contents of one gaze JSONL file: the header line plus every trial.
struct GazeRecording {
    GazeFileHeader header;
    std::vector<GazeStream> streams;  // sorted by (participant_id, method_id)
};

GazeRecording load_gaze_streams(const std::filesystem::path& path);
GazeRecording parse_gaze_jsonl(std::istream& in, const std::string& source_name = "<stream>");

/// Writes the header line and then every stream's samples in order.
void write_gaze_jsonl(std::ostream& out, const GazeFileHeader& header,
                      const std::vector<GazeStream>& streams);

/// Rate mismatch, mostly-invalid, and short-trial checks. Never mutates.
Warnings validate_stream(const GazeStream& stream);

}  // namespace gazepath
