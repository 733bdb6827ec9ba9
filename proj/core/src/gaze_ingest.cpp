#include "gazepath/gaze_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace gazepath {

using nlohmann::json;

Warnings validate_geometry(const ScreenGeometry& geom) {
    if (geom.width_px <= 0 || geom.height_px <= 0 || !(geom.width_mm > 0) ||
        !(geom.height_mm > 0) || !(geom.viewer_distance_mm > 0)) {
        throw ValidationError("screen geometry fields must be strictly positive");
    }
    Warnings warnings;
    const double px_aspect = static_cast<double>(geom.width_px) / geom.height_px;
    const double mm_aspect = geom.width_mm / geom.height_mm;
    if (std::abs(px_aspect - mm_aspect) / mm_aspect > 0.05) {
        warnings.push_back({"aspect-mismatch",
                            "pixel aspect " + std::to_string(px_aspect) +
                                " differs from physical aspect " + std::to_string(mm_aspect) +
                                " by more than 5%"});
    }
    return warnings;
}

double visual_angle_deg(double dx_mm, double dy_mm, const ScreenGeometry& geom) {
    const double d = std::hypot(dx_mm, dy_mm);
    return 2.0 * std::atan(d / (2.0 * geom.viewer_distance_mm)) * 180.0 / M_PI;
}

double normalized_distance_deg(double x0, double y0, double x1, double y1,
                               const ScreenGeometry& geom) {
    return visual_angle_deg((x1 - x0) * geom.width_mm, (y1 - y0) * geom.height_mm, geom);
}

double pixel_distance_deg(double x0, double y0, double x1, double y1,
                          const ScreenGeometry& geom) {
    return visual_angle_deg((x1 - x0) * geom.mm_per_px_x(), (y1 - y0) * geom.mm_per_px_y(),
                            geom);
}

bool GazeSample::operator==(const GazeSample& o) const {
    if (t_us != o.t_us || valid != o.valid) return false;
    return !valid || (x == o.x && y == o.y);
}

std::size_t GazeStream::valid_count() const {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [](const GazeSample& s) { return s.valid; }));
}

namespace {

std::string where(const std::string& source, std::size_t line_no) {
    return source + ":" + std::to_string(line_no) + ": ";
}

ScreenGeometry parse_screen(const json& j) {
    ScreenGeometry g;
    g.width_px = j.at("width_px").get<int>();
    g.height_px = j.at("height_px").get<int>();
    g.width_mm = j.at("width_mm").get<double>();
    g.height_mm = j.at("height_mm").get<double>();
    g.viewer_distance_mm = j.at("viewer_distance_mm").get<double>();
    return g;
}

json screen_to_json(const ScreenGeometry& g) {
    return json{{"width_px", g.width_px},
                {"height_px", g.height_px},
                {"width_mm", g.width_mm},
                {"height_mm", g.height_mm},
                {"viewer_distance_mm", g.viewer_distance_mm}};
}

double coordinate(const json& rec, const char* key) {
    const auto it = rec.find(key);
    if (it == rec.end() || it->is_null()) return std::numeric_limits<double>::quiet_NaN();
    return it->get<double>();
}

}  // namespace

GazeRecording parse_gaze_jsonl(std::istream& in, const std::string& source_name) {
    GazeRecording rec;
    bool have_header = false;
    std::map<std::pair<std::string, std::string>, GazeStream> trials;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(where(source_name, line_no) + "malformed JSON: " + e.what());
        }

        if (!have_header) {
            if (!j.is_object() || !j.contains("header")) {
                throw ParseError(where(source_name, line_no) + "first record must be the header");
            }
            try {
                const auto& h = j.at("header");
                rec.header.sampling_rate_hz = h.at("sampling_rate_hz").get<double>();
                if (h.contains("screen")) rec.header.screen = parse_screen(h.at("screen"));
            } catch (const json::exception& e) {
                throw ParseError(where(source_name, line_no) + "bad header: " + e.what());
            }
            if (!(rec.header.sampling_rate_hz > 0)) {
                throw ValidationError(where(source_name, line_no) + "sampling_rate_hz must be > 0");
            }
            validate_geometry(rec.header.screen);
            have_header = true;
            continue;
        }

        GazeSample s;
        std::string pid, mid;
        try {
            pid = j.at("participant_id").get<std::string>();
            mid = j.at("method_id").get<std::string>();
            s.t_us = j.at("t_us").get<std::int64_t>();
            s.valid = j.at("valid").get<bool>();
            s.x = coordinate(j, "x");
            s.y = coordinate(j, "y");
        } catch (const json::exception& e) {
            throw ParseError(where(source_name, line_no) + "bad sample record: " + e.what());
        }
        if (s.valid) {
            const auto in_range = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
            if (!in_range(s.x) || !in_range(s.y)) {
                throw ValidationError(where(source_name, line_no) +
                                      "valid sample outside [0,1]: x=" + std::to_string(s.x) +
                                      " y=" + std::to_string(s.y));
            }
        } else {
            s.x = s.y = std::numeric_limits<double>::quiet_NaN();
        }

        auto& stream = trials[{pid, mid}];
        if (stream.samples.empty()) {
            stream.participant_id = pid;
            stream.method_id = mid;
            stream.sampling_rate_hz = rec.header.sampling_rate_hz;
        } else if (s.t_us <= stream.samples.back().t_us) {
            throw ValidationError(where(source_name, line_no) + "non-monotonic timestamp in trial (" +
                                  pid + ", " + mid + ")");
        }
        stream.samples.push_back(s);
    }

    rec.streams.reserve(trials.size());
    for (auto& [key, stream] : trials) rec.streams.push_back(std::move(stream));
    return rec;
}

GazeRecording load_gaze_streams(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open gaze file " + path.string());
    return parse_gaze_jsonl(in, path.string());
}

void write_gaze_jsonl(std::ostream& out, const GazeFileHeader& header,
                      const std::vector<GazeStream>& streams) {
    json h{{"header",
            {{"sampling_rate_hz", header.sampling_rate_hz}, {"screen", screen_to_json(header.screen)}}}};
    out << h.dump() << '\n';
    for (const auto& stream : streams) {
        for (const auto& s : stream.samples) {
            json r;
            r["participant_id"] = stream.participant_id;
            r["method_id"] = stream.method_id;
            r["t_us"] = s.t_us;
            r["x"] = s.valid ? json(s.x) : json(nullptr);
            r["y"] = s.valid ? json(s.y) : json(nullptr);
            r["valid"] = s.valid;
            out << r.dump() << '\n';
        }
    }
}

Warnings validate_stream(const GazeStream& stream) {
    Warnings warnings;
    const std::string trial = "(" + stream.participant_id + ", " + stream.method_id + ")";
    const auto& samples = stream.samples;

    if (stream.sampling_rate_hz > 0 && samples.size() >= 2) {
        std::vector<std::int64_t> gaps;
        gaps.reserve(samples.size() - 1);
        for (std::size_t i = 1; i < samples.size(); ++i) {
            gaps.push_back(samples[i].t_us - samples[i - 1].t_us);
        }
        auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
        std::nth_element(gaps.begin(), mid, gaps.end());
        const double median_gap = static_cast<double>(*mid);
        const double expected_gap = 1e6 / stream.sampling_rate_hz;
        if (std::abs(median_gap - expected_gap) > 0.2 * expected_gap) {
            warnings.push_back({"rate-mismatch", trial + ": median gap " +
                                                     std::to_string(median_gap) + " us vs declared " +
                                                     std::to_string(stream.sampling_rate_hz) + " Hz"});
        }
    }

    if (!samples.empty()) {
        const std::size_t invalid = samples.size() - stream.valid_count();
        if (2 * invalid > samples.size()) {
            warnings.push_back({"mostly-invalid", trial + ": " + std::to_string(invalid) + " of " +
                                                      std::to_string(samples.size()) +
                                                      " samples invalid"});
        }
    }

    const std::int64_t duration = samples.empty() ? 0 : samples.back().t_us - samples.front().t_us;
    if (duration < 1'000'000) {
        warnings.push_back({"short-trial", trial + ": duration " + std::to_string(duration) + " us"});
    }
    return warnings;
}

}  // namespace gazepath
