#include "gazepath/fixation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"

namespace gazepath {

void validate_filter_config(const FilterConfig& cfg) {
    if (cfg.smoothing_window_samples < 1 || cfg.smoothing_window_samples % 2 == 0) {
        throw ParameterError("smoothing_window_samples must be odd and >= 1");
    }
    if (!(cfg.velocity_threshold_deg_s > 0)) {
        throw ParameterError("velocity_threshold_deg_s must be > 0");
    }
    if (!(cfg.min_fixation_duration_ms > 0)) {
        throw ParameterError("min_fixation_duration_ms must be > 0");
    }
    if (cfg.merge_max_gap_ms < 0 || cfg.merge_max_dist_deg < 0) {
        throw ParameterError("merge thresholds must be >= 0");
    }
}

namespace {

double median_of(std::vector<double>& v) {
    const auto n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::int64_t period_us(const GazeStream& stream) {
    return static_cast<std::int64_t>(std::llround(1e6 / stream.sampling_rate_hz));
}

}  // namespace

GazeStream low_pass(const GazeStream& stream, int window) {
    if (window < 1 || window % 2 == 0) throw ParameterError("low_pass window must be odd and >= 1");
    const auto n = stream.samples.size();
    if (static_cast<std::size_t>(window) > n && n > 0) {
        throw ParameterError("low_pass window wider than the stream");
    }

    GazeStream out = stream;
    if (window == 1) return out;

    const std::size_t half = static_cast<std::size_t>(window / 2);
    std::vector<double> xs, ys;
    xs.reserve(static_cast<std::size_t>(window));
    ys.reserve(static_cast<std::size_t>(window));
    for (std::size_t i = 0; i < n; ++i) {
        if (!stream.samples[i].valid) continue;
        const std::size_t h = std::min({half, i, n - 1 - i});
        xs.clear();
        ys.clear();
        for (std::size_t k = i - h; k <= i + h; ++k) {
            const auto& s = stream.samples[k];
            if (!s.valid) continue;
            xs.push_back(s.x);
            ys.push_back(s.y);
        }
        out.samples[i].x = median_of(xs);
        out.samples[i].y = median_of(ys);
    }
    return out;
}

std::vector<std::optional<double>> angular_velocity(const GazeStream& stream,
                                                    const ScreenGeometry& geom) {
    std::vector<std::optional<double>> velocity;
    if (stream.valid_count() < 2) return velocity;
    const auto& s = stream.samples;
    velocity.reserve(s.size() - 1);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (!s[i].valid || !s[i + 1].valid) {
            velocity.emplace_back();
            continue;
        }
        const double dt_s = static_cast<double>(s[i + 1].t_us - s[i].t_us) * 1e-6;
        velocity.emplace_back(normalized_distance_deg(s[i].x, s[i].y, s[i + 1].x, s[i + 1].y, geom) /
                              dt_s);
    }
    return velocity;
}

std::vector<Fixation> ivt_classify(const GazeStream& stream, const FilterConfig& cfg,
                                   const ScreenGeometry& geom) {
    validate_filter_config(cfg);
    std::vector<Fixation> fixations;
    const auto& s = stream.samples;
    if (s.empty()) return fixations;

    const auto velocity = angular_velocity(stream, geom);
    const auto period = period_us(stream);
    const auto min_duration_us =
        static_cast<std::int64_t>(std::llround(cfg.min_fixation_duration_ms * 1000.0));

    auto emit = [&](std::size_t first, std::size_t last) {
        Fixation f;
        f.t_start_us = s[first].t_us;
        f.t_end_us = s[last].t_us + period;
        if (last + 1 < s.size()) f.t_end_us = std::min(f.t_end_us, s[last + 1].t_us);
        if (f.duration_us() < min_duration_us) return;
        double sx = 0, sy = 0;
        for (std::size_t k = first; k <= last; ++k) {
            sx += s[k].x;
            sy += s[k].y;
        }
        f.sample_count = last - first + 1;
        f.centroid_x = sx / static_cast<double>(f.sample_count);
        f.centroid_y = sy / static_cast<double>(f.sample_count);
        fixations.push_back(f);
    };

    // A run is a maximal span of valid samples joined by sub-threshold pairs.
    std::optional<std::size_t> run_start;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].valid) {
            if (run_start) emit(*run_start, i - 1);
            run_start.reset();
            continue;
        }
        if (!run_start) {
            run_start = i;
            continue;
        }
        const auto& v = velocity[i - 1];
        if (!v || *v >= cfg.velocity_threshold_deg_s) {
            emit(*run_start, i - 1);
            run_start = i;
        }
    }
    if (run_start) emit(*run_start, s.size() - 1);
    return fixations;
}

std::vector<Fixation> merge_fixations(const std::vector<Fixation>& fixations,
                                      const FilterConfig& cfg, const ScreenGeometry& geom) {
    for (std::size_t i = 1; i < fixations.size(); ++i) {
        if (fixations[i].t_start_us < fixations[i - 1].t_end_us) {
            throw ParameterError("merge_fixations: input not time-ordered at index " +
                                 std::to_string(i));
        }
    }
    const auto max_gap_us = static_cast<std::int64_t>(std::llround(cfg.merge_max_gap_ms * 1000.0));

    std::vector<Fixation> current = fixations;
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<Fixation> next;
        next.reserve(current.size());
        for (const auto& f : current) {
            if (!next.empty()) {
                auto& prev = next.back();
                const bool close_in_time = f.t_start_us - prev.t_end_us <= max_gap_us;
                const bool close_in_space =
                    normalized_distance_deg(prev.centroid_x, prev.centroid_y, f.centroid_x,
                                            f.centroid_y, geom) <= cfg.merge_max_dist_deg;
                if (close_in_time && close_in_space) {
                    double wa = static_cast<double>(prev.duration_us());
                    double wb = static_cast<double>(f.duration_us());
                    if (wa + wb <= 0) wa = wb = 1.0;
                    prev.centroid_x = (prev.centroid_x * wa + f.centroid_x * wb) / (wa + wb);
                    prev.centroid_y = (prev.centroid_y * wa + f.centroid_y * wb) / (wa + wb);
                    prev.t_end_us = f.t_end_us;
                    prev.sample_count += f.sample_count;
                    changed = true;
                    continue;
                }
            }
            next.push_back(f);
        }
        current = std::move(next);
    }
    return current;
}

std::vector<Fixation> detect_fixations(const GazeStream& stream, const FilterConfig& cfg,
                                       const ScreenGeometry& geom) {
    validate_filter_config(cfg);
    int window = cfg.smoothing_window_samples;
    const auto n = static_cast<int>(stream.samples.size());
    if (n > 0 && window > n) window = (n % 2 == 1) ? n : n - 1;
    const auto smoothed = low_pass(stream, std::max(window, 1));
    return merge_fixations(ivt_classify(smoothed, cfg, geom), cfg, geom);
}

}  // namespace gazepath

namespace gazepath {

void write_fixations_jsonl(std::ostream& out, const std::vector<TrialFixations>& trials) {
    for (const auto& trial : trials) {
        for (const auto& f : trial.fixations) {
            nlohmann::json j;
            j["participant_id"] = trial.participant_id;
            j["method_id"] = trial.method_id;
            j["t_start_us"] = f.t_start_us;
            j["t_end_us"] = f.t_end_us;
            j["x"] = f.centroid_x;
            j["y"] = f.centroid_y;
            j["sample_count"] = f.sample_count;
            out << j.dump() << '\n';
        }
    }
}

std::vector<TrialFixations> parse_fixations_jsonl(std::istream& in, const std::string& source_name) {
    std::vector<TrialFixations> trials;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            auto key = std::make_pair(j.at("participant_id").get<std::string>(),
                                      j.at("method_id").get<std::string>());
            auto [it, inserted] = index.try_emplace(key, trials.size());
            if (inserted) trials.push_back({key.first, key.second, {}});
            Fixation f;
            f.t_start_us = j.at("t_start_us").get<std::int64_t>();
            f.t_end_us = j.at("t_end_us").get<std::int64_t>();
            f.centroid_x = j.at("x").get<double>();
            f.centroid_y = j.at("y").get<double>();
            f.sample_count = j.at("sample_count").get<std::size_t>();
            trials[it->second].fixations.push_back(f);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return trials;
}

std::vector<TrialFixations> load_fixations(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open fixation file " + path.string());
    return parse_fixations_jsonl(in, path.string());
}

}  // namespace gazepath
