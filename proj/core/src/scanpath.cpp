#include "gazepath/scanpath.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace gazepath {

namespace {

// Shortest pixel offset from (x, y) to the rectangle; zero inside.
std::pair<double, double> offset_to_box(const Rect& r, double x, double y) {
    const double dx = x < r.x0 ? r.x0 - x : (x > r.x1 ? x - r.x1 : 0.0);
    const double dy = y < r.y0 ? r.y0 - y : (y > r.y1 ? y - r.y1 : 0.0);
    return {dx, dy};
}

}  // namespace

std::optional<std::size_t> map_fixation(const Fixation& fix, const StimulusLayout& layout,
                                        const ScreenGeometry& geom, double tolerance_deg,
                                        bool include_comments) {
    const double px = fix.centroid_x * geom.width_px;
    const double py = fix.centroid_y * geom.height_px;
    const auto eligible = [&](const Token& t) {
        return t.substantive() && (include_comments || t.kind != TokenKind::comment);
    };

    for (std::size_t i = 0; i < layout.tokens.size(); ++i) {
        const auto& t = layout.tokens[i];
        if (t.bbox.contains(px, py)) {
            if (eligible(t)) return i;
            break;
        }
    }

    std::optional<std::size_t> best;
    double best_center = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < layout.tokens.size(); ++i) {
        const auto& t = layout.tokens[i];
        if (!eligible(t)) continue;
        const auto [dx, dy] = offset_to_box(t.bbox, px, py);
        if (pixel_distance_deg(0, 0, dx, dy, geom) > tolerance_deg) continue;
        const double center = pixel_distance_deg(px, py, t.bbox.center_x(), t.bbox.center_y(), geom);
        if (center < best_center) {
            best_center = center;
            best = i;
        }
    }
    return best;
}

ScanpathExtraction extract_scanpath(const std::string& participant_id,
                                    const std::vector<Fixation>& fixations,
                                    const StimulusLayout& layout, const ScreenGeometry& geom,
                                    const ScanpathConfig& cfg) {
    ScanpathExtraction out;
    out.scanpath.participant_id = participant_id;
    out.scanpath.method_id = layout.method_id;
    for (const auto& fix : fixations) {
        const auto idx = map_fixation(fix, layout, geom, cfg.tolerance_deg, cfg.include_comments);
        if (!idx) {
            ++out.unmapped;
            continue;
        }
        const auto& word = layout.tokens[*idx].lexeme;
        if (!out.scanpath.words.empty() && out.scanpath.words.back() == word) continue;
        out.scanpath.words.push_back(word);
        out.token_indices.push_back(*idx);
    }
    if (out.scanpath.words.empty()) {
        out.warnings.push_back({"empty-scanpath", "(" + participant_id + ", " + layout.method_id +
                                                      "): none of " +
                                                      std::to_string(fixations.size()) +
                                                      " fixations mapped to a token"});
    }
    return out;
}

std::vector<std::string> first_n(const std::vector<std::string>& words, std::size_t n) {
    if (n == 0) throw ParameterError("first_n: n must be >= 1");
    return {words.begin(), words.begin() + static_cast<std::ptrdiff_t>(std::min(n, words.size()))};
}

void write_scanpaths_jsonl(std::ostream& out, const std::vector<Scanpath>& scanpaths) {
    for (const auto& s : scanpaths) {
        nlohmann::json j;
        j["participant_id"] = s.participant_id;
        j["method_id"] = s.method_id;
        j["words"] = s.words;
        out << j.dump() << '\n';
    }
}

std::vector<Scanpath> parse_scanpaths_jsonl(std::istream& in, const std::string& source_name) {
    std::vector<Scanpath> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out.push_back({j.at("participant_id").get<std::string>(),
                           j.at("method_id").get<std::string>(),
                           j.at("words").get<std::vector<std::string>>()});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Scanpath> load_scanpaths(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open scanpath file " + path.string());
    return parse_scanpaths_jsonl(in, path.string());
}

}  // namespace gazepath
