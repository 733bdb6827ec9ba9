#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gazepath/fixation.hpp"
#include "gazepath/stimulus.hpp"

namespace gazepath {

struct ScanpathConfig {
    double tolerance_deg = 0.7;
    bool include_comments = true;

    bool operator==(const ScanpathConfig&) const = default;
};

/// Ordered words one participant fixated over one method.
struct Scanpath {
    std::string participant_id;
    std::string method_id;
    std::vector<std::string> words;

    bool operator==(const Scanpath&) const = default;
};

/// Index of the AOI a fixation lands on. A centroid inside a substantive token
/// maps to it. Otherwise (whitespace or punctuation) the candidate set is every
/// substantive token whose box lies within `tolerance_deg` of the centroid, and
/// the one with the nearest centre wins (earliest on ties).
std::optional<std::size_t> map_fixation(const Fixation& fix, const StimulusLayout& layout,
                                        const ScreenGeometry& geom, double tolerance_deg,
                                        bool include_comments = true);

struct ScanpathExtraction {
    Scanpath scanpath;
    std::vector<std::size_t> token_indices;  // AOI behind each word
    std::size_t unmapped = 0;
    Warnings warnings;
};

/// Maps every fixation, drops the unmapped ones, and collapses consecutive
/// repeats of the same word. Returns the full sequence; see first_n.
ScanpathExtraction extract_scanpath(const std::string& participant_id,
                                    const std::vector<Fixation>& fixations,
                                    const StimulusLayout& layout, const ScreenGeometry& geom,
                                    const ScanpathConfig& cfg = {});

/// The first min(n, size) words. Throws ParameterError for n == 0.
std::vector<std::string> first_n(const std::vector<std::string>& words, std::size_t n);
inline std::vector<std::string> first_n(const Scanpath& s, std::size_t n) { return first_n(s.words, n); }

/// Scanpath JSONL: {"participant_id", "method_id", "words": [...]}.
void write_scanpaths_jsonl(std::ostream& out, const std::vector<Scanpath>& scanpaths);
std::vector<Scanpath> parse_scanpaths_jsonl(std::istream& in, const std::string& source_name = "<stream>");
std::vector<Scanpath> load_scanpaths(const std::filesystem::path& path);

}  // namespace gazepath
