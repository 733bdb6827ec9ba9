#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazepath/dataset.hpp"

namespace gazepath {

/// Words joined by single spaces; the character-level comparison substrate.
std::string serialize_words(const std::vector<std::string>& words);

/// Length of the longest common subsequence, bit-parallel over 64-bit blocks.
std::size_t lcs_length(std::string_view a, std::string_view b);

/// Normalized Levenshtein ratio with insert/delete cost 1 and substitution cost 2:
/// (|a| + |b| - D) / (|a| + |b|), 1 when both are empty. Compares bytes.
double levenshtein_similarity(std::string_view a, std::string_view b);

/// Total characters matched by Ratcliff/Obershelp: take the longest common
/// substring (leftmost in `a`, then leftmost in `b`) and recurse on both sides.
std::size_t gestalt_matches(std::string_view a, std::string_view b);

/// 2K / (|a| + |b|), 1 when both are empty. The tie rule above depends on
/// argument order, so K is taken with the lexicographically smaller string
/// first; the similarity is symmetric.
double gestalt_similarity(std::string_view a, std::string_view b);

struct ScorePair {
    std::size_t n = 0;
    double levenshtein = 0.0;
    double gestalt = 0.0;
};

/// Truncates both sequences to n words, serializes, and applies both metrics.
ScorePair score(const std::vector<std::string>& predicted, const std::vector<std::string>& reference,
                std::size_t n);

/// A score tagged with the experiment and the held-out id it came from.
struct ScoredTrial {
    SplitKind experiment = SplitKind::participant_holdout;
    std::string kind_id;
    std::string participant_id;
    std::string method_id;
    ScorePair scores;
};

struct ReportCell {
    SplitKind experiment = SplitKind::participant_holdout;
    std::size_t n = 0;
    std::size_t count = 0;
    double mean_levenshtein = 0.0;
    double mean_gestalt = 0.0;
};

/// Means per (experiment, n). Within a cell, values are summed in
/// (participant, method) order so the result does not depend on input order.
std::vector<ReportCell> aggregate(const std::vector<ScoredTrial>& scores);

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;
    bool exact = false;  // the perfect-match bin [1.0, 1.0]
};

/// Half-open bins of `bin_width` over [0, 1) plus a dedicated exact-1.0 bin.
/// Throws ParameterError for scores outside [0, 1] or a width not dividing 1.
std::vector<HistogramBin> histogram(std::span<const double> scores, double bin_width = 0.1);

void write_scores_csv(std::ostream& out, const std::vector<ScoredTrial>& scores);
/// One row per experiment; columns levenshtein_n{k}... then gestalt_n{k}...
void write_report_csv(std::ostream& out, const std::vector<ReportCell>& cells,
                      const std::vector<std::size_t>& n_values);
/// experiment,n,count,levenshtein,gestalt
void write_report_long_csv(std::ostream& out, const std::vector<ReportCell>& cells);
void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins);

}  // namespace gazepath
