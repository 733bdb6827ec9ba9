#include "gazepath/metrics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>

namespace gazepath {

std::string serialize_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += ' ';
        out += words[i];
    }
    return out;
}

std::size_t lcs_length(std::string_view a, std::string_view b) {
    if (a.empty() || b.empty()) return 0;
    if (a.size() < b.size()) std::swap(a, b);  // pattern = shorter string

    const std::size_t m = b.size();
    const std::size_t blocks = (m + 63) / 64;
    std::vector<std::array<std::uint64_t, 256>> match(blocks);
    for (auto& block : match) block.fill(0);
    for (std::size_t i = 0; i < m; ++i) {
        match[i / 64][static_cast<unsigned char>(b[i])] |= std::uint64_t{1} << (i % 64);
    }

    // Zero bits of V mark pattern positions consumed by the LCS so far.
    std::vector<std::uint64_t> v(blocks, ~std::uint64_t{0});
    for (const char c : a) {
        std::uint64_t carry = 0;
        for (std::size_t w = 0; w < blocks; ++w) {
            const std::uint64_t pm = match[w][static_cast<unsigned char>(c)];
            const std::uint64_t u = v[w] & pm;
            const std::uint64_t s1 = v[w] + u;
            const std::uint64_t c1 = s1 < v[w] ? 1 : 0;
            const std::uint64_t s2 = s1 + carry;
            const std::uint64_t c2 = s2 < s1 ? 1 : 0;
            carry = c1 | c2;
            v[w] = s2 | (v[w] & ~pm);
        }
    }

    std::size_t lcs = 0;
    for (std::size_t w = 0; w < blocks; ++w) {
        std::uint64_t zeros = ~v[w];
        const std::size_t used = std::min<std::size_t>(64, m - w * 64);
        if (used < 64) zeros &= (std::uint64_t{1} << used) - 1;
        lcs += static_cast<std::size_t>(std::popcount(zeros));
    }
    return lcs;
}

double levenshtein_similarity(std::string_view a, std::string_view b) {
    const std::size_t total = a.size() + b.size();
    if (total == 0) return 1.0;
    // With substitution cost 2, edit distance = |a| + |b| - 2 * LCS.
    const std::size_t distance = total - 2 * lcs_length(a, b);
    return static_cast<double>(total - distance) / static_cast<double>(total);
}

namespace {

struct Block {
    std::size_t i = 0, j = 0, size = 0;
};

// Longest common substring of a[alo, ahi) and b[blo, bhi). Scanning i upward and
// accepting only strictly longer runs keeps the leftmost match in a, then in b.
// `prev` and `cur` are scratch rows of run lengths ending at (i, j).
Block longest_match(std::string_view a, std::size_t alo, std::size_t ahi, std::string_view b,
                    std::size_t blo, std::size_t bhi, std::vector<std::size_t>& prev,
                    std::vector<std::size_t>& cur) {
    Block best{alo, blo, 0};
    const std::size_t width = bhi - blo;
    prev.assign(width + 1, 0);
    cur.assign(width + 1, 0);
    for (std::size_t i = alo; i < ahi; ++i) {
        const char c = a[i];
        for (std::size_t j = 0; j < width; ++j) {
            const std::size_t k = b[blo + j] == c ? prev[j] + 1 : 0;
            cur[j + 1] = k;
            if (k > best.size) best = {i + 1 - k, blo + j + 1 - k, k};
        }
        std::swap(prev, cur);
    }
    return best;
}

}  // namespace

std::size_t gestalt_matches(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev, cur;
    std::size_t matched = 0;
    std::vector<std::array<std::size_t, 4>> pending{{0, a.size(), 0, b.size()}};
    while (!pending.empty()) {
        const auto [alo, ahi, blo, bhi] = pending.back();
        pending.pop_back();
        if (alo >= ahi || blo >= bhi) continue;
        const Block m = longest_match(a, alo, ahi, b, blo, bhi, prev, cur);
        if (m.size == 0) continue;
        matched += m.size;
        pending.push_back({alo, m.i, blo, m.j});
        pending.push_back({m.i + m.size, ahi, m.j + m.size, bhi});
    }
    return matched;
}

double gestalt_similarity(std::string_view a, std::string_view b) {
    const std::size_t total = a.size() + b.size();
    if (total == 0) return 1.0;
    const std::size_t k = a <= b ? gestalt_matches(a, b) : gestalt_matches(b, a);
    return 2.0 * static_cast<double>(k) / static_cast<double>(total);
}

ScorePair score(const std::vector<std::string>& predicted, const std::vector<std::string>& reference,
                std::size_t n) {
    const auto p = serialize_words(first_n(predicted, n));
    const auto r = serialize_words(first_n(reference, n));
    return {n, levenshtein_similarity(p, r), gestalt_similarity(p, r)};
}

std::vector<ReportCell> aggregate(const std::vector<ScoredTrial>& scores) {
    std::map<std::pair<SplitKind, std::size_t>, std::vector<const ScoredTrial*>> cells;
    for (const auto& s : scores) cells[{s.experiment, s.scores.n}].push_back(&s);

    std::vector<ReportCell> out;
    for (auto& [key, members] : cells) {
        std::sort(members.begin(), members.end(), [](const ScoredTrial* a, const ScoredTrial* b) {
            return std::tie(a->participant_id, a->method_id, a->kind_id) <
                   std::tie(b->participant_id, b->method_id, b->kind_id);
        });
        double lev = 0, ges = 0;
        for (const auto* m : members) {
            lev += m->scores.levenshtein;
            ges += m->scores.gestalt;
        }
        const auto count = static_cast<double>(members.size());
        out.push_back({key.first, key.second, members.size(), lev / count, ges / count});
    }
    return out;
}

std::vector<HistogramBin> histogram(std::span<const double> scores, double bin_width) {
    if (!(bin_width > 0) || bin_width > 1) throw ParameterError("histogram: bin_width must be in (0, 1]");
    const double bins_real = 1.0 / bin_width;
    const auto bin_count = static_cast<std::size_t>(std::llround(bins_real));
    if (std::abs(bins_real - static_cast<double>(bin_count)) > 1e-9) {
        throw ParameterError("histogram: bin_width must divide 1");
    }

    std::vector<HistogramBin> bins(bin_count + 1);
    for (std::size_t k = 0; k < bin_count; ++k) {
        bins[k].low = static_cast<double>(k) / static_cast<double>(bin_count);
        bins[k].high = static_cast<double>(k + 1) / static_cast<double>(bin_count);
    }
    bins.back() = {1.0, 1.0, 0, true};

    for (const double s : scores) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw ParameterError("histogram: score " + std::to_string(s) + " outside [0, 1]");
        }
        if (s == 1.0) {
            ++bins.back().count;
            continue;
        }
        auto k = static_cast<std::size_t>(std::floor(s * static_cast<double>(bin_count)));
        k = std::min(k, bin_count - 1);
        ++bins[k].count;
    }
    return bins;
}

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fmt_bound(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

void write_scores_csv(std::ostream& out, const std::vector<ScoredTrial>& scores) {
    out << "experiment,kind_id,participant_id,method_id,n,levenshtein,gestalt\n";
    for (const auto& s : scores) {
        out << experiment_label(s.experiment) << ',' << s.kind_id << ',' << s.participant_id << ','
            << s.method_id << ',' << s.scores.n << ',' << fmt6(s.scores.levenshtein) << ','
            << fmt6(s.scores.gestalt) << '\n';
    }
}

void write_report_csv(std::ostream& out, const std::vector<ReportCell>& cells,
                      const std::vector<std::size_t>& n_values) {
    out << "experiment";
    for (const char* metric : {"levenshtein", "gestalt"}) {
        for (const auto n : n_values) out << ',' << metric << "_n" << n;
    }
    out << '\n';

    for (const auto kind : {SplitKind::participant_holdout, SplitKind::method_holdout}) {
        const bool present = std::any_of(cells.begin(), cells.end(),
                                         [&](const ReportCell& c) { return c.experiment == kind; });
        if (!present) continue;
        const auto find = [&](std::size_t n) -> const ReportCell* {
            for (const auto& c : cells) {
                if (c.experiment == kind && c.n == n) return &c;
            }
            return nullptr;
        };
        out << experiment_label(kind);
        for (const bool lev : {true, false}) {
            for (const auto n : n_values) {
                out << ',';
                if (const auto* c = find(n)) out << fmt6(lev ? c->mean_levenshtein : c->mean_gestalt);
            }
        }
        out << '\n';
    }
}

void write_report_long_csv(std::ostream& out, const std::vector<ReportCell>& cells) {
    out << "experiment,n,count,levenshtein,gestalt\n";
    for (const auto& c : cells) {
        out << experiment_label(c.experiment) << ',' << c.n << ',' << c.count << ','
            << fmt6(c.mean_levenshtein) << ',' << fmt6(c.mean_gestalt) << '\n';
    }
}

void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins) {
    out << "bin_low,bin_high,count\n";
    for (const auto& b : bins) out << fmt_bound(b.low) << ',' << fmt_bound(b.high) << ',' << b.count << '\n';
}

}  // namespace gazepath
