#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazepath/dataset.hpp"

namespace gazepath {

enum class PredictorSource { reading_order, name_first, markov, external };

std::string_view to_string(PredictorSource source);
PredictorSource predictor_source_from_string(std::string_view name);

struct PredictionRecord {
    std::string participant_id;
    std::string method_id;
    std::size_t n = 0;
    std::vector<std::string> words;  // at most n
    PredictorSource source = PredictorSource::external;

    bool operator==(const PredictionRecord&) const = default;
};

struct Prediction {
    std::vector<std::string> words;
    Warnings warnings;
};

/// First n substantive lexemes in source order, consecutive repeats collapsed.
/// Throws ParameterError for a method without substantive tokens or n == 0.
std::vector<std::string> reading_order_predict(const StimulusLayout& layout, std::size_t n);

/// AOI index of the declared method's name: the first identifier followed by
/// "(" outside any braces or parentheses and not part of an annotation.
std::optional<std::size_t> find_method_name(const StimulusLayout& layout);

/// Method name first, then reading order without the name's own occurrence.
/// Falls back to reading order with a warning when no name is found.
Prediction name_first_predict(const StimulusLayout& layout, std::size_t n);

/// First-order Markov chain over token categories: kind x line decile.
class MarkovModel {
public:
    static constexpr std::size_t kDeciles = 10;
    static constexpr std::size_t kCategories = kTokenKindCount * kDeciles;

    static std::size_t category(TokenKind kind, std::size_t decile) {
        return static_cast<std::size_t>(kind) * kDeciles + decile;
    }
    /// Category of AOI `index` in `layout`.
    static std::size_t category_of(const StimulusLayout& layout, std::size_t index);

    void observe_start(std::size_t cat) { ++initial_[cat]; }
    void observe_transition(std::size_t from, std::size_t to) { ++transitions_[from * kCategories + to]; }

    /// Add-one smoothed probabilities.
    double initial_probability(std::size_t cat) const;
    double transition_probability(std::size_t from, std::size_t to) const;

    std::uint64_t initial_count(std::size_t cat) const { return initial_[cat]; }
    std::uint64_t transition_count(std::size_t from, std::size_t to) const {
        return transitions_[from * kCategories + to];
    }
    std::uint64_t sequences() const { return sequences_; }
    void count_sequence() { ++sequences_; }

private:
    std::array<std::uint64_t, kCategories> initial_{};
    std::array<std::uint64_t, kCategories * kCategories> transitions_{};
    std::uint64_t sequences_ = 0;
};

/// AOI behind each word: the first word takes its earliest occurrence, later
/// words the occurrence closest in source order to the previous one. Words
/// absent from the layout resolve to nullopt.
std::vector<std::optional<std::size_t>> resolve_occurrences(const std::vector<std::string>& words,
                                                            const StimulusLayout& layout);

/// Counts starts and transitions of every training scanpath. Throws
/// ParameterError on an empty training set.
MarkovModel markov_train(const std::vector<Scanpath>& train,
                         const std::map<std::string, StimulusLayout>& layouts);

struct MarkovDecodeOptions {
    bool sample = false;  // greedy unless set
    std::uint64_t seed = 0;
};

/// At each step choose a category (argmax, or a seeded draw when sampling)
/// among those still available in this method, then its earliest substantive
/// token that differs from the previous word. Stops early when none remain.
std::vector<std::string> markov_predict(const MarkovModel& model, const StimulusLayout& layout,
                                        std::size_t n, const MarkovDecodeOptions& opts = {});

/// Predictions JSONL: {"participant_id", "method_id", "n", "words"}; "source" is
/// written for provenance and optional on read.
void write_predictions_jsonl(std::ostream& out, const std::vector<PredictionRecord>& records);

struct LoadedPredictions {
    std::vector<PredictionRecord> records;
    Warnings warnings;
};

/// Reads predictions JSONL and checks every key against the corpus trials.
/// Throws ValidationError listing every unknown key's line.
LoadedPredictions load_external_predictions(const std::filesystem::path& path, const Corpus& corpus);
LoadedPredictions parse_external_predictions(std::istream& in, const Corpus& corpus,
                                             const std::string& source_name = "<stream>");

/// Raw completions, one per line, paired with the manifest's test trials in order.
/// Throws ValidationError on a count mismatch or unknown trial.
LoadedPredictions load_completions(const std::filesystem::path& path, const SplitManifest& manifest,
                                   const Corpus& corpus);
LoadedPredictions parse_completions(std::istream& in, const SplitManifest& manifest,
                                    const Corpus& corpus, const std::string& source_name = "<stream>");

}  // namespace gazepath
