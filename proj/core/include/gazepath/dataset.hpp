#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazepath/scanpath.hpp"
#include "gazepath/stimulus.hpp"

namespace gazepath {

struct Corpus {
    std::map<std::string, StimulusLayout> layouts;  // by method_id
    std::vector<Scanpath> scanpaths;
};

/// Throws ValidationError if a scanpath names an unknown method. Warns when the
/// corpus deviates from 27 participants x 25 methods out of 68 (680 trials).
Warnings validate_corpus(const Corpus& corpus);

enum class SplitKind { participant_holdout, method_holdout };

std::string_view to_string(SplitKind kind);
/// Hyphenated experiment label used in reports ("participant-holdout").
std::string_view experiment_label(SplitKind kind);
SplitKind split_kind_from_string(std::string_view name);

/// Leave-one-out split. `train_ids` is every id except the test id; the
/// validation id is one of them and its trials go to the validation partition.
struct SplitSpec {
    SplitKind kind = SplitKind::participant_holdout;
    std::string test_id;
    std::string validation_id;
    std::vector<std::string> train_ids;

    bool operator==(const SplitSpec&) const = default;
};

/// The split-key id of a trial: participant or method depending on `kind`.
const std::string& split_key(const Scanpath& s, SplitKind kind);

/// One split per distinct id, in id order. The validation id is the smallest
/// id other than the test id. Throws ParameterError with fewer than 3 ids.
std::vector<SplitSpec> make_splits(const Corpus& corpus, SplitKind kind);

struct PromptRecord {
    std::string participant_id;
    std::string method_id;
    std::string tdat;  // raw Java source, verbatim
    std::vector<std::string> seq;
    std::size_t n = 0;  // truncation applied to seq

    bool operator==(const PromptRecord&) const = default;
};

struct MaterializedSplit {
    SplitSpec spec;
    std::optional<std::size_t> n;
    std::vector<PromptRecord> train, val, test;  // each ordered by (participant, method)
    Warnings warnings;
};

/// Routes every trial by its split key; empty scanpaths are excluded with a
/// warning. `n` truncates seq; nullopt keeps full scanpaths.
MaterializedSplit materialize_split(const Corpus& corpus, const SplitSpec& split,
                                    std::optional<std::size_t> n = std::nullopt);

/// "TDAT: {source}\n SEQ: <s> {words} </s>\n". Throws ParameterError on empty seq.
std::string render_finetune_prompt(const PromptRecord& rec);
/// The fine-tuning prompt cut right after "SEQ:".
std::string render_inference_prompt(const PromptRecord& rec);

struct PromptText {
    std::string tdat;
    std::vector<std::string> seq;

    bool operator==(const PromptText&) const = default;
};

/// Inverse of render_finetune_prompt. Throws ParseError on malformed text.
PromptText parse_finetune_prompt(std::string_view text);

/// Prompt file: rendered prompts separated by one blank line.
void write_prompt_file(std::ostream& out, const std::vector<PromptRecord>& records, bool finetune);
std::vector<PromptText> parse_finetune_prompt_file(std::string_view text);

struct ParsedPrediction {
    std::vector<std::string> words;
    Warnings warnings;
};

/// Lenient: words between the first "<s>" and the next "</s>".
ParsedPrediction parse_prediction(std::string_view completion);

struct TrialKey {
    std::string participant_id;
    std::string method_id;

    auto operator<=>(const TrialKey&) const = default;
};

/// Split manifest: the spec plus the trial keys routed to each partition.
struct SplitManifest {
    SplitSpec spec;
    std::optional<std::size_t> n;
    std::vector<TrialKey> train, val, test;
};

SplitManifest manifest_of(const MaterializedSplit& split);
void write_manifest(std::ostream& out, const SplitManifest& manifest);
SplitManifest parse_manifest(std::istream& in, const std::string& source_name = "<stream>");
SplitManifest load_manifest(const std::filesystem::path& path);

}  // namespace gazepath
