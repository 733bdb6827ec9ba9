#include "gazepath/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gazepath {

using nlohmann::json;

namespace {

constexpr std::string_view kTdatPrefix = "TDAT: ";
constexpr std::string_view kSeqMarker = "\n SEQ:";
constexpr std::string_view kOpenTag = "<s>";
constexpr std::string_view kCloseTag = "</s>";

std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> words;
    std::istringstream in{std::string(text)};
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

std::string join(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += ' ';
        out += words[i];
    }
    return out;
}

}  // namespace

std::string_view to_string(SplitKind kind) {
    return kind == SplitKind::participant_holdout ? "participant_holdout" : "method_holdout";
}

std::string_view experiment_label(SplitKind kind) {
    return kind == SplitKind::participant_holdout ? "participant-holdout" : "method-holdout";
}

SplitKind split_kind_from_string(std::string_view name) {
    if (name == "participant_holdout" || name == "participant-holdout") {
        return SplitKind::participant_holdout;
    }
    if (name == "method_holdout" || name == "method-holdout") return SplitKind::method_holdout;
    throw ParameterError("unknown split kind '" + std::string(name) + "'");
}

Warnings validate_corpus(const Corpus& corpus) {
    std::set<std::string> participants, methods;
    std::set<std::pair<std::string, std::string>> trials;
    for (const auto& s : corpus.scanpaths) {
        if (!corpus.layouts.count(s.method_id)) {
            throw ValidationError("scanpath (" + s.participant_id + ", " + s.method_id +
                                  ") refers to an unknown method");
        }
        if (!trials.emplace(s.participant_id, s.method_id).second) {
            throw ValidationError("duplicate trial (" + s.participant_id + ", " + s.method_id + ")");
        }
        participants.insert(s.participant_id);
        methods.insert(s.method_id);
    }

    Warnings warnings;
    const bool full_shape = participants.size() == 27 && corpus.layouts.size() == 68 &&
                      trials.size() == 27 * 25;
    if (!full_shape) {
        warnings.push_back({"corpus-shape", std::to_string(participants.size()) + " participants, " +
                                                std::to_string(corpus.layouts.size()) +
                                                " methods, " + std::to_string(trials.size()) +
                                                " trials (expected 27, 68, 675)"});
    }
    return warnings;
}

const std::string& split_key(const Scanpath& s, SplitKind kind) {
    return kind == SplitKind::participant_holdout ? s.participant_id : s.method_id;
}

std::vector<SplitSpec> make_splits(const Corpus& corpus, SplitKind kind) {
    if (corpus.scanpaths.empty()) throw ParameterError("make_splits: empty corpus");
    std::set<std::string> ids;
    for (const auto& s : corpus.scanpaths) ids.insert(split_key(s, kind));
    if (ids.size() < 3) {
        throw ParameterError("make_splits: need at least 3 distinct " +
                             std::string(kind == SplitKind::participant_holdout ? "participants"
                                                                                : "methods") +
                             " for train/validation/test, got " + std::to_string(ids.size()));
    }

    std::vector<SplitSpec> splits;
    splits.reserve(ids.size());
    for (const auto& test : ids) {
        SplitSpec spec;
        spec.kind = kind;
        spec.test_id = test;
        for (const auto& id : ids) {
            if (id == test) continue;
            if (spec.validation_id.empty()) spec.validation_id = id;
            spec.train_ids.push_back(id);
        }
        splits.push_back(std::move(spec));
    }
    return splits;
}

MaterializedSplit materialize_split(const Corpus& corpus, const SplitSpec& split,
                                    std::optional<std::size_t> n) {
    if (n && *n == 0) throw ParameterError("materialize_split: n must be >= 1");
    MaterializedSplit out;
    out.spec = split;
    out.n = n;
    const std::set<std::string> train_ids(split.train_ids.begin(), split.train_ids.end());

    std::vector<const Scanpath*> ordered;
    ordered.reserve(corpus.scanpaths.size());
    for (const auto& s : corpus.scanpaths) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(), [](const Scanpath* a, const Scanpath* b) {
        return std::tie(a->participant_id, a->method_id) < std::tie(b->participant_id, b->method_id);
    });

    for (const Scanpath* s : ordered) {
        if (s->words.empty()) {
            out.warnings.push_back({"empty-scanpath", "(" + s->participant_id + ", " + s->method_id +
                                                          ") excluded: empty scanpath"});
            continue;
        }
        PromptRecord rec;
        rec.participant_id = s->participant_id;
        rec.method_id = s->method_id;
        rec.tdat = corpus.layouts.at(s->method_id).source;
        rec.seq = n ? first_n(s->words, *n) : s->words;
        rec.n = n ? *n : s->words.size();

        const auto& key = split_key(*s, split.kind);
        if (key == split.test_id) {
            out.test.push_back(std::move(rec));
        } else if (key == split.validation_id) {
            out.val.push_back(std::move(rec));
        } else if (train_ids.count(key)) {
            out.train.push_back(std::move(rec));
        } else {
            out.warnings.push_back({"unrouted-trial", "(" + s->participant_id + ", " +
                                                          s->method_id + ") belongs to no partition"});
        }
    }
    return out;
}

std::string render_inference_prompt(const PromptRecord& rec) {
    std::string out;
    out.reserve(kTdatPrefix.size() + rec.tdat.size() + kSeqMarker.size());
    out += kTdatPrefix;
    out += rec.tdat;
    out += kSeqMarker;
    return out;
}

std::string render_finetune_prompt(const PromptRecord& rec) {
    if (rec.seq.empty()) throw ParameterError("render_finetune_prompt: empty seq");
    std::string out = render_inference_prompt(rec);
    out += ' ';
    out += kOpenTag;
    out += ' ';
    out += join(rec.seq);
    out += ' ';
    out += kCloseTag;
    out += '\n';
    return out;
}

PromptText parse_finetune_prompt(std::string_view text) {
    if (text.substr(0, kTdatPrefix.size()) != kTdatPrefix) {
        throw ParseError("prompt does not start with 'TDAT: '");
    }
    // Words never contain whitespace, so the last marker is the real one even if
    // the source itself contains "\n SEQ:".
    const std::string opener = std::string(kSeqMarker) + " " + std::string(kOpenTag) + " ";
    const auto at = text.rfind(opener);
    if (at == std::string_view::npos || at < kTdatPrefix.size()) {
        throw ParseError("prompt has no SEQ section");
    }
    const std::string closer = " " + std::string(kCloseTag) + "\n";
    if (text.size() < at + opener.size() + closer.size() ||
        text.substr(text.size() - closer.size()) != closer) {
        throw ParseError("prompt does not end with ' </s>\\n'");
    }
    PromptText out;
    out.tdat = std::string(text.substr(kTdatPrefix.size(), at - kTdatPrefix.size()));
    const auto body = text.substr(at + opener.size(),
                                  text.size() - closer.size() - (at + opener.size()));
    if (body.empty() || body.front() == ' ' || body.back() == ' ' ||
        body.find("  ") != std::string_view::npos) {
        throw ParseError("SEQ words must be separated by single spaces");
    }
    out.seq = split_whitespace(body);
    return out;
}

void write_prompt_file(std::ostream& out, const std::vector<PromptRecord>& records, bool finetune) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i) out << '\n';
        if (finetune) {
            out << render_finetune_prompt(records[i]);
        } else {
            out << render_inference_prompt(records[i]) << '\n';
        }
    }
}

std::vector<PromptText> parse_finetune_prompt_file(std::string_view text) {
    std::vector<PromptText> out;
    const std::string boundary = " " + std::string(kCloseTag) + "\n";
    std::size_t start = 0;
    while (start < text.size()) {
        const auto end = text.find(boundary, start);
        if (end == std::string_view::npos) throw ParseError("prompt file: record without ' </s>'");
        const auto stop = end + boundary.size();
        out.push_back(parse_finetune_prompt(text.substr(start, stop - start)));
        start = stop;
        if (start < text.size()) {
            if (text[start] != '\n') throw ParseError("prompt file: records must be separated by a blank line");
            ++start;
        }
    }
    return out;
}

ParsedPrediction parse_prediction(std::string_view completion) {
    ParsedPrediction out;
    const auto open = completion.find(kOpenTag);
    if (open == std::string_view::npos) {
        out.warnings.push_back({"missing-open-tag", "completion has no <s>"});
        return out;
    }
    const auto body_start = open + kOpenTag.size();
    const auto close = completion.find(kCloseTag, body_start);
    if (close == std::string_view::npos) {
        out.warnings.push_back({"truncated", "completion has no </s>; read to end"});
        out.words = split_whitespace(completion.substr(body_start));
    } else {
        out.words = split_whitespace(completion.substr(body_start, close - body_start));
    }
    return out;
}

SplitManifest manifest_of(const MaterializedSplit& split) {
    SplitManifest m;
    m.spec = split.spec;
    m.n = split.n;
    const auto keys = [](const std::vector<PromptRecord>& recs) {
        std::vector<TrialKey> out;
        out.reserve(recs.size());
        for (const auto& r : recs) out.push_back({r.participant_id, r.method_id});
        return out;
    };
    m.train = keys(split.train);
    m.val = keys(split.val);
    m.test = keys(split.test);
    return m;
}

namespace {

json keys_to_json(const std::vector<TrialKey>& keys) {
    json arr = json::array();
    for (const auto& k : keys) arr.push_back({{"participant_id", k.participant_id}, {"method_id", k.method_id}});
    return arr;
}

std::vector<TrialKey> keys_from_json(const json& arr) {
    std::vector<TrialKey> keys;
    for (const auto& k : arr) {
        keys.push_back({k.at("participant_id").get<std::string>(), k.at("method_id").get<std::string>()});
    }
    return keys;
}

}  // namespace

void write_manifest(std::ostream& out, const SplitManifest& m) {
    json j;
    j["kind"] = to_string(m.spec.kind);
    j["test_id"] = m.spec.test_id;
    j["validation_id"] = m.spec.validation_id;
    j["train_ids"] = m.spec.train_ids;
    j["n"] = m.n ? json(*m.n) : json(nullptr);
    j["train"] = keys_to_json(m.train);
    j["val"] = keys_to_json(m.val);
    j["test"] = keys_to_json(m.test);
    out << j.dump(2) << '\n';
}

SplitManifest parse_manifest(std::istream& in, const std::string& source_name) {
    try {
        const auto j = json::parse(in);
        SplitManifest m;
        m.spec.kind = split_kind_from_string(j.at("kind").get<std::string>());
        m.spec.test_id = j.at("test_id").get<std::string>();
        m.spec.validation_id = j.at("validation_id").get<std::string>();
        m.spec.train_ids = j.at("train_ids").get<std::vector<std::string>>();
        if (!j.at("n").is_null()) m.n = j.at("n").get<std::size_t>();
        m.train = keys_from_json(j.at("train"));
        m.val = keys_from_json(j.at("val"));
        m.test = keys_from_json(j.at("test"));
        return m;
    } catch (const json::exception& e) {
        throw ParseError(source_name + ": " + e.what());
    }
}

SplitManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open manifest " + path.string());
    return parse_manifest(in, path.string());
}

}  // namespace gazepath
