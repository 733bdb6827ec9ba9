#include "gazepath/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "json.hpp"

namespace gazepath {

namespace {

constexpr std::array<std::string_view, 4> kSourceNames = {"reading_order", "name_first", "markov",
                                                          "external"};

std::vector<std::string> reading_order_excluding(const StimulusLayout& layout, std::size_t n,
                                                 std::optional<std::size_t> skip,
                                                 std::vector<std::string> words) {
    for (std::size_t i = 0; i < layout.tokens.size() && words.size() < n; ++i) {
        const auto& t = layout.tokens[i];
        if (!t.substantive() || (skip && *skip == i)) continue;
        if (!words.empty() && words.back() == t.lexeme) continue;
        words.push_back(t.lexeme);
    }
    return words;
}

std::set<std::pair<std::string, std::string>> trial_keys(const Corpus& corpus) {
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& s : corpus.scanpaths) keys.emplace(s.participant_id, s.method_id);
    return keys;
}

}  // namespace

std::string_view to_string(PredictorSource source) {
    return kSourceNames[static_cast<std::size_t>(source)];
}

PredictorSource predictor_source_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kSourceNames.size(); ++i) {
        if (kSourceNames[i] == name) return static_cast<PredictorSource>(i);
    }
    throw ParameterError("unknown predictor '" + std::string(name) + "'");
}

std::vector<std::string> reading_order_predict(const StimulusLayout& layout, std::size_t n) {
    if (n == 0) throw ParameterError("reading_order_predict: n must be >= 1");
    if (std::none_of(layout.tokens.begin(), layout.tokens.end(),
                     [](const Token& t) { return t.substantive(); })) {
        throw ParameterError("reading_order_predict: method " + layout.method_id +
                             " has no substantive tokens");
    }
    return reading_order_excluding(layout, n, std::nullopt, {});
}

std::optional<std::size_t> find_method_name(const StimulusLayout& layout) {
    int depth = 0;
    const auto& toks = layout.tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& lex = toks[i].lexeme;
        if (toks[i].kind == TokenKind::punctuation) {
            if (lex == "(" || lex == "{") ++depth;
            if (lex == ")" || lex == "}") depth = std::max(0, depth - 1);
            continue;
        }
        if (depth != 0 || toks[i].kind != TokenKind::identifier) continue;
        if (i + 1 >= toks.size() || toks[i + 1].lexeme != "(") continue;
        if (i > 0 && toks[i - 1].lexeme == "@") continue;
        return i;
    }
    return std::nullopt;
}

Prediction name_first_predict(const StimulusLayout& layout, std::size_t n) {
    Prediction out;
    const auto name = find_method_name(layout);
    if (!name) {
        out.warnings.push_back({"no-method-name", "method " + layout.method_id +
                                                      ": no declaration found, using reading order"});
        out.words = reading_order_predict(layout, n);
        return out;
    }
    if (n == 0) throw ParameterError("name_first_predict: n must be >= 1");
    out.words = reading_order_excluding(layout, n, name, {layout.tokens[*name].lexeme});
    return out;
}

std::size_t MarkovModel::category_of(const StimulusLayout& layout, std::size_t index) {
    const auto& t = layout.tokens.at(index);
    const std::size_t lines = layout.line_count();
    const std::size_t decile = std::min(kDeciles - 1, t.line * kDeciles / lines);
    return category(t.kind, decile);
}

double MarkovModel::initial_probability(std::size_t cat) const {
    std::uint64_t total = 0;
    for (const auto c : initial_) total += c;
    return static_cast<double>(initial_[cat] + 1) / static_cast<double>(total + kCategories);
}

double MarkovModel::transition_probability(std::size_t from, std::size_t to) const {
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < kCategories; ++k) total += transitions_[from * kCategories + k];
    return static_cast<double>(transitions_[from * kCategories + to] + 1) /
           static_cast<double>(total + kCategories);
}

std::vector<std::optional<std::size_t>> resolve_occurrences(const std::vector<std::string>& words,
                                                            const StimulusLayout& layout) {
    std::vector<std::optional<std::size_t>> out;
    out.reserve(words.size());
    std::optional<std::size_t> prev;
    for (const auto& w : words) {
        std::optional<std::size_t> best;
        std::size_t best_dist = std::numeric_limits<std::size_t>::max();
        for (std::size_t i = 0; i < layout.tokens.size(); ++i) {
            if (layout.tokens[i].lexeme != w) continue;
            const std::size_t dist = prev ? (i > *prev ? i - *prev : *prev - i) : i;
            if (dist < best_dist) {
                best_dist = dist;
                best = i;
            }
        }
        out.push_back(best);
        if (best) prev = best;
    }
    return out;
}

MarkovModel markov_train(const std::vector<Scanpath>& train,
                         const std::map<std::string, StimulusLayout>& layouts) {
    if (train.empty()) throw ParameterError("markov_train: empty training set");
    MarkovModel model;
    for (const auto& s : train) {
        const auto it = layouts.find(s.method_id);
        if (it == layouts.end()) continue;
        const auto& layout = it->second;
        const auto occurrences = resolve_occurrences(s.words, layout);
        constexpr std::size_t kNone = MarkovModel::kCategories;
        std::size_t prev_cat = kNone;
        bool started = false;
        for (const auto& occ : occurrences) {
            if (!occ) {
                prev_cat = kNone;
                continue;
            }
            const auto cat = MarkovModel::category_of(layout, *occ);
            if (!started) {
                model.observe_start(cat);
                started = true;
            } else if (prev_cat != kNone) {
                model.observe_transition(prev_cat, cat);
            }
            prev_cat = cat;
        }
        if (started) model.count_sequence();
    }
    return model;
}

std::vector<std::string> markov_predict(const MarkovModel& model, const StimulusLayout& layout,
                                        std::size_t n, const MarkovDecodeOptions& opts) {
    if (n == 0) throw ParameterError("markov_predict: n must be >= 1");
    std::mt19937_64 rng(opts.seed);
    std::vector<std::string> words;
    std::optional<std::size_t> prev_cat;

    while (words.size() < n) {
        // Earliest eligible token per category in this method.
        std::array<std::optional<std::size_t>, MarkovModel::kCategories> first_of{};
        for (std::size_t i = 0; i < layout.tokens.size(); ++i) {
            const auto& t = layout.tokens[i];
            if (!t.substantive()) continue;
            if (!words.empty() && t.lexeme == words.back()) continue;
            auto& slot = first_of[MarkovModel::category_of(layout, i)];
            if (!slot) slot = i;
        }

        std::array<double, MarkovModel::kCategories> weight{};
        double total = 0;
        for (std::size_t c = 0; c < MarkovModel::kCategories; ++c) {
            if (!first_of[c]) continue;
            weight[c] = prev_cat ? model.transition_probability(*prev_cat, c)
                                 : model.initial_probability(c);
            total += weight[c];
        }
        if (total == 0) break;

        std::optional<std::size_t> chosen;
        if (opts.sample) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
            double acc = 0;
            for (std::size_t c = 0; c < MarkovModel::kCategories; ++c) {
                if (!first_of[c]) continue;
                acc += weight[c];
                chosen = c;
                if (u < acc) break;
            }
        } else {
            for (std::size_t c = 0; c < MarkovModel::kCategories; ++c) {
                if (first_of[c] && (!chosen || weight[c] > weight[*chosen])) chosen = c;
            }
        }
        words.push_back(layout.tokens[*first_of[*chosen]].lexeme);
        prev_cat = chosen;
    }
    return words;
}

void write_predictions_jsonl(std::ostream& out, const std::vector<PredictionRecord>& records) {
    for (const auto& r : records) {
        nlohmann::json j;
        j["participant_id"] = r.participant_id;
        j["method_id"] = r.method_id;
        j["n"] = r.n;
        j["words"] = r.words;
        j["source"] = to_string(r.source);
        out << j.dump() << '\n';
    }
}

LoadedPredictions parse_external_predictions(std::istream& in, const Corpus& corpus,
                                             const std::string& source_name) {
    const auto known = trial_keys(corpus);
    LoadedPredictions out;
    std::vector<std::string> unknown;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        PredictionRecord r;
        try {
            const auto j = nlohmann::json::parse(line);
            r.participant_id = j.at("participant_id").get<std::string>();
            r.method_id = j.at("method_id").get<std::string>();
            r.words = j.at("words").get<std::vector<std::string>>();
            r.n = j.contains("n") && !j.at("n").is_null() ? j.at("n").get<std::size_t>() : r.words.size();
            r.source = j.contains("source") ? predictor_source_from_string(j.at("source").get<std::string>())
                                            : PredictorSource::external;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!known.count({r.participant_id, r.method_id})) {
            unknown.push_back("line " + std::to_string(line_no) + " (" + r.participant_id + ", " +
                              r.method_id + ")");
            continue;
        }
        if (r.words.size() > r.n) {
            out.warnings.push_back({"over-length", source_name + ":" + std::to_string(line_no) +
                                                       ": more words than n; truncated"});
            r.words.resize(r.n);
        }
        out.records.push_back(std::move(r));
    }
    if (!unknown.empty()) {
        std::string msg = source_name + ": unknown trial keys:";
        for (const auto& u : unknown) msg += "\n  " + u;
        throw ValidationError(msg);
    }
    return out;
}

LoadedPredictions load_external_predictions(const std::filesystem::path& path, const Corpus& corpus) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open predictions " + path.string());
    return parse_external_predictions(in, corpus, path.string());
}

LoadedPredictions parse_completions(std::istream& in, const SplitManifest& manifest,
                                    const Corpus& corpus, const std::string& source_name) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    if (lines.size() != manifest.test.size()) {
        throw ValidationError(source_name + ": " + std::to_string(lines.size()) +
                              " completions for " + std::to_string(manifest.test.size()) +
                              " manifest test trials");
    }

    const auto known = trial_keys(corpus);
    LoadedPredictions out;
    std::vector<std::string> unknown;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& key = manifest.test[i];
        if (!known.count({key.participant_id, key.method_id})) {
            unknown.push_back("line " + std::to_string(i + 1) + " (" + key.participant_id + ", " +
                              key.method_id + ")");
            continue;
        }
        auto parsed = parse_prediction(lines[i]);
        for (auto& w : parsed.warnings) {
            w.message = source_name + ":" + std::to_string(i + 1) + ": " + w.message;
            out.warnings.push_back(std::move(w));
        }
        PredictionRecord r;
        r.participant_id = key.participant_id;
        r.method_id = key.method_id;
        r.words = std::move(parsed.words);
        r.n = manifest.n ? *manifest.n : r.words.size();
        if (r.words.size() > r.n) r.words.resize(r.n);
        r.source = PredictorSource::external;
        out.records.push_back(std::move(r));
    }
    if (!unknown.empty()) {
        std::string msg = source_name + ": unknown trial keys:";
        for (const auto& u : unknown) msg += "\n  " + u;
        throw ValidationError(msg);
    }
    return out;
}

LoadedPredictions load_completions(const std::filesystem::path& path, const SplitManifest& manifest,
                                   const Corpus& corpus) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open completions " + path.string());
    return parse_completions(in, manifest, corpus, path.string());
}

}  // namespace gazepath
