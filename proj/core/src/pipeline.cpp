#include "gazepath/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gazepath/metrics.hpp"
#include "gazepath/synth.hpp"
#include "parallel.hpp"

namespace gazepath {

namespace fs = std::filesystem;

fs::path OutputLayout::predictions(std::string_view predictor, SplitKind kind) const {
    return root / "predictions" / (std::string(predictor) + "_" + std::string(to_string(kind)) + ".jsonl");
}

fs::path OutputLayout::histogram(SplitKind kind, std::size_t n) const {
    return root / ("histogram_" + std::string(to_string(kind)) + "_n" + std::to_string(n) + ".csv");
}

fs::path OutputLayout::log(std::string_view command) const {
    return root / "logs" / (std::string(command) + ".log");
}

std::string split_dir_name(std::size_t index, const std::string& test_id) {
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%03zu_", index);
    std::string name = prefix;
    for (const char c : test_id) {
        const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        name += safe ? c : '_';
    }
    return name;
}

namespace {

void write_file(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << contents;
    if (!out) throw Error("write failed for " + path.string());
}

template <typename Writer>
void write_with(const fs::path& path, Writer&& writer) {
    std::ostringstream buf;
    writer(buf);
    write_file(path, buf.str());
}

std::string trial_name(const std::string& p, const std::string& m) { return "(" + p + ", " + m + ")"; }

void finish_log(const ExperimentConfig& cfg, const RunLog& log) {
    std::ostringstream out;
    out << "command: " << log.command << '\n';
    for (const auto& [name, value] : log.counts) out << name << ": " << value << '\n';
    out << "warnings: " << log.warnings.size() << '\n';
    for (const auto& w : log.warnings) out << "  [" << w.code << "] " << w.message << '\n';
    write_file(OutputLayout{cfg.output}.log(log.command), out.str());
}

void append(Warnings& into, const Warnings& from) { into.insert(into.end(), from.begin(), from.end()); }

std::map<std::string, StimulusLayout> load_layouts(const ExperimentConfig& cfg) {
    std::map<std::string, StimulusLayout> layouts;
    for (auto& m : load_method_corpus(cfg.corpus)) {
        try {
            auto l = layout_method(m.method_id, m.source, cfg.pane);
            layouts.emplace(m.method_id, std::move(l));
        } catch (const LexError& e) {
            throw Error("method " + m.method_id + ": " + e.what());
        }
    }
    return layouts;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

Corpus load_corpus(const ExperimentConfig& cfg) {
    Corpus corpus;
    corpus.layouts = load_layouts(cfg);
    corpus.scanpaths = load_scanpaths(OutputLayout{cfg.output}.scanpaths());
    return corpus;
}

RunLog cmd_synth(const ExperimentConfig& cfg, bool generate_study, const RunOptions& opts) {
    validate_config(cfg);
    RunLog log{"synth", {}, {}};
    if (cfg.gaze.size() != cfg.study.sampling_rates.size()) {
        throw ParameterError("synth: paths.gaze needs one file per study.sampling_rates entry (" +
                             std::to_string(cfg.study.sampling_rates.size()) + ")");
    }

    if (generate_study) {
        const auto study = synthetic_study(cfg.study, cfg.pane, cfg.screen, cfg.synth, cfg.filter);
        write_with(cfg.corpus, [&](std::ostream& o) { write_method_corpus(o, study.methods); });
        write_with(cfg.scripts, [&](std::ostream& o) { write_scripts_jsonl(o, study.scripts); });
        log.count("methods_written", study.methods.size());
    }

    const auto layouts = load_layouts(cfg);
    auto scripts = load_scripts(cfg.scripts);
    std::sort(scripts.begin(), scripts.end(), [](const ScriptSpec& a, const ScriptSpec& b) {
        return std::tie(a.participant_id, a.method_id) < std::tie(b.participant_id, b.method_id);
    });
    for (const auto& s : scripts) {
        if (!layouts.count(s.method_id)) {
            throw ValidationError("script " + trial_name(s.participant_id, s.method_id) +
                                  " names an unknown method");
        }
        const auto& rates = cfg.study.sampling_rates;
        if (std::find(rates.begin(), rates.end(), s.sampling_rate_hz) == rates.end()) {
            throw ValidationError("script " + trial_name(s.participant_id, s.method_id) +
                                  " uses a sampling rate not listed in study.sampling_rates");
        }
    }

    std::vector<GazeStream> streams(scripts.size());
    detail::parallel_for(scripts.size(), opts.jobs, [&](std::size_t i) {
        const auto& s = scripts[i];
        SynthConfig sc = cfg.synth;
        sc.sampling_rate_hz = s.sampling_rate_hz;
        sc.seed = mix_seed(cfg.synth.seed, i);
        try {
            streams[i] = generate(layouts.at(s.method_id), s.tokens, sc, cfg.screen, s.participant_id, cfg.filter);
        } catch (const Error& e) {
            throw Error(trial_name(s.participant_id, s.method_id) + ": " + e.what());
        }
    });

    for (std::size_t r = 0; r < cfg.study.sampling_rates.size(); ++r) {
        const double rate = cfg.study.sampling_rates[r];
        std::vector<GazeStream> at_rate;
        for (const auto& st : streams) {
            if (st.sampling_rate_hz == rate) at_rate.push_back(st);
        }
        write_with(cfg.gaze[r], [&](std::ostream& o) { write_gaze_jsonl(o, {rate, cfg.screen}, at_rate); });
        log.count("trials_at_" + std::to_string(static_cast<long long>(rate)) + "hz", at_rate.size());
    }
    log.count("trials", streams.size());
    finish_log(cfg, log);
    return log;
}

RunLog cmd_fixations(const ExperimentConfig& cfg, const RunOptions& opts) {
    validate_config(cfg);
    RunLog log{"fixations", {}, {}};

    std::vector<GazeStream> streams;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& path : cfg.gaze) {
        auto rec = load_gaze_streams(path);
        if (rec.streams.empty()) {
            log.warnings.push_back({"empty-gaze", path.string() + " contains no trials"});
            continue;
        }
        if (!(rec.header.screen == cfg.screen)) {
            log.warnings.push_back({"screen-mismatch", path.string() +
                                                           ": header screen differs from config; using config"});
        }
        for (auto& s : rec.streams) {
            if (!seen.emplace(s.participant_id, s.method_id).second) {
                throw ValidationError("trial " + trial_name(s.participant_id, s.method_id) +
                                      " appears in more than one gaze file");
            }
            streams.push_back(std::move(s));
        }
    }
    std::sort(streams.begin(), streams.end(), [](const GazeStream& a, const GazeStream& b) {
        return std::tie(a.participant_id, a.method_id) < std::tie(b.participant_id, b.method_id);
    });

    std::vector<TrialFixations> trials(streams.size());
    std::vector<Warnings> warnings(streams.size());
    detail::parallel_for(streams.size(), opts.jobs, [&](std::size_t i) {
        const auto& s = streams[i];
        warnings[i] = validate_stream(s);
        try {
            trials[i] = {s.participant_id, s.method_id, detect_fixations(s, cfg.filter, cfg.screen)};
        } catch (const Error& e) {
            throw Error(trial_name(s.participant_id, s.method_id) + ": " + e.what());
        }
    });

    std::size_t fixation_count = 0, without = 0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        append(log.warnings, warnings[i]);
        fixation_count += trials[i].fixations.size();
        if (trials[i].fixations.empty()) {
            ++without;
            log.warnings.push_back({"no-fixations", trial_name(trials[i].participant_id, trials[i].method_id) +
                                                        " produced no fixations"});
        }
    }
    write_with(OutputLayout{cfg.output}.fixations(), [&](std::ostream& o) { write_fixations_jsonl(o, trials); });
    log.count("trials", trials.size());
    log.count("fixations", fixation_count);
    log.count("trials_without_fixations", without);
    finish_log(cfg, log);
    return log;
}

RunLog cmd_scanpaths(const ExperimentConfig& cfg, const RunOptions& opts) {
    validate_config(cfg);
    RunLog log{"scanpaths", {}, {}};
    const OutputLayout out{cfg.output};
    const auto layouts = load_layouts(cfg);

    auto trials = load_fixations(out.fixations());
    std::sort(trials.begin(), trials.end(), [](const TrialFixations& a, const TrialFixations& b) {
        return std::tie(a.participant_id, a.method_id) < std::tie(b.participant_id, b.method_id);
    });
    for (const auto& t : trials) {
        if (!layouts.count(t.method_id)) {
            throw ValidationError("fixations for " + trial_name(t.participant_id, t.method_id) +
                                  " name an unknown method");
        }
    }

    std::vector<ScanpathExtraction> extracted(trials.size());
    detail::parallel_for(trials.size(), opts.jobs, [&](std::size_t i) {
        const auto& t = trials[i];
        extracted[i] = extract_scanpath(t.participant_id, t.fixations, layouts.at(t.method_id), cfg.screen,
                                        cfg.scanpath);
    });

    std::vector<Scanpath> scanpaths;
    std::size_t unmapped = 0, excluded = 0;
    for (auto& e : extracted) {
        append(log.warnings, e.warnings);
        unmapped += e.unmapped;
        if (e.scanpath.words.empty()) {
            ++excluded;
            continue;
        }
        scanpaths.push_back(std::move(e.scanpath));
    }
    write_with(out.scanpaths(), [&](std::ostream& o) { write_scanpaths_jsonl(o, scanpaths); });
    write_with(out.layouts(), [&](std::ostream& o) {
        for (const auto& [id, l] : layouts) write_layout_dump(o, l);
    });
    log.count("trials", trials.size());
    log.count("scanpaths", scanpaths.size());
    log.count("excluded_empty", excluded);
    log.count("unmapped_fixations", unmapped);
    finish_log(cfg, log);
    return log;
}

RunLog cmd_splits(const ExperimentConfig& cfg, const RunOptions& opts) {
    validate_config(cfg);
    RunLog log{"splits", {}, {}};
    const OutputLayout out{cfg.output};
    const auto corpus = load_corpus(cfg);
    append(log.warnings, validate_corpus(corpus));

    for (const auto kind : cfg.split_kinds) {
        const auto splits = make_splits(corpus, kind);
        const auto root = out.splits(kind);
        fs::remove_all(root);
        fs::create_directories(root);

        std::vector<Warnings> warnings(splits.size());
        detail::parallel_for(splits.size(), opts.jobs, [&](std::size_t i) {
            const auto data = materialize_split(corpus, splits[i], cfg.prompt_n);
            const auto dir = root / split_dir_name(i, splits[i].test_id);
            write_with(dir / "manifest.json", [&](std::ostream& o) { write_manifest(o, manifest_of(data)); });
            write_with(dir / "train.txt", [&](std::ostream& o) { write_prompt_file(o, data.train, true); });
            write_with(dir / "val.txt", [&](std::ostream& o) { write_prompt_file(o, data.val, true); });
            write_with(dir / "test.txt", [&](std::ostream& o) { write_prompt_file(o, data.test, false); });
            // Empty-scanpath warnings repeat in every split; keep the first split's.
            if (i == 0) warnings[i] = data.warnings;
        });
        for (const auto& w : warnings) append(log.warnings, w);
        log.count(std::string(to_string(kind)) + "_splits", splits.size());
    }
    finish_log(cfg, log);
    return log;
}

RunLog cmd_predict(const ExperimentConfig& cfg, PredictorSource baseline, const RunOptions& opts,
                   const MarkovDecodeOptions& decode) {
    validate_config(cfg);
    if (baseline == PredictorSource::external) {
        throw ParameterError("predict: 'external' is not a baseline; use ingest");
    }
    RunLog log{"predict_" + std::string(to_string(baseline)), {}, {}};
    const OutputLayout out{cfg.output};
    const auto corpus = load_corpus(cfg);
    const std::size_t n = *std::max_element(cfg.n_values.begin(), cfg.n_values.end());

    for (const auto kind : cfg.split_kinds) {
        const auto splits = make_splits(corpus, kind);
        std::vector<std::vector<PredictionRecord>> per_split(splits.size());
        std::vector<Warnings> warnings(splits.size());

        detail::parallel_for(splits.size(), opts.jobs, [&](std::size_t i) {
            const auto& spec = splits[i];
            std::optional<MarkovModel> model;
            if (baseline == PredictorSource::markov) {
                std::set<std::string> train_ids(spec.train_ids.begin(), spec.train_ids.end());
                train_ids.erase(spec.validation_id);
                std::vector<Scanpath> train;
                for (const auto& s : corpus.scanpaths) {
                    if (train_ids.count(split_key(s, kind)) && !s.words.empty()) train.push_back(s);
                }
                model = markov_train(train, corpus.layouts);
            }
            for (const auto& s : corpus.scanpaths) {
                if (split_key(s, kind) != spec.test_id || s.words.empty()) continue;
                const auto& layout = corpus.layouts.at(s.method_id);
                PredictionRecord r{s.participant_id, s.method_id, n, {}, baseline};
                switch (baseline) {
                    case PredictorSource::reading_order:
                        r.words = reading_order_predict(layout, n);
                        break;
                    case PredictorSource::name_first: {
                        auto p = name_first_predict(layout, n);
                        r.words = std::move(p.words);
                        append(warnings[i], p.warnings);
                        break;
                    }
                    case PredictorSource::markov: {
                        MarkovDecodeOptions d = decode;
                        d.seed = mix_seed(decode.seed, i);
                        r.words = markov_predict(*model, layout, n, d);
                        break;
                    }
                    case PredictorSource::external:
                        break;
                }
                per_split[i].push_back(std::move(r));
            }
        });

        std::vector<PredictionRecord> records;
        for (std::size_t i = 0; i < per_split.size(); ++i) {
            append(log.warnings, warnings[i]);
            for (auto& r : per_split[i]) records.push_back(std::move(r));
        }
        std::sort(records.begin(), records.end(), [](const PredictionRecord& a, const PredictionRecord& b) {
            return std::tie(a.participant_id, a.method_id) < std::tie(b.participant_id, b.method_id);
        });
        write_with(out.predictions(to_string(baseline), kind),
                   [&](std::ostream& o) { write_predictions_jsonl(o, records); });
        log.count(std::string(to_string(kind)) + "_predictions", records.size());
    }
    finish_log(cfg, log);
    return log;
}

RunLog cmd_ingest(const ExperimentConfig& cfg, SplitKind kind, const std::string& completions_name,
                  const fs::path& out_path) {
    validate_config(cfg);
    RunLog log{"ingest_" + std::string(to_string(kind)), {}, {}};
    const auto corpus = load_corpus(cfg);
    const auto root = OutputLayout{cfg.output}.splits(kind);
    if (!fs::is_directory(root)) throw Error("no split directory " + root.string() + "; run splits first");

    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());

    std::vector<PredictionRecord> records;
    for (const auto& dir : dirs) {
        const auto manifest = load_manifest(dir / "manifest.json");
        auto loaded = load_completions(dir / completions_name, manifest, corpus);
        append(log.warnings, loaded.warnings);
        for (auto& r : loaded.records) records.push_back(std::move(r));
    }
    std::sort(records.begin(), records.end(), [](const PredictionRecord& a, const PredictionRecord& b) {
        return std::tie(a.participant_id, a.method_id) < std::tie(b.participant_id, b.method_id);
    });
    write_with(out_path, [&](std::ostream& o) { write_predictions_jsonl(o, records); });
    log.count("splits", dirs.size());
    log.count("predictions", records.size());
    finish_log(cfg, log);
    return log;
}

RunLog cmd_score(const ExperimentConfig& cfg, const std::vector<std::pair<SplitKind, fs::path>>& predictions,
                 const RunOptions& opts) {
    validate_config(cfg);
    if (predictions.empty()) throw ParameterError("score: no predictions given");
    RunLog log{"score", {}, {}};
    const OutputLayout out{cfg.output};
    const auto corpus = load_corpus(cfg);

    std::vector<const Scanpath*> references;
    for (const auto& s : corpus.scanpaths) {
        if (!s.words.empty()) references.push_back(&s);
    }
    std::sort(references.begin(), references.end(), [](const Scanpath* a, const Scanpath* b) {
        return std::tie(a->participant_id, a->method_id) < std::tie(b->participant_id, b->method_id);
    });

    std::vector<ScoredTrial> all_scores;
    std::set<SplitKind> kinds_seen;
    for (const auto& [kind, path] : predictions) {
        if (!kinds_seen.insert(kind).second) {
            throw ParameterError("score: more than one predictions file for " + std::string(to_string(kind)));
        }
        auto loaded = load_external_predictions(path, corpus);
        if (loaded.records.empty()) throw ValidationError("score: " + path.string() + " holds no predictions");
        append(log.warnings, loaded.warnings);

        std::map<std::pair<std::string, std::string>, std::vector<std::string>> by_trial;
        for (auto& r : loaded.records) {
            if (!by_trial.emplace(std::make_pair(r.participant_id, r.method_id), std::move(r.words)).second) {
                throw ValidationError("score: duplicate prediction for " + trial_name(r.participant_id, r.method_id) +
                                      " in " + path.string());
            }
        }

        std::size_t missing = 0;
        std::vector<std::vector<ScoredTrial>> rows(references.size());
        std::vector<const std::vector<std::string>*> predicted(references.size());
        static const std::vector<std::string> kEmpty;
        for (std::size_t i = 0; i < references.size(); ++i) {
            const auto it = by_trial.find({references[i]->participant_id, references[i]->method_id});
            predicted[i] = it == by_trial.end() ? &kEmpty : &it->second;
            if (it == by_trial.end()) ++missing;
        }
        detail::parallel_for(references.size(), opts.jobs, [&](std::size_t i) {
            const auto& ref = *references[i];
            for (const auto n : cfg.n_values) {
                rows[i].push_back({kind, split_key(ref, kind), ref.participant_id, ref.method_id,
                                   score(*predicted[i], ref.words, n)});
            }
        });
        if (missing) {
            log.warnings.push_back({"missing-prediction", path.string() + ": " + std::to_string(missing) +
                                                              " reference trials have no prediction; scored as empty"});
        }
        for (auto& r : rows) {
            for (auto& s : r) all_scores.push_back(std::move(s));
        }
        log.count(std::string(to_string(kind)) + "_scored_trials", references.size());
    }

    std::sort(all_scores.begin(), all_scores.end(), [](const ScoredTrial& a, const ScoredTrial& b) {
        return std::tie(a.experiment, a.participant_id, a.method_id, a.scores.n) <
               std::tie(b.experiment, b.participant_id, b.method_id, b.scores.n);
    });
    const auto cells = aggregate(all_scores);
    write_with(out.scores(), [&](std::ostream& o) { write_scores_csv(o, all_scores); });
    write_with(out.report(), [&](std::ostream& o) { write_report_csv(o, cells, cfg.n_values); });
    write_with(out.report_long(), [&](std::ostream& o) { write_report_long_csv(o, cells); });

    for (const auto kind : kinds_seen) {
        for (const auto n : cfg.n_values) {
            std::vector<double> lev;
            for (const auto& s : all_scores) {
                if (s.experiment == kind && s.scores.n == n) lev.push_back(s.scores.levenshtein);
            }
            const auto bins = histogram(lev);
            write_with(out.histogram(kind, n), [&](std::ostream& o) { write_histogram_csv(o, bins); });
        }
    }
    log.count("scores", all_scores.size());
    finish_log(cfg, log);
    return log;
}

}  // namespace gazepath
