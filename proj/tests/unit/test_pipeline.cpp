#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>

#include "gazepath/metrics.hpp"
#include "gazepath/pipeline.hpp"
#include "oracles.hpp"

using namespace gazepath;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const fs::path& dir) {
    ExperimentConfig c;
    c.corpus = dir / "methods.jsonl";
    c.scripts = dir / "scripts.jsonl";
    c.gaze = {dir / "gaze_60hz.jsonl", dir / "gaze_120hz.jsonl"};
    c.output = dir / "out";
    c.study.participants = 5;
    c.study.methods = 8;
    c.study.methods_per_participant = 4;
    c.synth.seed = 3;
    c.study.seed = 3;
    return c;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = fixture::read_file(e.path());
    }
    return files;
}

void run_through_scanpaths(const ExperimentConfig& c, std::size_t jobs) {
    cmd_synth(c, true, {jobs});
    cmd_fixations(c, {jobs});
    cmd_scanpaths(c, {jobs});
}

bool has_code(const RunLog& log, std::string_view code) {
    for (const auto& w : log.warnings) if (w.code == code) return true;
    return false;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("split directory names") {
    CHECK(split_dir_name(3, "p04") == "003_p04");
    CHECK(split_dir_name(12, "a/b c") == "012_a_b_c");
}

TEST_CASE("synth through scanpaths on a small study") {
    fixture::TempDir tmp("pipe");
    const auto c = small_config(tmp.path());
    run_through_scanpaths(c, 2);
    const OutputLayout out{c.output};
    const auto fix = fixture::read_file(out.fixations());
    CHECK_FALSE(fix.empty());
    const auto scan = load_scanpaths(out.scanpaths());
    CHECK(scan.size() == 20);
    for (std::size_t i = 1; i < scan.size(); ++i) {
        CHECK(std::tie(scan[i - 1].participant_id, scan[i - 1].method_id) < std::tie(scan[i].participant_id, scan[i].method_id));
    }
    // Zero-noise scripts come back exactly.
    const auto scripts = load_scripts(c.scripts);
    const auto corpus = load_corpus(c);
    for (std::size_t i = 0; i < scripts.size(); ++i) {
        const auto& l = corpus.layouts.at(scripts[i].method_id);
        std::vector<std::string> expected;
        for (const auto t : scripts[i].tokens) expected.push_back(l.tokens[t].lexeme);
        CHECK(scan[i].words == expected);
    }
    CHECK(fs::exists(out.log("fixations")));

    // Rerunning gives identical bytes.
    const auto before = snapshot(c.output);
    cmd_fixations(c, {3});
    cmd_scanpaths(c, {1});
    CHECK(snapshot(c.output) == before);
}

TEST_CASE("empty gaze file") {
    fixture::TempDir tmp("empty");
    auto c = small_config(tmp.path());
    fixture::write_file(c.gaze[0], "");
    c.gaze.resize(1);
    const auto log = cmd_fixations(c);
    CHECK(has_code(log, "empty-gaze"));
    CHECK(fixture::read_file(OutputLayout{c.output}.fixations()).empty());
}

TEST_CASE("trial with only unmappable fixations is excluded and logged") {
    fixture::TempDir tmp("unmapped");
    const auto c = small_config(tmp.path());
    run_through_scanpaths(c, 1);
    const OutputLayout out{c.output};
    auto trials = load_fixations(out.fixations());
    trials.push_back({"zz", trials.front().method_id, {{0, 300'000, 0.97, 0.97, 18}}});
    std::ofstream f(out.fixations());
    write_fixations_jsonl(f, trials);
    f.close();
    const auto log = cmd_scanpaths(c);
    CHECK(has_code(log, "empty-scanpath"));
    CHECK(load_scanpaths(out.scanpaths()).size() == 20);
    CHECK(fixture::read_file(out.log("scanpaths")).find("excluded_empty: 1") != std::string::npos);
}

TEST_CASE("splits, baselines and scoring") {
    fixture::TempDir tmp("score");
    const auto c = small_config(tmp.path());
    run_through_scanpaths(c, 2);
    cmd_splits(c, {2});
    const OutputLayout out{c.output};

    std::size_t dirs = 0;
    for (const auto& e : fs::directory_iterator(out.splits(SplitKind::participant_holdout))) {
        ++dirs;
        for (const char* name : {"manifest.json", "train.txt", "val.txt", "test.txt"}) CHECK(fs::exists(e.path() / name));
    }
    CHECK(dirs == 5);

    SUBCASE("self-scoring gives perfect means") {
        // Reference scanpaths written as predictions.
        const auto corpus = load_corpus(c);
        std::vector<PredictionRecord> recs;
        for (const auto& s : corpus.scanpaths) recs.push_back({s.participant_id, s.method_id, s.words.size(), s.words, PredictorSource::external});
        const auto path = tmp.path() / "self.jsonl";
        std::ofstream f(path);
        write_predictions_jsonl(f, recs);
        f.close();
        cmd_score(c, {{SplitKind::participant_holdout, path}, {SplitKind::method_holdout, path}});
        const auto report = fixture::read_file(out.report());
        CHECK(report ==
              "experiment,levenshtein_n1,levenshtein_n2,levenshtein_n3,levenshtein_n4,gestalt_n1,gestalt_n2,gestalt_n3,gestalt_n4\n"
              "participant-holdout,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000\n"
              "method-holdout,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000\n");
        CHECK(count_lines(fixture::read_file(out.scores())) == 1 + 2 * 4 * 20);
        const auto hist = fixture::read_file(out.histogram(SplitKind::method_holdout, 2));
        CHECK(hist.substr(hist.rfind('\n', hist.size() - 2) + 1) == "1,1,20\n");
    }

    SUBCASE("empty predictions are an error; missing ones are warned") {
        const auto empty = tmp.path() / "empty.jsonl";
        fixture::write_file(empty, "");
        CHECK_THROWS_AS(cmd_score(c, {{SplitKind::participant_holdout, empty}}), ValidationError);
        CHECK_THROWS_AS(cmd_score(c, {}), ParameterError);
        const auto one = tmp.path() / "one.jsonl";
        const auto corpus = load_corpus(c);
        const auto& s = corpus.scanpaths.front();
        std::ofstream f(one);
        write_predictions_jsonl(f, {{s.participant_id, s.method_id, 4, {s.words.front()}, PredictorSource::external}});
        f.close();
        CHECK(has_code(cmd_score(c, {{SplitKind::participant_holdout, one}}), "missing-prediction"));
    }

    SUBCASE("baselines fill the report grid") {
        for (const auto b : {PredictorSource::reading_order, PredictorSource::name_first, PredictorSource::markov}) {
            cmd_predict(c, b, {2});
            std::vector<std::pair<SplitKind, fs::path>> preds;
            for (const auto k : c.split_kinds) preds.emplace_back(k, out.predictions(to_string(b), k));
            cmd_score(c, preds, {2});
            const auto report = fixture::read_file(out.report());
            CHECK(count_lines(report) == 3);
            CHECK(report.find("nan") == std::string::npos);
        }
        CHECK_THROWS_AS(cmd_predict(c, PredictorSource::external), ParameterError);
    }

    SUBCASE("completions ingested through manifests") {
        const auto corpus = load_corpus(c);
        std::map<std::pair<std::string, std::string>, std::vector<std::string>> ref;
        for (const auto& s : corpus.scanpaths) ref[{s.participant_id, s.method_id}] = s.words;
        for (const auto& e : fs::directory_iterator(out.splits(SplitKind::method_holdout))) {
            const auto m = load_manifest(e.path() / "manifest.json");
            std::string text;
            for (const auto& k : m.test) text += "<s> " + serialize_words(ref.at({k.participant_id, k.method_id})) + " </s>\n";
            fixture::write_file(e.path() / "completions.txt", text);
        }
        const auto dest = out.predictions("external", SplitKind::method_holdout);
        const auto log = cmd_ingest(c, SplitKind::method_holdout, "completions.txt", dest);
        CHECK(log.warnings.empty());
        cmd_score(c, {{SplitKind::method_holdout, dest}});
        CHECK(fixture::read_file(out.report()).find("\nmethod-holdout,1.000000,1.000000,1.000000,1.000000,") != std::string::npos);
    }
}

TEST_CASE("outputs do not depend on the number of jobs") {
    fixture::TempDir a("jobs1"), b("jobs4");
    std::map<std::string, std::string> snaps[2];
    int k = 0;
    for (const auto* dir : {&a, &b}) {
        const auto c = small_config(dir->path());
        const std::size_t jobs = k == 0 ? 1 : 4;
        run_through_scanpaths(c, jobs);
        cmd_splits(c, {jobs});
        cmd_predict(c, PredictorSource::markov, {jobs});
        const OutputLayout out{c.output};
        cmd_score(c, {{SplitKind::participant_holdout, out.predictions("markov", SplitKind::participant_holdout)},
                      {SplitKind::method_holdout, out.predictions("markov", SplitKind::method_holdout)}},
                  {jobs});
        for (auto& [name, body] : snapshot(c.output)) {
            if (name.rfind("logs", 0) == 0) continue;  // logs mention absolute paths
            snaps[k][name] = body;
        }
        ++k;
    }
    CHECK(snaps[0].size() > 20);
    CHECK(snaps[0] == snaps[1]);
}

}
