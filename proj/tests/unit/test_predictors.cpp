#include <doctest.h>

#include <set>
#include <sstream>

#include "gazepath/predictors.hpp"
#include "gazepath/synth.hpp"
#include "oracles.hpp"

using namespace gazepath;

namespace {

using Words = std::vector<std::string>;

StimulusLayout example() { return layout_method("31696447", fixture::example_source()); }

Corpus corpus_of(const std::vector<MethodSource>& methods, const std::vector<Scanpath>& scanpaths) {
    Corpus c;
    for (const auto& m : methods) c.layouts.emplace(m.method_id, layout_method(m.method_id, m.source));
    c.scanpaths = scanpaths;
    return c;
}

}  // namespace

TEST_SUITE("predictors") {

TEST_CASE("reading order") {
    const auto l = example();
    CHECK(reading_order_predict(l, 3) == Words{"public", "void", "testNegativeParseCases"});
    CHECK(reading_order_predict(l, 1) == Words{"public"});
    CHECK_THROWS_AS(reading_order_predict(layout_method("e", ""), 1), ParameterError);
    CHECK_THROWS_AS(reading_order_predict(layout_method("e", "{ ; }"), 1), ParameterError);
    CHECK(reading_order_predict(layout_method("d", "a a b"), 2) == Words{"a", "b"});
}

TEST_CASE("name first") {
    const auto l = example();
    CHECK(find_method_name(l) == fixture::index_of(l, "testNegativeParseCases"));
    CHECK(name_first_predict(l, 1).words == Words{"testNegativeParseCases"});
    const auto two = name_first_predict(l, 2);
    CHECK(two.words == Words{"testNegativeParseCases", "public"});
    CHECK(two.warnings.empty());
    CHECK(name_first_predict(l, 4).words == Words{"testNegativeParseCases", "public", "void", "verbose"});

    const auto plain = name_first_predict(layout_method("x", "int a = b + c;"), 2);
    CHECK(plain.words == Words{"int", "a"});
    REQUIRE(plain.warnings.size() == 1);
    CHECK(plain.warnings[0].code == "no-method-name");

    const auto annotated = layout_method("y", "@Test(timeout = 5) void run() {}");
    CHECK(annotated.tokens[*find_method_name(annotated)].lexeme == "run");
}

TEST_CASE("markov counting") {
    const auto l = example();
    const std::map<std::string, StimulusLayout> layouts{{l.method_id, l}};
    const std::vector<Scanpath> train{{"p1", l.method_id, {"testNegativeParseCases", "public"}},
                                      {"p2", l.method_id, {"testNegativeParseCases", "verbose", "i"}},
                                      {"p3", l.method_id, {"testNegativeParseCases"}}};
    const auto model = markov_train(train, layouts);
    const auto sig = MarkovModel::category(TokenKind::identifier, 0);
    CHECK(model.sequences() == 3);
    CHECK(model.initial_count(sig) == 3);
    for (std::size_t c = 0; c < MarkovModel::kCategories; ++c) {
        if (c != sig) CHECK(model.initial_probability(c) < model.initial_probability(sig));
    }
    CHECK(model.transition_count(sig, MarkovModel::category(TokenKind::keyword, 0)) == 1);
    CHECK(model.transition_count(sig, MarkovModel::category(TokenKind::identifier, 1)) == 1);
    CHECK_THROWS_AS(markov_train({}, layouts), ParameterError);
}

TEST_CASE("markov single short path is uniform over transitions") {
    const auto l = example();
    const auto model = markov_train({{"p", l.method_id, {"void"}}}, {{l.method_id, l}});
    CHECK(model.initial_count(MarkovModel::category(TokenKind::keyword, 0)) == 1);
    const double u = 1.0 / MarkovModel::kCategories;
    for (std::size_t a = 0; a < MarkovModel::kCategories; a += 7) {
        for (std::size_t b = 0; b < MarkovModel::kCategories; b += 5) CHECK(model.transition_probability(a, b) == doctest::Approx(u));
    }
}

TEST_CASE("markov greedy decode on a two-category toy model") {
    MarkovModel model;
    const auto ident0 = MarkovModel::category(TokenKind::identifier, 0);
    const auto kw0 = MarkovModel::category(TokenKind::keyword, 0);
    model.observe_start(ident0);
    model.observe_start(ident0);
    model.observe_transition(ident0, kw0);
    model.count_sequence();
    model.count_sequence();
    const auto l = example();
    const auto words = markov_predict(model, l, 2);
    CHECK(words == Words{"testNegativeParseCases", "public"});
    CHECK(markov_predict(model, l, 2) == words);
}

TEST_CASE("markov stops when the method runs out of tokens") {
    MarkovModel model;
    model.observe_start(MarkovModel::category(TokenKind::identifier, 0));
    const auto l = layout_method("t", "a");
    CHECK(markov_predict(model, l, 4) == Words{"a"});
}

TEST_CASE("property: baselines only emit lexemes of the target method and are deterministic") {
    const auto methods = synthetic_methods(12, 4);
    std::vector<Scanpath> train;
    std::map<std::string, StimulusLayout> layouts;
    for (const auto& m : methods) layouts.emplace(m.method_id, layout_method(m.method_id, m.source));
    for (std::size_t i = 0; i + 1 < methods.size(); ++i) {
        const auto& l = layouts.at(methods[i].method_id);
        train.push_back({"p", l.method_id, reading_order_predict(l, 5)});
    }
    const auto model = markov_train(train, layouts);
    const auto& held = layouts.at(methods.back().method_id);
    std::set<std::string> lexemes;
    for (const auto& t : held.tokens) lexemes.insert(t.lexeme);
    for (std::size_t n = 1; n <= 6; ++n) {
        for (const auto& w : {reading_order_predict(held, n), name_first_predict(held, n).words, markov_predict(model, held, n),
                              markov_predict(model, held, n, {true, n})}) {
            CHECK(w.size() <= n);
            CHECK_FALSE(w.empty());
            for (const auto& x : w) CHECK(lexemes.count(x) == 1);
            for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] != w[i - 1]);
        }
        CHECK(markov_predict(model, held, n, {true, 9}) == markov_predict(model, held, n, {true, 9}));
    }
}

TEST_CASE("occurrence resolution follows the previous word") {
    const auto l = layout_method("r", "x = 1;\ny = x;\nz = y;");
    const auto occ = resolve_occurrences({"y", "x", "q"}, l);
    CHECK(occ[0] == fixture::index_of(l, "y"));
    CHECK(occ[1] == fixture::index_of(l, "x", 1));
    CHECK_FALSE(occ[2].has_value());
}

TEST_CASE("external predictions") {
    const std::vector<MethodSource> methods{{"m1", "int a;"}, {"m2", "int b;"}};
    const auto c = corpus_of(methods, {{"p1", "m1", {"a"}}, {"p1", "m2", {"b"}}});

    std::istringstream good(R"({"participant_id":"p1","method_id":"m1","n":1,"words":["a","int"]})"
                            "\n"
                            R"({"participant_id":"p1","method_id":"m2","words":["b"]})"
                            "\n");
    const auto loaded = parse_external_predictions(good, c);
    REQUIRE(loaded.records.size() == 2);
    CHECK(loaded.records[0].words == Words{"a"});
    CHECK(loaded.records[0].source == PredictorSource::external);
    CHECK(loaded.records[1].n == 1);
    REQUIRE(loaded.warnings.size() == 1);
    CHECK(loaded.warnings[0].code == "over-length");

    std::istringstream bad(R"({"participant_id":"p1","method_id":"m1","words":[]})"
                           "\n"
                           R"({"participant_id":"p9","method_id":"m1","words":[]})"
                           "\n"
                           R"({"participant_id":"p1","method_id":"m7","words":[]})"
                           "\n");
    try {
        parse_external_predictions(bad, c);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("line 1") == std::string::npos);
    }
}

TEST_CASE("predictions JSONL round trip") {
    const auto c = corpus_of({{"m1", "int a;"}}, {{"p1", "m1", {"a"}}});
    const std::vector<PredictionRecord> recs{{"p1", "m1", 3, {"int", "a"}, PredictorSource::markov}};
    std::ostringstream out;
    write_predictions_jsonl(out, recs);
    std::istringstream in(out.str());
    const auto back = parse_external_predictions(in, c);
    REQUIRE(back.records.size() == 1);
    CHECK(back.records[0].words == recs[0].words);
    CHECK(back.records[0].n == 3);
    CHECK(back.records[0].source == PredictorSource::markov);
}

TEST_CASE("raw completions pair with manifest order") {
    std::vector<MethodSource> methods;
    std::vector<Scanpath> scanpaths;
    SplitManifest manifest;
    manifest.spec.kind = SplitKind::method_holdout;
    manifest.spec.test_id = "m0";
    manifest.n = 2;
    for (int p = 0; p < 25; ++p) {
        const std::string pid = "p" + std::to_string(100 + p);
        scanpaths.push_back({pid, "m0", {"a"}});
        manifest.test.push_back({pid, "m0"});
    }
    const auto c = corpus_of({{"m0", "int a = b;"}}, scanpaths);

    std::string text;
    for (int p = 0; p < 25; ++p) text += p == 3 ? "<s> a b c\n" : "<s> a b </s>\n";
    std::istringstream in(text);
    const auto loaded = parse_completions(in, manifest, c);
    REQUIRE(loaded.records.size() == 25);
    CHECK(loaded.records[0].words == Words{"a", "b"});
    CHECK(loaded.records[3].words == Words{"a", "b"});
    CHECK(loaded.records[24].participant_id == "p124");
    REQUIRE(loaded.warnings.size() == 1);
    CHECK(loaded.warnings[0].code == "truncated");

    std::istringstream short_file("<s> a </s>\n");
    CHECK_THROWS_AS(parse_completions(short_file, manifest, c), ValidationError);
}

TEST_CASE("predictor names") {
    for (const auto s : {PredictorSource::reading_order, PredictorSource::name_first, PredictorSource::markov, PredictorSource::external}) {
        CHECK(predictor_source_from_string(to_string(s)) == s);
    }
    CHECK_THROWS_AS(predictor_source_from_string("oracle"), ParameterError);
}

}
