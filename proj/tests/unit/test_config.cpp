#include <doctest.h>

#include <sstream>

#include "gazepath/config.hpp"
#include "oracles.hpp"

using namespace gazepath;
namespace fs = std::filesystem;

TEST_SUITE("config") {

TEST_CASE("defaults") {
    std::istringstream in("");
    const auto c = parse_config(in, "/base");
    CHECK(c.n_values == std::vector<std::size_t>{1, 2, 3, 4});
    CHECK(c.split_kinds.size() == 2);
    CHECK(c.output == fs::path("/base/out"));
    CHECK(c.gaze.size() == 2);
    CHECK_FALSE(c.prompt_n.has_value());
}

TEST_CASE("sections and relative paths") {
    std::istringstream in(R"(
[paths]
corpus = data/methods.jsonl
gaze = a.jsonl, /abs/b.jsonl
output = /tmp/results

[filter]
velocity_threshold_deg_s = 45
smoothing_window_samples = 5

[experiment]
n_values = 1, 3
split_kinds = method_holdout
prompt_n = 4

[scanpath]
include_comments = false
)");
    const auto c = parse_config(in, "/work");
    CHECK(c.corpus == fs::path("/work/data/methods.jsonl"));
    CHECK(c.gaze == std::vector<fs::path>{"/work/a.jsonl", "/abs/b.jsonl"});
    CHECK(c.output == fs::path("/tmp/results"));
    CHECK(c.filter.velocity_threshold_deg_s == 45.0);
    CHECK(c.filter.smoothing_window_samples == 5);
    CHECK(c.n_values == std::vector<std::size_t>{1, 3});
    CHECK(c.split_kinds == std::vector<SplitKind>{SplitKind::method_holdout});
    CHECK(c.prompt_n == std::optional<std::size_t>(4));
    CHECK_FALSE(c.scanpath.include_comments);
}

TEST_CASE("errors") {
    std::istringstream unknown("[filter]\nvelocity = 3\n");
    CHECK_THROWS_AS(parse_config(unknown, "."), ParseError);
    std::istringstream junk("[filter]\nvelocity_threshold_deg_s = fast\n");
    CHECK_THROWS_AS(parse_config(junk, "."), ParseError);
    std::istringstream zero("[experiment]\nn_values = 0, 2\n");
    CHECK_THROWS_AS(parse_config(zero, "."), Error);
    std::istringstream even("[filter]\nsmoothing_window_samples = 4\n");
    CHECK_THROWS_AS(parse_config(even, "."), Error);
}

TEST_CASE("overrides") {
    std::istringstream in("");
    auto c = parse_config(in, "/w");
    apply_override(c, "filter.merge_max_gap_ms=50", "/w");
    CHECK(c.filter.merge_max_gap_ms == 50.0);
    apply_override(c, "paths.output = res", "/w");
    CHECK(c.output == fs::path("/w/res"));
    CHECK_THROWS_AS(apply_override(c, "filter.nope=1", "/w"), ParseError);
    CHECK_THROWS_AS(apply_override(c, "filter.merge_max_gap_ms", "/w"), ParseError);
}

TEST_CASE("write then parse is lossless") {
    std::istringstream in("[synth]\nnoise_sd_norm = 0.0041\nseed = 12345678901\n[experiment]\nprompt_n = 2\n");
    const auto c = parse_config(in, "/w");
    std::ostringstream out;
    write_config(out, c, "/w");
    std::istringstream back_in(out.str());
    const auto back = parse_config(back_in, "/w");
    CHECK(back.synth.noise_sd_norm == c.synth.noise_sd_norm);
    CHECK(back.synth.seed == 12345678901ull);
    CHECK(back.prompt_n == c.prompt_n);
    CHECK(back.corpus == c.corpus);
    CHECK(back.gaze == c.gaze);
    CHECK(back.study.sampling_rates == c.study.sampling_rates);
    std::ostringstream again;
    write_config(again, back, "/w");
    CHECK(again.str() == out.str());
}

}

TEST_SUITE("config") {

TEST_CASE("shipped default config matches built-in defaults") {
    const auto path = fixture::data_dir().parent_path() / "configs" / "default.ini";
    const auto c = load_config(path);
    std::istringstream empty("");
    const auto d = parse_config(empty, path.parent_path());
    std::ostringstream a, b;
    write_config(a, c, path.parent_path());
    write_config(b, d, path.parent_path());
    CHECK(a.str() == b.str());
    CHECK(a.str() == fixture::read_file(path));
}

}
