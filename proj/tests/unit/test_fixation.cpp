#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gazepath/fixation.hpp"
#include "gazepath/synth.hpp"
#include "oracles.hpp"

using namespace gazepath;

namespace {

constexpr std::int64_t kPeriod60 = 16667;

GazeStream from_xs(const std::vector<double>& xs, std::int64_t period = kPeriod60, double y = 0.5) {
    GazeStream s{"p", "m", 1e6 / static_cast<double>(period), {}};
    for (std::size_t i = 0; i < xs.size(); ++i) s.samples.push_back({static_cast<std::int64_t>(i) * period, xs[i], y, true});
    return s;
}

// Normalized horizontal offset that subtends `deg` at the default geometry.
double norm_for_deg(double deg) {
    const ScreenGeometry g;
    return 2.0 * g.viewer_distance_mm * std::tan(deg * M_PI / 360.0) / g.width_mm;
}

}  // namespace

TEST_SUITE("fixation") {

TEST_CASE("filter config validation") {
    FilterConfig c;
    CHECK_NOTHROW(validate_filter_config(c));
    c.smoothing_window_samples = 4;
    CHECK_THROWS_AS(validate_filter_config(c), ParameterError);
    c = {};
    c.velocity_threshold_deg_s = 0;
    CHECK_THROWS_AS(validate_filter_config(c), ParameterError);
}

TEST_CASE("low-pass: identity window, constants, spike removal") {
    const auto s = from_xs({0.1, 0.4, 0.2, 0.9, 0.3});
    const auto id = low_pass(s, 1);
    for (std::size_t i = 0; i < s.samples.size(); ++i) CHECK(id.samples[i].x == s.samples[i].x);

    const auto flat = low_pass(from_xs(std::vector<double>(9, 0.37)), 5);
    for (const auto& smp : flat.samples) {
        CHECK(smp.x == 0.37);
        CHECK(smp.y == 0.5);
    }

    const auto spiked = low_pass(from_xs({0.5, 0.5, 0.7, 0.5, 0.5}), 3);
    CHECK(spiked.samples[2].x == 0.5);
    CHECK(spiked.samples[2].x == spiked.samples[1].x);
    CHECK(spiked.samples[2].x == spiked.samples[3].x);
}

TEST_CASE("low-pass rejects even or oversized windows and keeps invalid samples invalid") {
    auto s = from_xs({0.1, 0.2, 0.3});
    CHECK_THROWS_AS(low_pass(s, 2), ParameterError);
    CHECK_THROWS_AS(low_pass(s, 5), ParameterError);
    s.samples[1] = {s.samples[1].t_us, NAN, NAN, false};
    const auto f = low_pass(s, 3);
    CHECK_FALSE(f.samples[1].valid);
    CHECK(f.samples[0].valid);
}

TEST_CASE("angular velocity") {
    SUBCASE("identical positions") {
        const auto v = angular_velocity(from_xs({0.5, 0.5}), {});
        REQUIRE(v.size() == 1);
        CHECK(*v[0] == 0.0);
    }
    SUBCASE("10 mm over one 60 Hz period") {
        const ScreenGeometry g;
        const auto v = angular_velocity(from_xs({0.5, 0.5 + 10.0 / g.width_mm}), g);
        const double expected = (2.0 * std::atan(5.0 / 650.0) * 180.0 / M_PI) / (kPeriod60 * 1e-6);
        REQUIRE(v[0].has_value());
        CHECK(*v[0] == doctest::Approx(expected).epsilon(1e-9));
        CHECK(*v[0] == doctest::Approx(52.9).epsilon(1e-3));
    }
    SUBCASE("pair touching an invalid sample has no value") {
        auto s = from_xs({0.5, 0.5, 0.5});
        s.samples[1].valid = false;
        const auto v = angular_velocity(s, {});
        REQUIRE(v.size() == 2);
        CHECK_FALSE(v[0].has_value());
        CHECK_FALSE(v[1].has_value());
    }
    SUBCASE("fewer than two valid samples") { CHECK(angular_velocity(from_xs({0.5}), {}).empty()); }
}

TEST_CASE("I-VT classification") {
    const ScreenGeometry g;
    const FilterConfig cfg;
    SUBCASE("two seconds of constant gaze") {
        const auto fx = ivt_classify(from_xs(std::vector<double>(120, 0.4)), cfg, g);
        REQUIRE(fx.size() == 1);
        CHECK(fx[0].duration_us() == doctest::Approx(2'000'000).epsilon(0.01));
        CHECK(fx[0].centroid_x == doctest::Approx(0.4));
        CHECK(fx[0].sample_count == 120);
    }
    SUBCASE("alternating large jumps") {
        std::vector<double> xs;
        for (int i = 0; i < 120; ++i) xs.push_back(i % 2 ? 0.2 : 0.8);
        CHECK(ivt_classify(from_xs(xs), cfg, g).empty());
    }
    SUBCASE("dwell, one-sample saccade, dwell recovers both dwell points") {
        const auto layout = layout_method("fig", fixture::example_source());
        const std::size_t a = fixture::index_of(layout, "testNegativeParseCases");
        const std::size_t b = fixture::index_of(layout, "checkDelete");
        SynthConfig sc;
        const auto stream = generate(layout, {a, b}, sc, g);
        const auto fx = ivt_classify(stream, cfg, g);

        // Brute-force run scan over the raw velocities.
        const auto v = angular_velocity(stream, g);
        std::size_t runs = 0;
        std::size_t i = 0;
        while (i < stream.samples.size()) {
            std::size_t j = i;
            while (j + 1 < stream.samples.size() && v[j] && *v[j] < cfg.velocity_threshold_deg_s) ++j;
            const auto dur = stream.samples[j].t_us - stream.samples[i].t_us + kPeriod60;
            if (dur >= cfg.min_fixation_duration_ms * 1000) ++runs;
            i = j + 1;
        }
        REQUIRE(fx.size() == 2);
        CHECK(runs == 2);
        const auto& ta = layout.tokens[a].bbox;
        const auto& tb = layout.tokens[b].bbox;
        CHECK(fx[0].centroid_x * g.width_px == doctest::Approx(ta.center_x()));
        CHECK(fx[0].centroid_y * g.height_px == doctest::Approx(ta.center_y()));
        CHECK(fx[1].centroid_x * g.width_px == doctest::Approx(tb.center_x()));
        CHECK(fx[1].centroid_y * g.height_px == doctest::Approx(tb.center_y()));
    }
}

TEST_CASE("merging") {
    const ScreenGeometry g;
    const FilterConfig cfg;
    const double d = norm_for_deg(0.2);
    SUBCASE("40 ms and 0.2 degrees apart merge") {
        const std::vector<Fixation> in{{0, 200'000, 0.5, 0.5, 12}, {240'000, 440'000, 0.5 + d, 0.5, 12}};
        const auto out = merge_fixations(in, cfg, g);
        REQUIRE(out.size() == 1);
        CHECK(out[0].t_start_us == 0);
        CHECK(out[0].t_end_us == 440'000);
        CHECK(out[0].centroid_x == doctest::Approx(0.5 + d / 2));
        CHECK(out[0].sample_count == 24);
    }
    SUBCASE("500 ms apart stay separate") {
        const std::vector<Fixation> in{{0, 200'000, 0.5, 0.5, 12}, {700'000, 900'000, 0.5, 0.5, 12}};
        CHECK(merge_fixations(in, cfg, g) == in);
    }
    SUBCASE("far apart in space stay separate") {
        const std::vector<Fixation> in{{0, 200'000, 0.2, 0.5, 12}, {240'000, 440'000, 0.8, 0.5, 12}};
        CHECK(merge_fixations(in, cfg, g).size() == 2);
    }
    SUBCASE("empty") { CHECK(merge_fixations({}, cfg, g).empty()); }
    SUBCASE("out of order input") {
        const std::vector<Fixation> in{{500'000, 600'000, 0.5, 0.5, 6}, {0, 100'000, 0.5, 0.5, 6}};
        CHECK_THROWS_AS(merge_fixations(in, cfg, g), ParameterError);
    }
}

TEST_CASE("property: fixations from noisy synthetic gaze") {
    const ScreenGeometry g;
    const FilterConfig cfg;
    const auto layout = layout_method("fig", fixture::example_source());
    const double sep = required_separation_deg({}, cfg) * 1.25;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        CAPTURE(seed);
        SynthConfig sc;
        sc.seed = seed;
        sc.noise_sd_norm = 0.002;
        sc.sampling_rate_hz = seed % 2 ? 120.0 : 60.0;
        const auto script = sample_script(layout, 6, seed, g, std::max(sep, cfg.merge_max_dist_deg * 1.25));
        const auto stream = generate(layout, script, sc, g);

        // Every I-VT fixation spans only sub-threshold velocities of the smoothed stream.
        const auto smooth = low_pass(stream, cfg.smoothing_window_samples);
        const auto v = angular_velocity(smooth, g);
        for (const auto& f : ivt_classify(smooth, cfg, g)) {
            for (std::size_t i = 0; i + 1 < smooth.samples.size(); ++i) {
                if (smooth.samples[i].t_us >= f.t_start_us && smooth.samples[i + 1].t_us < f.t_end_us) {
                    REQUIRE(v[i].has_value());
                    CHECK(*v[i] < cfg.velocity_threshold_deg_s);
                }
            }
        }

        const auto fx = detect_fixations(stream, cfg, g);
        for (std::size_t i = 0; i < fx.size(); ++i) {
            CHECK(fx[i].t_end_us > fx[i].t_start_us);
            if (i) CHECK(fx[i].t_start_us >= fx[i - 1].t_end_us);
        }
        CHECK(merge_fixations(fx, cfg, g) == fx);
        CHECK(detect_fixations(stream, cfg, g) == fx);
    }
}

TEST_CASE("property: same trajectory at 60 and 120 Hz") {
    const ScreenGeometry g;
    const FilterConfig cfg;
    const auto layout = layout_method("fig", fixture::example_source());
    SynthConfig s60, s120;
    s120.sampling_rate_hz = 120.0;
    const double sep = std::max({required_separation_deg(s60, cfg), required_separation_deg(s120, cfg),
                                 cfg.merge_max_dist_deg}) * 1.25;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        CAPTURE(seed);
        const auto script = sample_script(layout, 5, seed, g, sep);
        const auto a = detect_fixations(generate(layout, script, s60, g), cfg, g);
        const auto b = detect_fixations(generate(layout, script, s120, g), cfg, g);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(normalized_distance_deg(a[i].centroid_x, a[i].centroid_y, b[i].centroid_x, b[i].centroid_y, g) < 0.25);
        }
    }
}

TEST_CASE("detect_fixations narrows the window for very short streams") {
    FilterConfig cfg;
    cfg.smoothing_window_samples = 7;
    cfg.min_fixation_duration_ms = 10;
    CHECK(detect_fixations(from_xs({0.5, 0.5, 0.5}), cfg, {}).size() == 1);
}

TEST_CASE("fixation JSONL round trip") {
    const std::vector<TrialFixations> trials{{"p1", "m1", {{0, 100'000, 0.25, 0.75, 6}, {150'000, 400'000, 0.5, 0.5, 15}}},
                                             {"p1", "m2", {}},
                                             {"p2", "m1", {{10, 200'010, 0.125, 0.0625, 12}}}};
    std::ostringstream out;
    write_fixations_jsonl(out, trials);
    std::istringstream in(out.str());
    const auto back = parse_fixations_jsonl(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].fixations == trials[0].fixations);
    CHECK(back[1].fixations == trials[2].fixations);
}

}
