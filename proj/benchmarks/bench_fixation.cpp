#include <benchmark/benchmark.h>

#include "gazepath/fixation.hpp"
#include "gazepath/scanpath.hpp"
#include "gazepath/synth.hpp"

namespace {

struct Trial {
    gazepath::StimulusLayout layout;
    gazepath::GazeStream stream;
};

Trial make_trial(double rate, std::size_t script_length) {
    const auto methods = gazepath::synthetic_methods(1, 0);
    Trial t{gazepath::layout_method(methods[0].method_id, methods[0].source), {}};
    gazepath::SynthConfig cfg;
    cfg.sampling_rate_hz = rate;
    cfg.noise_sd_norm = 0.002;
    const gazepath::ScreenGeometry geom;
    const auto script = gazepath::sample_script(t.layout, script_length, 7, geom, 2.5);
    t.stream = gazepath::generate(t.layout, script, cfg, geom);
    return t;
}

void BM_DetectFixations(benchmark::State& state) {
    const auto t = make_trial(static_cast<double>(state.range(0)), 8);
    const gazepath::FilterConfig cfg;
    const gazepath::ScreenGeometry geom;
    for (auto _ : state) benchmark::DoNotOptimize(gazepath::detect_fixations(t.stream, cfg, geom));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.stream.samples.size()));
}
BENCHMARK(BM_DetectFixations)->Arg(60)->Arg(120)->Arg(1000);

void BM_LowPass(benchmark::State& state) {
    const auto t = make_trial(120, 8);
    for (auto _ : state) benchmark::DoNotOptimize(gazepath::low_pass(t.stream, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_LowPass)->Arg(3)->Arg(7)->Arg(15);

void BM_ExtractScanpath(benchmark::State& state) {
    const auto t = make_trial(120, 8);
    const gazepath::ScreenGeometry geom;
    const auto fx = gazepath::detect_fixations(t.stream, {}, geom);
    for (auto _ : state) benchmark::DoNotOptimize(gazepath::extract_scanpath("p", fx, t.layout, geom));
}
BENCHMARK(BM_ExtractScanpath);

void BM_LayoutMethod(benchmark::State& state) {
    const auto methods = gazepath::synthetic_methods(8, 1);
    for (auto _ : state) {
        for (const auto& m : methods) benchmark::DoNotOptimize(gazepath::layout_method(m.method_id, m.source));
    }
}
BENCHMARK(BM_LayoutMethod);

}  // namespace

BENCHMARK_MAIN();
