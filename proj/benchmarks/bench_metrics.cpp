#include <benchmark/benchmark.h>

#include <random>

#include "gazepath/metrics.hpp"

namespace {

std::string random_sequence(std::mt19937_64& rng, std::size_t words) {
    static const std::vector<std::string> vocab{"public", "void", "int", "i", "=", "for", "return", "String",
                                                "length", "verbose", "parseFilter", "checkDelete", "null"};
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::vector<std::string> w(words);
    for (auto& x : w) x = vocab[pick(rng)];
    return gazepath::serialize_words(w);
}

void BM_Levenshtein(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto a = random_sequence(rng, static_cast<std::size_t>(state.range(0)));
    const auto b = random_sequence(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gazepath::levenshtein_similarity(a, b));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Levenshtein)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

void BM_Gestalt(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto a = random_sequence(rng, static_cast<std::size_t>(state.range(0)));
    const auto b = random_sequence(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gazepath::gestalt_similarity(a, b));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gestalt)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

void BM_ScoreAllN(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::vector<std::vector<std::string>> pred(256), ref(256);
    std::uniform_int_distribution<int> len(1, 8);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (int k = len(rng); k > 0; --k) pred[i].push_back(random_sequence(rng, 1));
        for (int k = len(rng); k > 0; --k) ref[i].push_back(random_sequence(rng, 1));
    }
    for (auto _ : state) {
        for (std::size_t i = 0; i < pred.size(); ++i) {
            for (std::size_t n = 1; n <= 4; ++n) benchmark::DoNotOptimize(gazepath::score(pred[i], ref[i], n));
        }
    }
    state.SetItemsProcessed(state.iterations() * 256 * 4);
}
BENCHMARK(BM_ScoreAllN);

}  // namespace

BENCHMARK_MAIN();
