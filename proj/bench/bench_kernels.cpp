#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "explearn/kernels.hpp"

namespace {

using explearn::Embedding;

std::vector<Embedding> random_items(std::size_t n, std::size_t dim) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> d;
    std::vector<Embedding> out(n);
    for (auto& e : out) {
        e.values.resize(dim);
        for (auto& v : e.values) {
            v = d(rng);
        }
    }
    return out;
}

void BM_cosine_serial(benchmark::State& state) {
    const auto items = random_items(static_cast<std::size_t>(state.range(0)), 256);
    const auto query = random_items(1, 256)[0];
    for (auto _ : state) {
        benchmark::DoNotOptimize(explearn::kernels::cosine_scores_serial(query, items));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_cosine_parallel(benchmark::State& state) {
    const auto items = random_items(static_cast<std::size_t>(state.range(0)), 256);
    const auto query = random_items(1, 256)[0];
    for (auto _ : state) {
        benchmark::DoNotOptimize(explearn::kernels::cosine_scores(query, items));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_rank_above(benchmark::State& state) {
    const auto items = random_items(static_cast<std::size_t>(state.range(0)), 256);
    const auto scores = explearn::kernels::cosine_scores(items[0], items);
    for (auto _ : state) {
        benchmark::DoNotOptimize(explearn::kernels::rank_above(scores, 0.0));
    }
}

}  // namespace

BENCHMARK(BM_cosine_serial)->RangeMultiplier(8)->Range(64, 32768);
BENCHMARK(BM_cosine_parallel)->RangeMultiplier(8)->Range(64, 32768);
BENCHMARK(BM_rank_above)->Range(64, 32768);

BENCHMARK_MAIN();
