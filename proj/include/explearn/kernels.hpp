#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "explearn/embedding.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace explearn::kernels {

/// Below this many items the parallel kernels fall back to the serial path.
inline constexpr std::size_t kParallelGrain = 256;

int max_threads();

/// Reference implementation: one similarity() call per item, in order.
std::vector<double> cosine_scores_serial(const Embedding& query, std::span<const Embedding> items);

/// Same result as cosine_scores_serial, bit for bit; items are scored in
/// parallel. Dimension mismatches are reported before any work starts.
std::vector<double> cosine_scores(const Embedding& query, std::span<const Embedding> items, int threads = 0);

/// Indices whose score is strictly above `threshold`, best first; equal
/// scores keep their original order.
std::vector<std::pair<std::size_t, double>> rank_above(std::span<const double> scores, double threshold);

/// Runs f(i) for i in [0, n). Iterations must be independent; results are
/// expected to be written by index so output order never depends on
/// scheduling.
template <class F>
void parallel_for(std::size_t n, F&& f, int threads = 0) {
#if defined(_OPENMP)
    const int nthreads = threads > 0 ? threads : max_threads();
    if (nthreads > 1 && n > 1 && !omp_in_parallel()) {
        const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
        for (long long i = 0; i < count; ++i) {
            f(static_cast<std::size_t>(i));
        }
        return;
    }
#else
    (void)threads;
#endif
    for (std::size_t i = 0; i < n; ++i) {
        f(i);
    }
}

}  // namespace explearn::kernels
