#include "explearn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace explearn {

bool Embedding::is_zero() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

double similarity(const Embedding& a, const Embedding& b) {
    if (a.dimension() != b.dimension()) {
        throw DimensionMismatch(a.dimension(), b.dimension());
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    const double cos = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(cos, -1.0, 1.0);
}

namespace kernels {

int max_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::vector<double> cosine_scores_serial(const Embedding& query, std::span<const Embedding> items) {
    std::vector<double> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        out.push_back(similarity(query, item));
    }
    return out;
}

std::vector<double> cosine_scores(const Embedding& query, std::span<const Embedding> items, int threads) {
    for (const auto& item : items) {
        if (item.dimension() != query.dimension()) {
            throw DimensionMismatch(query.dimension(), item.dimension());
        }
    }
    if (items.size() < kParallelGrain) {
        return cosine_scores_serial(query, items);
    }
    std::vector<double> out(items.size());
    parallel_for(items.size(), [&](std::size_t i) { out[i] = similarity(query, items[i]); }, threads);
    return out;
}

std::vector<std::pair<std::size_t, double>> rank_above(std::span<const double> scores, double threshold) {
    std::vector<std::pair<std::size_t, double>> ranked;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > threshold) {
            ranked.emplace_back(i, scores[i]);
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return ranked;
}

}  // namespace kernels
}  // namespace explearn
