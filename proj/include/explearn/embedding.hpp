#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace explearn {

struct Embedding {
    std::vector<double> values;

    std::size_t dimension() const { return values.size(); }
    bool is_zero() const;

    bool operator==(const Embedding&) const = default;
};

class DimensionMismatch : public std::invalid_argument {
public:
    DimensionMismatch(std::size_t a, std::size_t b)
        : std::invalid_argument("embedding dimensions differ: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

/// Cosine similarity in [-1, 1]; 0 when either vector is zero.
double similarity(const Embedding& a, const Embedding& b);

}  // namespace explearn
