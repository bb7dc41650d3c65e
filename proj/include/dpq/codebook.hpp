#pragma once

#include <span>
#include <vector>

namespace dpq {

// The M centroid matrices of a product quantizer. Matrix m holds K rows of
// dimension D; storage is partition-major, then row-major.
struct Codebook {
    int M = 0;
    int K = 0;
    int D = 0;
    std::vector<double> data;  // M * K * D

    Codebook() = default;
    Codebook(int m, int k, int d)
        : M(m), K(k), D(d), data(static_cast<size_t>(m) * k * d, 0.0) {}

    std::span<const double> row(int m, int k) const {
        return {data.data() + (static_cast<size_t>(m) * K + k) * D,
                static_cast<size_t>(D)};
    }
    std::span<double> row(int m, int k) {
        return {data.data() + (static_cast<size_t>(m) * K + k) * D,
                static_cast<size_t>(D)};
    }

    double at(int m, int k, int d) const {
        return data[(static_cast<size_t>(m) * K + k) * D + d];
    }

    // Throws std::invalid_argument on shape mismatch or non-finite entries.
    void validate() const;
};

}  // namespace dpq
