#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dpq {

struct KMeansResult {
    int K = 0;
    int dim = 0;
    std::vector<double> centroids;        // K * dim
    std::vector<int32_t> assignments;     // one per point, nearest centroid
    double inertia = 0.0;                 // sum of squared distances
    std::vector<double> inertia_history;  // one entry per Lloyd iteration

    std::span<const double> centroid(int k) const {
        return {centroids.data() + static_cast<size_t>(k) * dim,
                static_cast<size_t>(dim)};
    }
};

// Lloyd's algorithm with k-means++ seeding. Deterministic for a given seed
// regardless of thread count: assignments are per-point and centroid sums
// are reduced over fixed-order chunks. Ties in the assignment step go to
// the lowest centroid index; an emptied cluster is re-seeded to the point
// farthest from its assigned centroid. Stops after max_iters iterations or
// as soon as assignments stop changing. Inertia is checked to be
// non-increasing every iteration.
KMeansResult kmeans(std::span<const double> data, int64_t n, int dim, int K,
                    int max_iters, uint64_t seed, int threads = 1);

}  // namespace dpq
