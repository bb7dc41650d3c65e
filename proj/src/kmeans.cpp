#include "dpq/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dpq/parallel.hpp"
#include "dpq/rng.hpp"

namespace dpq {

namespace {

constexpr int64_t kChunk = 2048;  // fixed-order reduction granularity

double sq_dist(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

// k-means++ seeding: first centroid uniform, then proportional to the
// squared distance to the nearest chosen centroid.
std::vector<double> seed_centroids(std::span<const double> data, int64_t n,
                                   int dim, int K, Rng& rng) {
    std::vector<double> centroids(static_cast<size_t>(K) * dim);
    std::vector<double> dist2(static_cast<size_t>(n),
                              std::numeric_limits<double>::max());
    int64_t first = static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(n)));
    std::copy_n(data.data() + first * dim, dim, centroids.begin());
    for (int k = 1; k < K; ++k) {
        const double* prev = centroids.data() + static_cast<size_t>(k - 1) * dim;
        double total = 0.0;
        for (int64_t i = 0; i < n; ++i) {
            dist2[i] = std::min(dist2[i], sq_dist(data.data() + i * dim, prev, dim));
            total += dist2[i];
        }
        int64_t pick;
        if (total <= 0.0) {
            pick = static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(n)));
        } else {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (int64_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc > r) {
                    pick = i;
                    break;
                }
            }
        }
        std::copy_n(data.data() + pick * dim, dim,
                    centroids.begin() + static_cast<size_t>(k) * dim);
    }
    return centroids;
}

}  // namespace

KMeansResult kmeans(std::span<const double> data, int64_t n, int dim, int K,
                    int max_iters, uint64_t seed, int threads) {
    if (n <= 0) throw std::invalid_argument("kmeans: empty data");
    if (dim <= 0) throw std::invalid_argument("kmeans: bad dimension");
    if (K <= 0) throw std::invalid_argument("kmeans: K must be positive");
    if (n < K)
        throw std::invalid_argument("kmeans: need at least K points, got " +
                                    std::to_string(n) + " < " + std::to_string(K));
    if (max_iters < 1) throw std::invalid_argument("kmeans: max_iters must be >= 1");
    if (data.size() != static_cast<size_t>(n) * dim)
        throw std::invalid_argument("kmeans: data size mismatch");

    Rng rng(seed);
    KMeansResult res;
    res.K = K;
    res.dim = dim;
    res.centroids = seed_centroids(data, n, dim, K, rng);
    res.assignments.assign(static_cast<size_t>(n), 0);

    const int64_t nchunks = (n + kChunk - 1) / kChunk;
    std::vector<double> chunk_inertia(static_cast<size_t>(nchunks));
    std::vector<double> chunk_sums;
    std::vector<int64_t> chunk_counts;
    std::vector<int32_t> prev(static_cast<size_t>(n), -1);
    double prev_inertia = std::numeric_limits<double>::max();

    for (int iter = 0; iter < max_iters; ++iter) {
        // assignment step, parallel over points
        parallel_chunks(n, kChunk, threads, [&](int64_t c, int64_t lo, int64_t hi) {
            double local = 0.0;
            for (int64_t i = lo; i < hi; ++i) {
                const double* x = data.data() + i * dim;
                double best = std::numeric_limits<double>::max();
                int32_t best_k = 0;
                for (int k = 0; k < K; ++k) {
                    const double d =
                        sq_dist(x, res.centroids.data() + static_cast<size_t>(k) * dim, dim);
                    if (d < best) {
                        best = d;
                        best_k = static_cast<int32_t>(k);
                    }
                }
                res.assignments[i] = best_k;
                local += best;
            }
            chunk_inertia[c] = local;
        });
        double inertia = 0.0;
        for (int64_t c = 0; c < nchunks; ++c) inertia += chunk_inertia[c];

        if (iter > 0 && inertia > prev_inertia * (1.0 + 1e-9) + 1e-12)
            throw std::logic_error("kmeans: inertia increased at iteration " +
                                   std::to_string(iter));
        prev_inertia = inertia;
        res.inertia = inertia;
        res.inertia_history.push_back(inertia);

        if (res.assignments == prev) break;
        prev = res.assignments;
        // keep assignments consistent with the returned centroids: never
        // update after the final assignment pass
        if (iter == max_iters - 1) break;

        // update step: per-chunk partial sums, reduced in chunk order
        chunk_sums.assign(static_cast<size_t>(nchunks) * K * dim, 0.0);
        chunk_counts.assign(static_cast<size_t>(nchunks) * K, 0);
        parallel_chunks(n, kChunk, threads, [&](int64_t c, int64_t lo, int64_t hi) {
            double* sums = chunk_sums.data() + static_cast<size_t>(c) * K * dim;
            int64_t* counts = chunk_counts.data() + static_cast<size_t>(c) * K;
            for (int64_t i = lo; i < hi; ++i) {
                const int32_t k = res.assignments[i];
                const double* x = data.data() + i * dim;
                double* dst = sums + static_cast<size_t>(k) * dim;
                for (int d = 0; d < dim; ++d) dst[d] += x[d];
                ++counts[k];
            }
        });
        std::vector<double> sums(static_cast<size_t>(K) * dim, 0.0);
        std::vector<int64_t> counts(static_cast<size_t>(K), 0);
        for (int64_t c = 0; c < nchunks; ++c) {
            const double* src = chunk_sums.data() + static_cast<size_t>(c) * K * dim;
            const int64_t* cc = chunk_counts.data() + static_cast<size_t>(c) * K;
            for (size_t j = 0; j < sums.size(); ++j) sums[j] += src[j];
            for (int k = 0; k < K; ++k) counts[k] += cc[k];
        }
        for (int k = 0; k < K; ++k) {
            if (counts[k] > 0) {
                double* dst = res.centroids.data() + static_cast<size_t>(k) * dim;
                for (int d = 0; d < dim; ++d)
                    dst[d] = sums[static_cast<size_t>(k) * dim + d] / counts[k];
            }
        }
        // re-seed emptied clusters to the points farthest from their
        // assigned centroids (each point used at most once)
        std::vector<int64_t> used;
        for (int k = 0; k < K; ++k) {
            if (counts[k] != 0) continue;
            double far_d = -1.0;
            int64_t far_i = -1;
            for (int64_t i = 0; i < n; ++i) {
                if (std::find(used.begin(), used.end(), i) != used.end()) continue;
                const double d = sq_dist(
                    data.data() + i * dim,
                    res.centroids.data() + static_cast<size_t>(res.assignments[i]) * dim,
                    dim);
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            if (far_i >= 0) {
                std::copy_n(data.data() + far_i * dim, dim,
                            res.centroids.begin() + static_cast<size_t>(k) * dim);
                used.push_back(far_i);
            }
        }
    }
    return res;
}

}  // namespace dpq
