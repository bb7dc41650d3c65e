#include "dpq/pq.hpp"

#include <limits>
#include <stdexcept>
#include <string>

#include "dpq/kmeans.hpp"

namespace dpq {

Codebook pq_train(const VectorSet& data, int M, int K, int max_iters,
                  uint64_t seed, int threads) {
    data.validate();
    if (M <= 0) throw std::invalid_argument("pq_train: M must be positive");
    if (data.dim % M != 0)
        throw std::invalid_argument("pq_train: dimension " + std::to_string(data.dim) +
                                    " not divisible by M=" + std::to_string(M));
    const int D = data.dim / M;
    Codebook cb(M, K, D);
    std::vector<double> sub(static_cast<size_t>(data.count) * D);
    for (int m = 0; m < M; ++m) {
        for (int64_t i = 0; i < data.count; ++i) {
            const double* src = data.data.data() + i * data.dim + static_cast<size_t>(m) * D;
            std::copy_n(src, D, sub.begin() + i * D);
        }
        const KMeansResult km =
            kmeans(sub, data.count, D, K, max_iters, seed + static_cast<uint64_t>(m), threads);
        std::copy(km.centroids.begin(), km.centroids.end(),
                  cb.data.begin() + static_cast<size_t>(m) * K * D);
    }
    return cb;
}

CompressedCode pq_encode(std::span<const double> x, const Codebook& codebook) {
    if (x.size() != static_cast<size_t>(codebook.M) * codebook.D)
        throw std::invalid_argument("pq_encode: vector dimension " +
                                    std::to_string(x.size()) + " does not match M*D");
    std::vector<uint32_t> z(static_cast<size_t>(codebook.M));
    for (int m = 0; m < codebook.M; ++m) {
        const double* xm = x.data() + static_cast<size_t>(m) * codebook.D;
        double best = std::numeric_limits<double>::max();
        uint32_t best_k = 0;
        for (int k = 0; k < codebook.K; ++k) {
            const auto row = codebook.row(m, k);
            double d = 0.0;
            for (int j = 0; j < codebook.D; ++j) {
                const double diff = xm[j] - row[j];
                d += diff * diff;
            }
            if (d < best) {
                best = d;
                best_k = static_cast<uint32_t>(k);
            }
        }
        z[m] = best_k;
    }
    return CompressedCode::from_indices(std::move(z),
                                        static_cast<uint32_t>(codebook.K));
}

CodeSet pq_encode_set(const VectorSet& data, const Codebook& codebook) {
    CodeSet cs(codebook.M, static_cast<uint32_t>(codebook.K));
    for (int64_t i = 0; i < data.count; ++i) cs.append(pq_encode(data.row(i), codebook));
    return cs;
}

double quantization_error(const VectorSet& data, const Codebook& codebook) {
    if (data.count == 0) throw std::invalid_argument("quantization_error: empty set");
    if (data.dim != codebook.M * codebook.D)
        throw std::invalid_argument("quantization_error: dimension mismatch");
    double total = 0.0;
    for (int64_t i = 0; i < data.count; ++i) {
        const auto x = data.row(i);
        const auto recon = reconstruct(pq_encode(x, codebook), codebook);
        for (int d = 0; d < data.dim; ++d) {
            const double diff = x[d] - recon[d];
            total += diff * diff;
        }
    }
    return total / static_cast<double>(data.count);
}

}  // namespace dpq
