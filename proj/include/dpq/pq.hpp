#pragma once

#include <cstdint>
#include <span>

#include "dpq/code.hpp"
#include "dpq/codebook.hpp"
#include "dpq/types.hpp"

namespace dpq {

// Classical unsupervised product quantization: the input space is split
// into M contiguous sub-vectors and each partition is clustered
// independently with k-means. Partition m uses seed + m, so a single
// partition reproduces a direct kmeans() call bit for bit.
Codebook pq_train(const VectorSet& data, int M, int K, int max_iters,
                  uint64_t seed, int threads = 1);

// Nearest centroid per partition under squared Euclidean distance,
// ties to the lowest index.
CompressedCode pq_encode(std::span<const double> x, const Codebook& codebook);

CodeSet pq_encode_set(const VectorSet& data, const Codebook& codebook);

// Mean squared reconstruction error over the set.
double quantization_error(const VectorSet& data, const Codebook& codebook);

}  // namespace dpq
