#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dpq/code.hpp"
#include "dpq/codebook.hpp"
#include "dpq/model.hpp"

namespace dpq {

// Table entries are stored as 32-bit reals and accumulated in 64-bit.

// Per-class partial scores: tables[m][c][k] is the dot product of class c's
// classifier column (restricted to partition m) with codebook row C_m(k).
// Scoring a code then costs M table reads and M additions per class.
struct ClassLut {
    int M = 0, K = 0, C = 0;
    std::vector<float> tables;   // m*C*K + c*K + k
    std::vector<double> bias;    // C

    float at(int m, int c, int k) const {
        return tables[(static_cast<size_t>(m) * C + c) * K + k];
    }
};

ClassLut build_class_lut(const DpqModel& model);

// prediction_hard scores for a compressed code: b_c + sum_m table[m][c][z_m].
std::vector<double> classify_code(const CompressedCode& code,
                                  const ClassLut& lut);
std::vector<double> classify_code(std::span<const uint32_t> indices,
                                  const ClassLut& lut);

// Squared distances between every pair of centroids, per partition.
struct SymLut {
    int M = 0, K = 0;
    std::vector<float> tables;  // m*K*K + k1*K + k2

    float at(int m, int k1, int k2) const {
        return tables[(static_cast<size_t>(m) * K + k1) * K + k2];
    }
};

SymLut build_sym_lut(const Codebook& codebook);

// Squared distance between the reconstructions of two codes: M table reads.
double sym_distance(const CompressedCode& x, const CompressedCode& y,
                    const SymLut& lut);
double sym_distance(std::span<const uint32_t> zx, std::span<const uint32_t> zy,
                    const SymLut& lut);

// Query-specific tables: tables[m][k] is the squared distance between
// codebook row C_m(k) and the query's m-th soft sub-vector.
struct AsymLut {
    int M = 0, K = 0;
    std::vector<float> tables;  // m*K + k

    float at(int m, int k) const {
        return tables[static_cast<size_t>(m) * K + k];
    }
};

AsymLut build_asym_lut(std::span<const double> soft_x, const Codebook& codebook);

// Squared distance between the query's soft vector and the reconstruction
// of code y: M table reads.
double asym_distance(const AsymLut& lut, const CompressedCode& y);
double asym_distance(const AsymLut& lut, std::span<const uint32_t> zy);

enum class SearchMode { symmetric, asymmetric };

struct SearchHit {
    int64_t index = 0;
    double distance = 0;
};

// Ranks every database code against a prebuilt table, keeping the k best.
// Ties break toward the lower database index. The scan is chunked and may
// run on several threads; the result is thread-count independent.
std::vector<SearchHit> rank_symmetric(const CompressedCode& query_code,
                                      const CodeSet& database,
                                      const SymLut& lut, int k,
                                      int threads = 1);
std::vector<SearchHit> rank_asymmetric(const AsymLut& query_lut,
                                       const CodeSet& database, int k,
                                       int threads = 1);

// End-to-end search for one raw query vector: symmetric mode encodes the
// query and compares codes; asymmetric mode computes the soft
// representation, builds its tables once, then scans. normalize applies
// per-sub-vector L2 normalization to the query's soft representation (the
// model is expected to carry normalized codebook rows in that case).
std::vector<SearchHit> search(std::span<const double> query,
                              const CodeSet& database, const DpqModel& model,
                              SearchMode mode, int k, bool normalize = false,
                              int threads = 1);

// Operation counters used by the cost-shape tests; counted on every build.
namespace lut_stats {
extern thread_local uint64_t table_reads;
extern thread_local uint64_t asym_builds;
void reset();
}  // namespace lut_stats

}  // namespace dpq
