#include "dpq/lut.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpq/parallel.hpp"

namespace dpq {

namespace lut_stats {
thread_local uint64_t table_reads = 0;
thread_local uint64_t asym_builds = 0;
void reset() {
    table_reads = 0;
    asym_builds = 0;
}
}  // namespace lut_stats

ClassLut build_class_lut(const DpqModel& model) {
    const ParamLayout& L = model.layout;
    ClassLut lut;
    lut.M = L.M;
    lut.K = L.K;
    lut.C = L.C;
    lut.tables.assign(static_cast<size_t>(L.M) * L.C * L.K, 0.0f);
    const auto b = model.classifier_b();
    lut.bias.assign(b.begin(), b.end());
    const auto W = model.classifier_w();  // index d*C + c, d in [0, M*D)
    for (int m = 0; m < L.M; ++m) {
        for (int c = 0; c < L.C; ++c) {
            for (int k = 0; k < L.K; ++k) {
                const auto row = model.codebook_row(m, k);
                double s = 0.0;
                for (int d = 0; d < L.D; ++d)
                    s += W[(static_cast<size_t>(m) * L.D + d) * L.C + c] * row[d];
                lut.tables[(static_cast<size_t>(m) * L.C + c) * L.K + k] =
                    static_cast<float>(s);
            }
        }
    }
    return lut;
}

std::vector<double> classify_code(std::span<const uint32_t> indices,
                                  const ClassLut& lut) {
    if (indices.size() != static_cast<size_t>(lut.M))
        throw std::invalid_argument("classify_code: wrong partition count");
    for (uint32_t z : indices) {
        if (z >= static_cast<uint32_t>(lut.K))
            throw std::invalid_argument("classify_code: index out of range");
    }
    std::vector<double> scores(lut.bias.begin(), lut.bias.end());
    for (int c = 0; c < lut.C; ++c) {
        double s = scores[c];
        for (int m = 0; m < lut.M; ++m)
            s += lut.tables[(static_cast<size_t>(m) * lut.C + c) * lut.K + indices[m]];
        scores[c] = s;
    }
    lut_stats::table_reads += static_cast<uint64_t>(lut.M) * lut.C;
    return scores;
}

std::vector<double> classify_code(const CompressedCode& code, const ClassLut& lut) {
    return classify_code(std::span<const uint32_t>(code.indices), lut);
}

SymLut build_sym_lut(const Codebook& cb) {
    cb.validate();
    SymLut lut;
    lut.M = cb.M;
    lut.K = cb.K;
    lut.tables.assign(static_cast<size_t>(cb.M) * cb.K * cb.K, 0.0f);
    for (int m = 0; m < cb.M; ++m) {
        for (int k1 = 0; k1 < cb.K; ++k1) {
            const auto a = cb.row(m, k1);
            for (int k2 = 0; k2 < cb.K; ++k2) {
                const auto b = cb.row(m, k2);
                double s = 0.0;
                for (int d = 0; d < cb.D; ++d) {
                    const double diff = a[d] - b[d];
                    s += diff * diff;
                }
                lut.tables[(static_cast<size_t>(m) * cb.K + k1) * cb.K + k2] =
                    static_cast<float>(s);
            }
        }
    }
    return lut;
}

double sym_distance(std::span<const uint32_t> zx, std::span<const uint32_t> zy,
                    const SymLut& lut) {
    if (zx.size() != static_cast<size_t>(lut.M) || zy.size() != zx.size())
        throw std::invalid_argument("sym_distance: code shape mismatch");
    double s = 0.0;
    for (int m = 0; m < lut.M; ++m) {
        if (zx[m] >= static_cast<uint32_t>(lut.K) || zy[m] >= static_cast<uint32_t>(lut.K))
            throw std::invalid_argument("sym_distance: index out of range");
        s += lut.tables[(static_cast<size_t>(m) * lut.K + zx[m]) * lut.K + zy[m]];
    }
    lut_stats::table_reads += static_cast<uint64_t>(lut.M);
    return s;
}

double sym_distance(const CompressedCode& x, const CompressedCode& y,
                    const SymLut& lut) {
    return sym_distance(std::span<const uint32_t>(x.indices),
                        std::span<const uint32_t>(y.indices), lut);
}

AsymLut build_asym_lut(std::span<const double> soft_x, const Codebook& cb) {
    if (soft_x.size() != static_cast<size_t>(cb.M) * cb.D)
        throw std::invalid_argument("build_asym_lut: query has dimension " +
                                    std::to_string(soft_x.size()) + ", expected " +
                                    std::to_string(cb.M * cb.D));
    AsymLut lut;
    lut.M = cb.M;
    lut.K = cb.K;
    lut.tables.assign(static_cast<size_t>(cb.M) * cb.K, 0.0f);
    for (int m = 0; m < cb.M; ++m) {
        const double* q = soft_x.data() + static_cast<size_t>(m) * cb.D;
        for (int k = 0; k < cb.K; ++k) {
            const auto row = cb.row(m, k);
            double s = 0.0;
            for (int d = 0; d < cb.D; ++d) {
                const double diff = row[d] - q[d];
                s += diff * diff;
            }
            lut.tables[static_cast<size_t>(m) * cb.K + k] = static_cast<float>(s);
        }
    }
    ++lut_stats::asym_builds;
    return lut;
}

double asym_distance(const AsymLut& lut, std::span<const uint32_t> zy) {
    if (zy.size() != static_cast<size_t>(lut.M))
        throw std::invalid_argument("asym_distance: code shape mismatch");
    double s = 0.0;
    for (int m = 0; m < lut.M; ++m) {
        if (zy[m] >= static_cast<uint32_t>(lut.K))
            throw std::invalid_argument("asym_distance: index out of range");
        s += lut.tables[static_cast<size_t>(m) * lut.K + zy[m]];
    }
    lut_stats::table_reads += static_cast<uint64_t>(lut.M);
    return s;
}

double asym_distance(const AsymLut& lut, const CompressedCode& y) {
    return asym_distance(lut, std::span<const uint32_t>(y.indices));
}

namespace {

// Scores every database record, then selects the k best by (distance,
// index). Distances are pure per-record functions, so chunked parallel
// evaluation is thread-count independent.
template <class DistFn>
std::vector<SearchHit> scan(const CodeSet& db, int k, int threads, DistFn&& dist) {
    if (db.count == 0) throw std::invalid_argument("search: empty database");
    if (k <= 0 || k > db.count)
        throw std::invalid_argument("search: k must be in [1, database size]");
    std::vector<double> distances(static_cast<size_t>(db.count));
    const std::vector<uint32_t> all = db.unpack_all();
    parallel_chunks(db.count, 4096, threads, [&](int64_t, int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            distances[i] = dist(std::span<const uint32_t>(
                all.data() + i * db.M, static_cast<size_t>(db.M)));
        }
    });
    std::vector<SearchHit> hits(static_cast<size_t>(db.count));
    for (int64_t i = 0; i < db.count; ++i) hits[i] = {i, distances[i]};
    auto better = [](const SearchHit& a, const SearchHit& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.index < b.index;
    };
    std::partial_sort(hits.begin(), hits.begin() + k, hits.end(), better);
    hits.resize(static_cast<size_t>(k));
    return hits;
}

}  // namespace

std::vector<SearchHit> rank_symmetric(const CompressedCode& query_code,
                                      const CodeSet& db, const SymLut& lut,
                                      int k, int threads) {
    return scan(db, k, threads, [&](std::span<const uint32_t> zy) {
        return sym_distance(std::span<const uint32_t>(query_code.indices), zy, lut);
    });
}

std::vector<SearchHit> rank_asymmetric(const AsymLut& query_lut, const CodeSet& db,
                                       int k, int threads) {
    return scan(db, k, threads,
                [&](std::span<const uint32_t> zy) { return asym_distance(query_lut, zy); });
}

std::vector<SearchHit> search(std::span<const double> query, const CodeSet& db,
                              const DpqModel& model, SearchMode mode, int k,
                              bool normalize, int threads) {
    if (db.M != model.layout.M || db.K != static_cast<uint32_t>(model.layout.K))
        throw std::invalid_argument("search: database geometry does not match model");
    const Codebook cb = model.codebook();
    if (mode == SearchMode::symmetric) {
        const SymLut lut = build_sym_lut(cb);
        return rank_symmetric(encode(query, model), db, lut, k, threads);
    }
    const std::vector<double> soft = query_soft(query, model, normalize);
    const AsymLut lut = build_asym_lut(soft, cb);
    return rank_asymmetric(lut, db, k, threads);
}

}  // namespace dpq
