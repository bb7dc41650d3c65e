#include <vector>

#include <stdexcept>
#include <string>

#include "doctest.h"
#include "dpq/kmeans.hpp"
#include "dpq/pq.hpp"
#include "dpq/rng.hpp"

using namespace dpq;

namespace {

VectorSet random_set(int64_t n, int dim, uint64_t seed) {
    VectorSet vs;
    vs.count = n;
    vs.dim = dim;
    vs.data.resize(static_cast<size_t>(n) * dim);
    Rng rng(seed);
    for (auto& v : vs.data) v = rng.uniform(-1, 1);
    return vs;
}

}  // namespace

TEST_CASE("pq_train: M=1 equals a direct kmeans run") {
    const auto data = random_set(200, 6, 4);
    const Codebook cb = pq_train(data, 1, 8, 50, 99);
    const KMeansResult km = kmeans(data.data, 200, 6, 8, 50, 99);
    CHECK(cb.data == km.centroids);
}

TEST_CASE("pq_train: independent halves match separate runs") {
    const auto data = random_set(300, 8, 10);
    const Codebook cb = pq_train(data, 2, 4, 50, 7);
    for (int m = 0; m < 2; ++m) {
        std::vector<double> half(300 * 4);
        for (int64_t i = 0; i < 300; ++i)
            std::copy_n(data.data.data() + i * 8 + m * 4, 4, half.begin() + i * 4);
        const KMeansResult km = kmeans(half, 300, 4, 4, 50, 7 + m);
        for (int k = 0; k < 4; ++k)
            for (int d = 0; d < 4; ++d)
                CHECK(cb.at(m, k, d) == km.centroids[k * 4 + d]);
    }
}

TEST_CASE("pq_train: rejects indivisible dimension") {
    const auto data = random_set(50, 7, 1);
    CHECK_THROWS_AS(pq_train(data, 2, 4, 10, 1), std::invalid_argument);
}

TEST_CASE("pq_encode: codebook row concatenation has zero error") {
    const auto data = random_set(64, 8, 21);
    const Codebook cb = pq_train(data, 4, 4, 30, 2);
    std::vector<double> x;
    const std::vector<uint32_t> want{3, 0, 2, 1};
    for (int m = 0; m < 4; ++m) {
        const auto row = cb.row(m, static_cast<int>(want[m]));
        x.insert(x.end(), row.begin(), row.end());
    }
    CHECK(pq_encode(x, cb).indices == want);
}

TEST_CASE("pq_encode: nearer centroid wins, ties to the lowest index") {
    Codebook cb(1, 2, 1);
    cb.row(0, 0)[0] = 0.0;
    cb.row(0, 1)[0] = 10.0;
    CHECK(pq_encode(std::vector<double>{4.0}, cb).indices[0] == 0);
    CHECK(pq_encode(std::vector<double>{5.0}, cb).indices[0] == 0);  // tie
    CHECK(pq_encode(std::vector<double>{6.0}, cb).indices[0] == 1);
}

TEST_CASE("pq_encode: minimizes over all reconstructions (exhaustive M=2 K=4)") {
    const auto data = random_set(64, 6, 31);
    const Codebook cb = pq_train(data, 2, 4, 30, 5);
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(6);
        for (auto& v : x) v = rng.uniform(-1, 1);
        const auto code = pq_encode(x, cb);
        const auto recon = reconstruct(code, cb);
        double got = 0;
        for (int d = 0; d < 6; ++d) got += (x[d] - recon[d]) * (x[d] - recon[d]);
        // exhaustive scan of all 16 codes
        double best = 1e300;
        for (uint32_t a = 0; a < 4; ++a) {
            for (uint32_t b = 0; b < 4; ++b) {
                const auto r = reconstruct(CompressedCode::from_indices({a, b}, 4), cb);
                double s = 0;
                for (int d = 0; d < 6; ++d) s += (x[d] - r[d]) * (x[d] - r[d]);
                best = std::min(best, s);
            }
        }
        CHECK(got == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("pq_encode: per-partition minimality property") {
    const auto data = random_set(128, 8, 41);
    const Codebook cb = pq_train(data, 2, 8, 30, 11);
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(8);
        for (auto& v : x) v = rng.uniform(-1, 1);
        const auto z = pq_encode(x, cb).indices;
        for (int m = 0; m < 2; ++m) {
            double chosen = 0;
            const auto zrow = cb.row(m, static_cast<int>(z[m]));
            for (int d = 0; d < 4; ++d)
                chosen += (x[m * 4 + d] - zrow[d]) * (x[m * 4 + d] - zrow[d]);
            for (int k = 0; k < 8; ++k) {
                const auto row = cb.row(m, k);
                double alt = 0;
                for (int d = 0; d < 4; ++d)
                    alt += (x[m * 4 + d] - row[d]) * (x[m * 4 + d] - row[d]);
                CHECK(chosen <= alt + 1e-12);
            }
        }
    }
}

TEST_CASE("quantization_error: zero on codebook points, analytic for K=1") {
    const auto data = random_set(32, 4, 51);
    const Codebook cb = pq_train(data, 2, 4, 30, 3);
    // build a set whose rows are exact reconstructions
    VectorSet exact;
    exact.count = 4;
    exact.dim = 4;
    for (uint32_t k = 0; k < 4; ++k) {
        const auto r = reconstruct(CompressedCode::from_indices({k, 3 - k}, 4), cb);
        exact.data.insert(exact.data.end(), r.begin(), r.end());
    }
    CHECK(quantization_error(exact, cb) == doctest::Approx(0.0));

    // single vector, single centroid
    VectorSet one;
    one.count = 1;
    one.dim = 2;
    one.data = {3.0, 4.0};
    Codebook c1(1, 1, 2);
    c1.row(0, 0)[0] = 0.0;
    c1.row(0, 0)[1] = 0.0;
    CHECK(quantization_error(one, c1) == doctest::Approx(25.0));

    VectorSet empty;
    empty.count = 0;
    empty.dim = 4;
    CHECK_THROWS_AS(quantization_error(empty, cb), std::invalid_argument);
}

TEST_CASE("quantization_error: weakly decreasing in K") {
    const auto data = random_set(600, 8, 61);
    double prev = 1e300;
    for (int K : {4, 8, 16}) {
        const Codebook cb = pq_train(data, 4, K, 50, 13);
        const double err = quantization_error(data, cb);
        CHECK(err <= prev + 1e-12);
        prev = err;
    }
}

TEST_CASE("pq_encode reconstruction matches the per-partition nearest-centroid oracle") {
    const auto data = random_set(200, 8, 81);
    const Codebook cb = pq_train(data, 4, 8, 40, 23);
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(8);
        for (auto& v : x) v = rng.uniform(-1, 1);
        const auto recon = reconstruct(pq_encode(x, cb), cb);
        double err = 0;
        for (int d = 0; d < 8; ++d) err += (x[d] - recon[d]) * (x[d] - recon[d]);
        // brute force: the quantization error is the sum over partitions of
        // the distance to the nearest centroid
        double want = 0;
        for (int m = 0; m < 4; ++m) {
            double best = 1e300;
            for (int k = 0; k < 8; ++k) {
                const auto row = cb.row(m, k);
                double s = 0;
                for (int d = 0; d < 2; ++d)
                    s += (x[m * 2 + d] - row[d]) * (x[m * 2 + d] - row[d]);
                best = std::min(best, s);
            }
            want += best;
        }
        CHECK(err == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("pq reconstruction error is additive over partitions") {
    const auto data = random_set(128, 6, 71);
    const Codebook cb = pq_train(data, 3, 4, 30, 17);
    Rng rng(9);
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform(-1, 1);
    const auto code = pq_encode(x, cb);
    const auto recon = reconstruct(code, cb);
    double total = 0;
    for (int d = 0; d < 6; ++d) total += (x[d] - recon[d]) * (x[d] - recon[d]);
    double parts = 0;
    for (int m = 0; m < 3; ++m) {
        const auto row = cb.row(m, static_cast<int>(code.indices[m]));
        for (int d = 0; d < 2; ++d)
            parts += (x[m * 2 + d] - row[d]) * (x[m * 2 + d] - row[d]);
    }
    CHECK(total == doctest::Approx(parts).epsilon(1e-12));
}
