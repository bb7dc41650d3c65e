#include <cmath>
#include <vector>

#include <stdexcept>
#include <string>

#include "doctest.h"
#include "dpq/kmeans.hpp"
#include "dpq/rng.hpp"

using namespace dpq;

namespace {

// two well separated blobs around +/- center
std::vector<double> two_blobs(int n_per, int dim, double center, double spread,
                              uint64_t seed, std::vector<int>* truth) {
    Rng rng(seed);
    std::vector<double> data;
    data.reserve(static_cast<size_t>(2 * n_per) * dim);
    for (int b = 0; b < 2; ++b) {
        for (int i = 0; i < n_per; ++i) {
            for (int d = 0; d < dim; ++d)
                data.push_back((b == 0 ? -center : center) + spread * rng.gaussian());
            if (truth) truth->push_back(b);
        }
    }
    return data;
}

}  // namespace

TEST_CASE("kmeans: K equal to N reaches zero inertia") {
    const std::vector<double> data{0.0, 1.0, 2.0, 3.0, 10.0, 11.0};
    const auto res = kmeans(data, 3, 2, 3, 50, 1);
    CHECK(res.inertia == doctest::Approx(0.0));
}

TEST_CASE("kmeans: K=1 gives the mean and the total variance") {
    const std::vector<double> data{1.0, 2.0, 3.0, 6.0};
    const auto res = kmeans(data, 4, 1, 1, 10, 9);
    CHECK(res.centroid(0)[0] == doctest::Approx(3.0));
    // sum of squared deviations from the mean
    double expect = 0.0;
    for (double v : data) expect += (v - 3.0) * (v - 3.0);
    CHECK(res.inertia == doctest::Approx(expect));
}

TEST_CASE("kmeans: separates two blobs") {
    std::vector<int> truth;
    const auto data = two_blobs(200, 4, 3.0, 0.3, 77, &truth);
    const auto res = kmeans(data, 400, 4, 2, 100, 5);
    // map cluster id to majority blob
    int agree = 0;
    const int flip = res.assignments[0] == truth[0] ? 0 : 1;
    for (size_t i = 0; i < truth.size(); ++i) {
        const int predicted = flip ? 1 - res.assignments[i] : res.assignments[i];
        if (predicted == truth[i]) ++agree;
    }
    CHECK(agree >= 396);  // >= 99%
}

TEST_CASE("kmeans: inertia history is non-increasing") {
    Rng rng(13);
    std::vector<double> data(500 * 3);
    for (auto& v : data) v = rng.uniform(-1, 1);
    const auto res = kmeans(data, 500, 3, 8, 100, 3);
    REQUIRE(!res.inertia_history.empty());
    for (size_t i = 1; i < res.inertia_history.size(); ++i)
        CHECK(res.inertia_history[i] <= res.inertia_history[i - 1] * (1 + 1e-12) + 1e-12);
    CHECK(res.inertia == res.inertia_history.back());
}

TEST_CASE("kmeans: assignments point to the nearest centroid") {
    Rng rng(21);
    std::vector<double> data(300 * 2);
    for (auto& v : data) v = rng.uniform(-1, 1);
    const auto res = kmeans(data, 300, 2, 5, 40, 8);
    for (int64_t i = 0; i < 300; ++i) {
        double best = 1e300;
        int best_k = 0;
        for (int k = 0; k < 5; ++k) {
            double s = 0;
            for (int d = 0; d < 2; ++d) {
                const double diff = data[i * 2 + d] - res.centroid(k)[d];
                s += diff * diff;
            }
            if (s < best) {
                best = s;
                best_k = k;
            }
        }
        CHECK(res.assignments[i] == best_k);
    }
}

TEST_CASE("kmeans: rejections") {
    const std::vector<double> data{1.0, 2.0};
    CHECK_THROWS_AS(kmeans(data, 2, 1, 3, 10, 0), std::invalid_argument);  // N < K
    CHECK_THROWS_AS(kmeans({}, 0, 1, 1, 10, 0), std::invalid_argument);    // empty
    CHECK_THROWS_AS(kmeans(data, 2, 1, 1, 0, 0), std::invalid_argument);   // max_iters
}

TEST_CASE("kmeans: identical result for any thread count") {
    Rng rng(33);
    std::vector<double> data(5000 * 4);
    for (auto& v : data) v = rng.gaussian();
    const auto a = kmeans(data, 5000, 4, 16, 30, 123, 1);
    const auto b = kmeans(data, 5000, 4, 16, 30, 123, 4);
    CHECK(a.centroids == b.centroids);
    CHECK(a.assignments == b.assignments);
    CHECK(a.inertia == b.inertia);
}
