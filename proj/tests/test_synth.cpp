#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dpq/synth.hpp"

using namespace dpq;

TEST_CASE("gen_synthetic: vanishing spread collapses each class onto its mean") {
    SyntheticSpec spec;
    spec.num_classes = 3;
    spec.dim = 8;
    spec.points_per_class = 10;
    spec.cluster_spread = 1e-9;
    spec.seed = 4;
    const VectorSet vs = gen_synthetic(spec);
    for (int c = 0; c < 3; ++c) {
        const auto first = vs.row(c * 10);
        for (int i = 1; i < 10; ++i) {
            const auto row = vs.row(c * 10 + i);
            for (int d = 0; d < 8; ++d)
                CHECK(std::abs(row[d] - first[d]) < 1e-7);
        }
    }
}

TEST_CASE("gen_synthetic: same seed gives bit-identical output") {
    SyntheticSpec spec;
    spec.num_classes = 4;
    spec.dim = 16;
    spec.points_per_class = 25;
    spec.cluster_spread = 0.3;
    spec.seed = 99;
    const VectorSet a = gen_synthetic(spec);
    const VectorSet b = gen_synthetic(spec);
    CHECK(a.data == b.data);
    CHECK(a.labels == b.labels);
    spec.seed = 100;
    CHECK(gen_synthetic(spec).data != a.data);
}

TEST_CASE("gen_synthetic: nearest class mean classifies spread-0.1 data") {
    SyntheticSpec spec;
    spec.num_classes = 10;
    spec.dim = 64;
    spec.points_per_class = 100;
    spec.cluster_spread = 0.1;
    spec.seed = 12;
    const VectorSet vs = gen_synthetic(spec);
    // empirical class means
    std::vector<double> mean(10 * 64, 0.0);
    for (int64_t i = 0; i < vs.count; ++i) {
        const auto row = vs.row(i);
        for (int d = 0; d < 64; ++d) mean[vs.labels[i] * 64 + d] += row[d];
    }
    for (double& v : mean) v /= 100.0;
    int64_t hits = 0;
    for (int64_t i = 0; i < vs.count; ++i) {
        const auto row = vs.row(i);
        double best = 1e300;
        int best_c = 0;
        for (int c = 0; c < 10; ++c) {
            double s = 0;
            for (int d = 0; d < 64; ++d) {
                const double diff = row[d] - mean[c * 64 + d];
                s += diff * diff;
            }
            if (s < best) {
                best = s;
                best_c = c;
            }
        }
        if (best_c == vs.labels[i]) ++hits;
    }
    CHECK(static_cast<double>(hits) / vs.count >= 0.99);
}

TEST_CASE("gen_synthetic: rejects degenerate specs") {
    SyntheticSpec spec;
    spec.num_classes = 2;
    spec.dim = 4;
    spec.points_per_class = 5;
    spec.cluster_spread = 0.0;  // spread must be positive
    spec.seed = 1;
    CHECK_THROWS_AS(gen_synthetic(spec), std::invalid_argument);
    spec.cluster_spread = 0.1;
    spec.dim = 0;
    CHECK_THROWS_AS(gen_synthetic(spec), std::invalid_argument);
}
