#pragma once

#include <cmath>
#include <vector>

#include "dpq/model.hpp"
#include "dpq/rng.hpp"

namespace dpq::test {

inline QuantizerConfig tiny_config(int M, int K, int D, int L, int hidden, int C,
                                   uint64_t seed = 1) {
    QuantizerConfig cfg;
    cfg.M = M;
    cfg.K = K;
    cfg.D = D;
    cfg.input_dim = L;
    cfg.hidden_dim = hidden;
    cfg.num_classes = C;
    cfg.seed = seed;
    return cfg;
}

// Seeded model with every parameter group populated at unit-friendly scale:
// affine weights at 1/sqrt(fan_in), codebook rows at 1/sqrt(D), small biases
// and centers. Representations and table entries then stay O(1), which the
// float-table comparisons rely on.
inline DpqModel random_model(const QuantizerConfig& cfg, uint64_t seed) {
    QuantizerConfig c = cfg;
    c.seed = seed;
    DpqModel model = make_model(c);
    Rng rng(mix_seed(seed, 0xABCD));
    for (int m = 0; m < c.M; ++m) {
        for (double& v : model.fc1_b(m)) v = rng.uniform(-0.2, 0.2);
        for (double& v : model.fc2_b(m)) v = rng.uniform(-0.2, 0.2);
    }
    for (double& v : model.classifier_b()) v = rng.uniform(-0.2, 0.2);
    const double cscale = 0.5 / std::sqrt(static_cast<double>(c.rep_dim()));
    for (double& v : model.centers()) v = rng.uniform(-cscale, cscale);
    return model;
}

inline std::vector<double> random_input(int dim, Rng& rng, double scale = 1.0) {
    std::vector<double> x(static_cast<size_t>(dim));
    for (double& v : x) v = rng.uniform(-scale, scale);
    return x;
}

}  // namespace dpq::test
