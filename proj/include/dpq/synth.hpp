#pragma once

#include <cstdint>

#include "dpq/types.hpp"

namespace dpq {

// Gaussian class-blob generator used by the benchmark harness. Class means
// are isotropic Gaussian draws at a fixed overall norm scale (independent
// of dimension); points scatter around their mean with per-coordinate
// deviation cluster_spread. Fully deterministic for a given seed.
struct SyntheticSpec {
    int num_classes = 0;
    int dim = 0;
    int points_per_class = 0;
    double cluster_spread = 0.0;
    uint64_t seed = 0;
};

VectorSet gen_synthetic(const SyntheticSpec& spec);

}  // namespace dpq
