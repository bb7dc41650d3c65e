#include "dpq/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "dpq/rng.hpp"

namespace dpq {

VectorSet gen_synthetic(const SyntheticSpec& spec) {
    if (spec.num_classes <= 0 || spec.dim <= 0 || spec.points_per_class <= 0)
        throw std::invalid_argument("gen_synthetic: sizes must be positive");
    if (!(spec.cluster_spread > 0.0))
        throw std::invalid_argument("gen_synthetic: spread must be positive");

    Rng rng(spec.seed);
    // Class means are isotropic Gaussian draws with expected norm
    // kMeanScale, independent of dimension. The scale sits where classes
    // are cleanly separable in the full space yet overlap inside each
    // sub-vector partition, so supervised codes have room to beat
    // unsupervised k-means codebooks.
    constexpr double kMeanScale = 1.25;
    const double mean_sigma = kMeanScale / std::sqrt(static_cast<double>(spec.dim));
    std::vector<double> means(static_cast<size_t>(spec.num_classes) * spec.dim);
    for (double& v : means) v = mean_sigma * rng.gaussian();

    VectorSet vs;
    vs.count = static_cast<int64_t>(spec.num_classes) * spec.points_per_class;
    vs.dim = spec.dim;
    vs.data.resize(static_cast<size_t>(vs.count) * spec.dim);
    vs.labels.resize(static_cast<size_t>(vs.count));

    size_t at = 0;
    for (int c = 0; c < spec.num_classes; ++c) {
        const double* mu = means.data() + static_cast<size_t>(c) * spec.dim;
        for (int i = 0; i < spec.points_per_class; ++i) {
            const size_t idx = at++;
            vs.labels[idx] = c;
            double* row = vs.data.data() + idx * spec.dim;
            for (int d = 0; d < spec.dim; ++d)
                row[d] = mu[d] + spec.cluster_spread * rng.gaussian();
        }
    }
    return vs;
}

}  // namespace dpq
