#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dpq {

// Weights of the individual training loss terms. All must be nonnegative.
struct LossWeights {
    double softmax = 1.0;
    double central = 0.5;
    double gini_batch = 0.1;
    double gini_sample = 0.1;
    double weight_decay = 5e-4;
};

// Hyperparameters of a product-quantized model: the code geometry
// (M partitions, K clusters each, D-dimensional centroids), the network
// shape, the loss weights and the training schedule.
struct QuantizerConfig {
    int M = 8;           // partition count
    int K = 256;         // clusters per partition, power of two
    int D = 0;           // centroid dimension per partition
    int input_dim = 0;   // raw input vector dimension (L)
    int hidden_dim = 128;
    int num_classes = 0;
    int front_dim = 0;   // width of the optional front layer; 0 = none

    LossWeights weights;
    uint64_t seed = 0;

    // schedule
    int epochs = 100;
    int batch_size = 64;
    double learning_rate = 0.01;
    double momentum = 0.9;
    bool hard_path = true;  // false = soft-only ablation

    // Bits occupied by one code: M * log2(K).
    int code_bits() const;

    // Width of one input slice fed to a per-partition network.
    int slice_width() const {
        const int u = front_dim > 0 ? front_dim : input_dim;
        return u / M;
    }

    int rep_dim() const { return M * D; }

    // Throws std::invalid_argument when a field violates its constraints
    // (K not a power of two, negative loss weight, non-positive sizes).
    void validate() const;
};

// A labeled (or unlabeled) collection of embedding vectors, row-major.
struct VectorSet {
    int64_t count = 0;
    int dim = 0;
    std::vector<double> data;      // count * dim
    std::vector<int32_t> labels;   // empty when unlabeled, else count entries

    bool has_labels() const { return !labels.empty(); }

    std::span<const double> row(int64_t i) const {
        return {data.data() + i * dim, static_cast<size_t>(dim)};
    }

    void validate() const;  // shape consistency and finiteness
};

bool is_power_of_two(uint64_t v);

}  // namespace dpq
