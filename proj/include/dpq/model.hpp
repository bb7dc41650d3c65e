#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpq/code.hpp"
#include "dpq/codebook.hpp"
#include "dpq/types.hpp"

namespace dpq {

// Byte offsets of every parameter tensor inside the flat parameter vector.
// Declaration order (which is also the serialization order):
//   per partition m: fc1 weights, fc1 bias, fc2 weights, fc2 bias
//   per partition m: codebook matrix (K x D)
//   classifier weights (V x C, V = M*D, laid out [d][c]), classifier bias
//   class centers (C x V)
//   optional front layer weights (front_dim x L) and bias
struct ParamLayout {
    int M = 0, K = 0, D = 0, L = 0, hidden = 0, C = 0;
    int front_dim = 0;   // 0 = no front layer
    int slice = 0;       // width of one input slice (F)
    size_t total = 0;

    explicit ParamLayout(const QuantizerConfig& cfg);
    ParamLayout() = default;

    size_t fc1_w(int m) const;   // hidden x slice, row-major [out][in]
    size_t fc1_b(int m) const;   // hidden
    size_t fc2_w(int m) const;   // K x hidden
    size_t fc2_b(int m) const;   // K
    size_t codebook(int m) const;  // K x D
    size_t clf_w() const;        // V x C, index d*C + c
    size_t clf_b() const;        // C
    size_t centers() const;      // C x V
    size_t front_w() const;      // front_dim x L
    size_t front_b() const;      // front_dim

    int rep_dim() const { return M * D; }
};

// All learnable state of a deep product quantizer: per-partition two-layer
// networks ending in a K-way softmax, the M codebooks, the linear
// classifier, the per-class centers and the optional front layer. The
// parameters live in one flat vector so that optimizer steps, weight decay
// and finite-difference checks can treat them uniformly.
struct DpqModel {
    QuantizerConfig config;
    ParamLayout layout;
    std::vector<double> params;

    std::span<double> fc1_w(int m);
    std::span<double> fc1_b(int m);
    std::span<double> fc2_w(int m);
    std::span<double> fc2_b(int m);
    std::span<double> codebook_rows(int m);
    std::span<double> classifier_w();
    std::span<double> classifier_b();
    std::span<double> centers();
    std::span<double> front_w();
    std::span<double> front_b();

    std::span<const double> fc1_w(int m) const;
    std::span<const double> fc1_b(int m) const;
    std::span<const double> fc2_w(int m) const;
    std::span<const double> fc2_b(int m) const;
    std::span<const double> codebook_rows(int m) const;
    std::span<const double> classifier_w() const;
    std::span<const double> classifier_b() const;
    std::span<const double> centers() const;
    std::span<const double> center(int c) const;
    std::span<const double> front_w() const;
    std::span<const double> front_b() const;

    std::span<const double> codebook_row(int m, int k) const;
    bool has_front() const { return layout.front_dim > 0; }

    // Materializes the codebooks as a standalone Codebook value.
    Codebook codebook() const;
    void set_codebook(const Codebook& cb);
};

// Fresh model with seeded initialization: affine weights uniform in
// +-1/sqrt(fan_in), biases zero, centers zero, codebook rows uniform in
// +-1/sqrt(D) (train() replaces them with k-means centroids when the
// slice width equals D).
DpqModel make_model(const QuantizerConfig& cfg);

// Cached intermediates of one forward evaluation, enough to run the
// backward pass. Per-partition arrays are stored flat: fc1 activations at
// [m*hidden ..], logits and probabilities at [m*K ..].
struct SampleTrace {
    std::vector<double> x;          // raw input
    std::vector<double> front_pre;  // pre-activation of front layer (empty if none)
    std::vector<double> u;          // sliced feature vector (== x without front)
    std::vector<double> fc1_pre;    // M * hidden
    std::vector<double> fc1_out;    // M * hidden, rectified
    std::vector<double> logits;     // M * K
    std::vector<double> p;          // M * K, rows sum to 1
    std::vector<int32_t> kstar;     // M argmax indices, ties to lowest
    std::vector<double> soft;       // M * D
    std::vector<double> hard;       // M * D
    std::vector<double> pred_soft;  // C
    std::vector<double> pred_hard;  // C

    std::span<const double> p_row(int m, int K) const {
        return {p.data() + static_cast<size_t>(m) * K, static_cast<size_t>(K)};
    }
};

SampleTrace forward(std::span<const double> x, const DpqModel& model);

// Convex combination of the rows of partition m's codebook with
// coefficients p (a probability vector).
std::vector<double> soft_subvector(std::span<const double> p,
                                   const Codebook& cb, int m);

// Row of the highest-probability cluster (ties to lowest index), plus the
// index itself.
std::pair<std::vector<double>, int> hard_subvector(std::span<const double> p,
                                                   const Codebook& cb, int m);

// Cross entropy of softmax(scores) against the label, max-subtracted.
double softmax_loss(std::span<const double> scores, int label);

// 0.5*||soft - o_y||^2 + 0.5*||hard - o_y||^2 with the same center o_y.
double joint_central_loss(std::span<const double> soft,
                          std::span<const double> hard, int label,
                          std::span<const double> centers, int rep_dim);

// Squared norm of the batch-mean assignment distribution; 1 when every row
// is the same one-hot, 1/K when the mean is uniform.
double gini_batch(const std::vector<std::span<const double>>& rows);

// Negative squared norm of one distribution; -1 at one-hot vectors,
// -1/K at the uniform distribution.
double gini_sample(std::span<const double> p);

// Straight-through pass: the gradient arriving at a one-hot encoding is
// handed to the underlying probability vector unchanged.
void st_backward(std::span<const double> upstream, std::span<double> dp);

struct LossBreakdown {
    double total = 0;
    double softmax_soft = 0;
    double softmax_hard = 0;
    double central = 0;
    double gini_batch = 0;
    double gini_sample = 0;
    double weight_decay = 0;
};

// Testing/ablation knobs for total_loss. straight_through=false drops the
// pass-through gradient of the one-hot layer (the loss value is unchanged;
// every remaining gradient is then an exact local derivative, which is what
// finite-difference checks compare against). The classification toggles
// select which of the two prediction heads contribute.
struct LossOptions {
    bool straight_through = true;
    bool soft_classification = true;
    bool hard_classification = true;
};

// Weighted training loss over a batch of traces:
//   softmax * (CE(pred_soft) + CE(pred_hard))      batch mean
// + central * joint central loss                    batch mean
// + gini_batch * sum_m GiniBatch(p_m)
// + gini_sample * mean_i sum_m GiniSample(p_m^i)
// + weight_decay * 0.5 * ||params||^2
// When grad is non-null it receives d(loss)/d(params), same layout as
// model.params, with the hard path differentiated straight-through.
// Throws std::runtime_error when any term turns non-finite.
LossBreakdown total_loss(const DpqModel& model,
                         const std::vector<SampleTrace>& traces,
                         std::span<const int32_t> labels,
                         const LossWeights& weights,
                         std::vector<double>* grad,
                         const LossOptions& options = {});

struct EpochStats {
    LossBreakdown loss;              // averaged over the epoch's batches
    std::vector<int64_t> usage;      // M*K argmax counts seen during the epoch
    double learning_rate = 0;
};

struct TrainLog {
    std::vector<EpochStats> epochs;
    std::vector<std::string> warnings;
};

// Mini-batch SGD with momentum over seeded shuffled epochs; the learning
// rate drops by 10x at two thirds of the schedule. Single-threaded and
// deterministic for a given (config, seed).
DpqModel train(const VectorSet& data, const QuantizerConfig& cfg,
               TrainLog* log = nullptr, std::ostream* progress = nullptr);

// Packed argmax indices of the forward pass.
CompressedCode encode(std::span<const double> x, const DpqModel& model);
CodeSet encode_set(const VectorSet& data, const DpqModel& model);

// The soft representation of x; with normalize=true every sub-vector is
// L2-normalized after computation (for use against an intra-normalized
// codebook).
std::vector<double> query_soft(std::span<const double> x,
                               const DpqModel& model, bool normalize = false);

// Returns a copy of the model whose codebook rows are L2-normalized, so
// every hard sub-vector it produces has unit norm. Rejects zero rows,
// naming the partition and row.
DpqModel intra_normalize(const DpqModel& model);

// Model file format "DPQM": magic, u32 version, config block (M, K, D, L,
// hidden, C as u32; the five loss weights as f32), then every parameter
// tensor in declaration order, each prefixed by u32 rank and u32 dims,
// values f32 little-endian.
void write_model(std::ostream& out, const DpqModel& model);
void write_model(const std::string& path, const DpqModel& model);
DpqModel read_model(std::istream& in);
DpqModel read_model(const std::string& path);

}  // namespace dpq
