#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpq/kmeans.hpp"
#include "dpq/model.hpp"
#include "dpq/rng.hpp"

namespace dpq {

namespace {

// Computes the sliced feature vector for one input (front layer + slicing),
// without running the per-partition networks.
std::vector<double> sliced_features(std::span<const double> x,
                                    const DpqModel& model) {
    if (!model.has_front()) return {x.begin(), x.end()};
    const ParamLayout& L = model.layout;
    std::vector<double> u(static_cast<size_t>(L.front_dim));
    const auto W = model.front_w();
    const auto b = model.front_b();
    for (int j = 0; j < L.front_dim; ++j) {
        double s = b[j];
        const double* row = W.data() + static_cast<size_t>(j) * L.L;
        for (int i = 0; i < L.L; ++i) s += row[i] * x[i];
        u[j] = std::max(0.0, s);
    }
    return u;
}

// Replaces the random codebooks with per-partition k-means centroids of a
// warmup batch, when the centroid dimension matches the slice width.
void init_codebooks(DpqModel& model, const VectorSet& data) {
    const ParamLayout& L = model.layout;
    if (L.D != L.slice) return;  // geometry incompatible, keep random rows
    const int64_t want = std::max<int64_t>(model.config.batch_size,
                                           4 * static_cast<int64_t>(L.K));
    const int64_t n = std::min<int64_t>(data.count, want);
    if (n < L.K) return;
    std::vector<double> slices(static_cast<size_t>(n) * L.slice);
    Codebook cb(L.M, L.K, L.D);
    for (int m = 0; m < L.M; ++m) {
        for (int64_t i = 0; i < n; ++i) {
            const auto u = sliced_features(data.row(i), model);
            std::copy_n(u.data() + static_cast<size_t>(m) * L.slice, L.slice,
                        slices.begin() + i * L.slice);
        }
        const KMeansResult km =
            kmeans(slices, n, L.slice, L.K, 25,
                   mix_seed(model.config.seed, 0x10 + static_cast<uint64_t>(m)), 1);
        std::copy(km.centroids.begin(), km.centroids.end(),
                  cb.data.begin() + static_cast<size_t>(m) * L.K * L.D);
    }
    model.set_codebook(cb);
}

}  // namespace

DpqModel train(const VectorSet& data, const QuantizerConfig& cfg, TrainLog* log,
               std::ostream* progress) {
    cfg.validate();
    data.validate();
    if (!data.has_labels())
        throw std::invalid_argument("train: data must carry labels");
    if (data.dim != cfg.input_dim)
        throw std::invalid_argument("train: data dimension " + std::to_string(data.dim) +
                                    " does not match config input_dim " +
                                    std::to_string(cfg.input_dim));
    std::vector<int64_t> class_count(static_cast<size_t>(cfg.num_classes), 0);
    for (int32_t y : data.labels) {
        if (y < 0 || y >= cfg.num_classes)
            throw std::invalid_argument("train: label " + std::to_string(y) +
                                        " out of range [0," +
                                        std::to_string(cfg.num_classes) + ")");
        ++class_count[y];
    }
    for (int c = 0; c < cfg.num_classes; ++c) {
        if (class_count[c] == 0) {
            const std::string msg = "class " + std::to_string(c) + " absent from training data";
            if (log) log->warnings.push_back(msg);
            if (progress) *progress << "warning: " << msg << "\n";
        }
    }

    DpqModel model = make_model(cfg);
    init_codebooks(model, data);

    std::vector<double> grad;
    std::vector<double> velocity(model.params.size(), 0.0);
    std::vector<int64_t> order(static_cast<size_t>(data.count));
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(mix_seed(cfg.seed, 0x2));

    const LossOptions options{.straight_through = true,
                              .soft_classification = true,
                              .hard_classification = cfg.hard_path};
    const int decay_epoch = (2 * cfg.epochs) / 3;

    std::vector<SampleTrace> traces;
    std::vector<int32_t> batch_labels;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.learning_rate * (epoch >= decay_epoch ? 0.1 : 1.0);
        shuffle_rng.shuffle(order);

        EpochStats stats;
        stats.learning_rate = lr;
        stats.usage.assign(static_cast<size_t>(cfg.M) * cfg.K, 0);
        int batches = 0;

        for (int64_t start = 0; start < data.count; start += cfg.batch_size) {
            const int64_t stop = std::min<int64_t>(data.count, start + cfg.batch_size);
            traces.clear();
            batch_labels.clear();
            for (int64_t j = start; j < stop; ++j) {
                const int64_t i = order[j];
                traces.push_back(forward(data.row(i), model));
                batch_labels.push_back(data.labels[i]);
                const SampleTrace& t = traces.back();
                for (int m = 0; m < cfg.M; ++m)
                    ++stats.usage[static_cast<size_t>(m) * cfg.K + t.kstar[m]];
            }
            const LossBreakdown bd =
                total_loss(model, traces, batch_labels, cfg.weights, &grad, options);
            stats.loss.total += bd.total;
            stats.loss.softmax_soft += bd.softmax_soft;
            stats.loss.softmax_hard += bd.softmax_hard;
            stats.loss.central += bd.central;
            stats.loss.gini_batch += bd.gini_batch;
            stats.loss.gini_sample += bd.gini_sample;
            stats.loss.weight_decay += bd.weight_decay;
            ++batches;

            for (size_t j = 0; j < model.params.size(); ++j) {
                velocity[j] = cfg.momentum * velocity[j] + grad[j];
                model.params[j] -= lr * velocity[j];
            }
        }

        const double inv = batches > 0 ? 1.0 / batches : 0.0;
        stats.loss.total *= inv;
        stats.loss.softmax_soft *= inv;
        stats.loss.softmax_hard *= inv;
        stats.loss.central *= inv;
        stats.loss.gini_batch *= inv;
        stats.loss.gini_sample *= inv;
        stats.loss.weight_decay *= inv;
        if (progress) {
            *progress << "epoch " << (epoch + 1) << "/" << cfg.epochs
                      << " lr " << lr
                      << " loss " << stats.loss.total
                      << " (soft " << stats.loss.softmax_soft
                      << ", hard " << stats.loss.softmax_hard
                      << ", central " << stats.loss.central
                      << ", gini_b " << stats.loss.gini_batch
                      << ", gini_s " << stats.loss.gini_sample
                      << ", decay " << stats.loss.weight_decay << ")\n";
        }
        if (log) log->epochs.push_back(std::move(stats));
    }
    return model;
}

}  // namespace dpq
