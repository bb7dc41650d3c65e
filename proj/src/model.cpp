#include "dpq/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dpq/rng.hpp"

namespace dpq {

namespace {

size_t fc1_w_size(const ParamLayout& l) { return static_cast<size_t>(l.hidden) * l.slice; }
size_t fc2_w_size(const ParamLayout& l) { return static_cast<size_t>(l.K) * l.hidden; }
size_t cb_size(const ParamLayout& l) { return static_cast<size_t>(l.K) * l.D; }
size_t slice_block(const ParamLayout& l) {
    return fc1_w_size(l) + l.hidden + fc2_w_size(l) + l.K;
}

}  // namespace

ParamLayout::ParamLayout(const QuantizerConfig& cfg)
    : M(cfg.M),
      K(cfg.K),
      D(cfg.D),
      L(cfg.input_dim),
      hidden(cfg.hidden_dim),
      C(cfg.num_classes),
      front_dim(cfg.front_dim),
      slice(cfg.slice_width()) {
    total = front_w() + (front_dim > 0 ? static_cast<size_t>(front_dim) * L + front_dim : 0);
}

size_t ParamLayout::fc1_w(int m) const { return static_cast<size_t>(m) * slice_block(*this); }
size_t ParamLayout::fc1_b(int m) const { return fc1_w(m) + fc1_w_size(*this); }
size_t ParamLayout::fc2_w(int m) const { return fc1_b(m) + hidden; }
size_t ParamLayout::fc2_b(int m) const { return fc2_w(m) + fc2_w_size(*this); }
size_t ParamLayout::codebook(int m) const {
    return static_cast<size_t>(M) * slice_block(*this) + static_cast<size_t>(m) * cb_size(*this);
}
size_t ParamLayout::clf_w() const { return codebook(M); }
size_t ParamLayout::clf_b() const { return clf_w() + static_cast<size_t>(M) * D * C; }
size_t ParamLayout::centers() const { return clf_b() + C; }
size_t ParamLayout::front_w() const { return centers() + static_cast<size_t>(C) * M * D; }
size_t ParamLayout::front_b() const { return front_w() + static_cast<size_t>(front_dim) * L; }

#define DPQ_SPAN_ACCESSOR(name, offset_expr, size_expr)                     \
    std::span<double> DpqModel::name {                                      \
        return {params.data() + (offset_expr), (size_expr)};                \
    }                                                                       \
    std::span<const double> DpqModel::name const {                          \
        return {params.data() + (offset_expr), (size_expr)};                \
    }

DPQ_SPAN_ACCESSOR(fc1_w(int m), layout.fc1_w(m), fc1_w_size(layout))
DPQ_SPAN_ACCESSOR(fc1_b(int m), layout.fc1_b(m), static_cast<size_t>(layout.hidden))
DPQ_SPAN_ACCESSOR(fc2_w(int m), layout.fc2_w(m), fc2_w_size(layout))
DPQ_SPAN_ACCESSOR(fc2_b(int m), layout.fc2_b(m), static_cast<size_t>(layout.K))
DPQ_SPAN_ACCESSOR(codebook_rows(int m), layout.codebook(m), cb_size(layout))
DPQ_SPAN_ACCESSOR(classifier_w(), layout.clf_w(),
                  static_cast<size_t>(layout.M) * layout.D * layout.C)
DPQ_SPAN_ACCESSOR(classifier_b(), layout.clf_b(), static_cast<size_t>(layout.C))
DPQ_SPAN_ACCESSOR(centers(), layout.centers(),
                  static_cast<size_t>(layout.C) * layout.M * layout.D)
DPQ_SPAN_ACCESSOR(front_w(), layout.front_w(),
                  static_cast<size_t>(layout.front_dim) * layout.L)
DPQ_SPAN_ACCESSOR(front_b(), layout.front_b(), static_cast<size_t>(layout.front_dim))

#undef DPQ_SPAN_ACCESSOR

std::span<const double> DpqModel::center(int c) const {
    const size_t v = static_cast<size_t>(layout.M) * layout.D;
    return {params.data() + layout.centers() + c * v, v};
}

std::span<const double> DpqModel::codebook_row(int m, int k) const {
    return {params.data() + layout.codebook(m) + static_cast<size_t>(k) * layout.D,
            static_cast<size_t>(layout.D)};
}

Codebook DpqModel::codebook() const {
    Codebook cb(layout.M, layout.K, layout.D);
    std::copy_n(params.data() + layout.codebook(0), cb.data.size(), cb.data.begin());
    return cb;
}

void DpqModel::set_codebook(const Codebook& cb) {
    if (cb.M != layout.M || cb.K != layout.K || cb.D != layout.D)
        throw std::invalid_argument("set_codebook: shape mismatch");
    std::copy(cb.data.begin(), cb.data.end(), params.begin() + layout.codebook(0));
}

DpqModel make_model(const QuantizerConfig& cfg) {
    cfg.validate();
    DpqModel model;
    model.config = cfg;
    model.layout = ParamLayout(cfg);
    model.params.assign(model.layout.total, 0.0);
    Rng rng(mix_seed(cfg.seed, 0x1));

    auto fill_uniform = [&](std::span<double> w, int fan_in) {
        const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : w) v = rng.uniform(-a, a);
    };
    if (model.has_front()) fill_uniform(model.front_w(), cfg.input_dim);
    for (int m = 0; m < cfg.M; ++m) {
        fill_uniform(model.fc1_w(m), model.layout.slice);
        fill_uniform(model.fc2_w(m), cfg.hidden_dim);
        fill_uniform(model.codebook_rows(m), cfg.D);
    }
    fill_uniform(model.classifier_w(), cfg.rep_dim());
    // biases and class centers start at zero
    return model;
}

namespace {

void affine_forward(std::span<const double> w, std::span<const double> b,
                    std::span<const double> x, std::span<double> y) {
    const size_t in = x.size(), out = y.size();
    for (size_t o = 0; o < out; ++o) {
        double s = b[o];
        const double* row = w.data() + o * in;
        for (size_t i = 0; i < in; ++i) s += row[i] * x[i];
        y[o] = s;
    }
}

void softmax_inplace(std::span<double> v) {
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

int argmax_lowest(std::span<const double> v) {
    int best = 0;
    for (size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = static_cast<int>(i);
    }
    return best;
}

}  // namespace

SampleTrace forward(std::span<const double> x, const DpqModel& model) {
    const ParamLayout& L = model.layout;
    if (x.size() != static_cast<size_t>(L.L))
        throw std::invalid_argument("forward: input has dimension " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(L.L));
    SampleTrace t;
    t.x.assign(x.begin(), x.end());
    if (model.has_front()) {
        t.front_pre.resize(static_cast<size_t>(L.front_dim));
        affine_forward(model.front_w(), model.front_b(), x, t.front_pre);
        t.u.resize(t.front_pre.size());
        for (size_t i = 0; i < t.u.size(); ++i) t.u[i] = std::max(0.0, t.front_pre[i]);
    } else {
        t.u = t.x;
    }

    const int F = L.slice, H = L.hidden, K = L.K, D = L.D, M = L.M;
    t.fc1_pre.resize(static_cast<size_t>(M) * H);
    t.fc1_out.resize(static_cast<size_t>(M) * H);
    t.logits.resize(static_cast<size_t>(M) * K);
    t.p.resize(static_cast<size_t>(M) * K);
    t.kstar.resize(static_cast<size_t>(M));
    t.soft.assign(static_cast<size_t>(M) * D, 0.0);
    t.hard.resize(static_cast<size_t>(M) * D);

    for (int m = 0; m < M; ++m) {
        // trailing units beyond M*F are discarded
        std::span<const double> s(t.u.data() + static_cast<size_t>(m) * F,
                                  static_cast<size_t>(F));
        std::span<double> pre(t.fc1_pre.data() + static_cast<size_t>(m) * H,
                              static_cast<size_t>(H));
        std::span<double> h(t.fc1_out.data() + static_cast<size_t>(m) * H,
                            static_cast<size_t>(H));
        affine_forward(model.fc1_w(m), model.fc1_b(m), s, pre);
        for (int j = 0; j < H; ++j) h[j] = std::max(0.0, pre[j]);

        std::span<double> logit(t.logits.data() + static_cast<size_t>(m) * K,
                                static_cast<size_t>(K));
        affine_forward(model.fc2_w(m), model.fc2_b(m), h, logit);
        std::span<double> p(t.p.data() + static_cast<size_t>(m) * K,
                            static_cast<size_t>(K));
        std::copy(logit.begin(), logit.end(), p.begin());
        softmax_inplace(p);

        const int kstar = argmax_lowest(p);
        t.kstar[m] = kstar;
        double* soft_m = t.soft.data() + static_cast<size_t>(m) * D;
        for (int k = 0; k < K; ++k) {
            const auto row = model.codebook_row(m, k);
            const double pk = p[k];
            for (int d = 0; d < D; ++d) soft_m[d] += pk * row[d];
        }
        const auto star_row = model.codebook_row(m, kstar);
        std::copy(star_row.begin(), star_row.end(),
                  t.hard.begin() + static_cast<size_t>(m) * D);
    }

    // prediction heads: score[c] = b[c] + sum_d W[d][c] * rep[d]
    const auto W = model.classifier_w();
    const auto b = model.classifier_b();
    const int C = L.C, V = L.M * L.D;
    t.pred_soft.assign(b.begin(), b.end());
    t.pred_hard.assign(b.begin(), b.end());
    for (int d = 0; d < V; ++d) {
        const double* wrow = W.data() + static_cast<size_t>(d) * C;
        const double sv = t.soft[d], hv = t.hard[d];
        for (int c = 0; c < C; ++c) {
            t.pred_soft[c] += wrow[c] * sv;
            t.pred_hard[c] += wrow[c] * hv;
        }
    }
    return t;
}

std::vector<double> soft_subvector(std::span<const double> p, const Codebook& cb,
                                   int m) {
    if (p.size() != static_cast<size_t>(cb.K))
        throw std::invalid_argument("soft_subvector: probability vector has size " +
                                    std::to_string(p.size()) + ", expected K=" +
                                    std::to_string(cb.K));
    std::vector<double> out(static_cast<size_t>(cb.D), 0.0);
    for (int k = 0; k < cb.K; ++k) {
        const auto row = cb.row(m, k);
        for (int d = 0; d < cb.D; ++d) out[d] += p[k] * row[d];
    }
    return out;
}

std::pair<std::vector<double>, int> hard_subvector(std::span<const double> p,
                                                   const Codebook& cb, int m) {
    if (p.size() != static_cast<size_t>(cb.K))
        throw std::invalid_argument("hard_subvector: probability vector size mismatch");
    const int kstar = argmax_lowest(p);
    const auto row = cb.row(m, kstar);
    return {std::vector<double>(row.begin(), row.end()), kstar};
}

double softmax_loss(std::span<const double> scores, int label) {
    if (label < 0 || label >= static_cast<int>(scores.size()))
        throw std::invalid_argument("softmax_loss: label " + std::to_string(label) +
                                    " out of range");
    double mx = scores[0];
    for (double s : scores) mx = std::max(mx, s);
    double sum = 0.0;
    for (double s : scores) sum += std::exp(s - mx);
    return std::log(sum) - (scores[label] - mx);
}

double joint_central_loss(std::span<const double> soft,
                          std::span<const double> hard, int label,
                          std::span<const double> centers, int rep_dim) {
    const int C = static_cast<int>(centers.size()) / rep_dim;
    if (label < 0 || label >= C)
        throw std::invalid_argument("joint_central_loss: label out of range");
    const double* o = centers.data() + static_cast<size_t>(label) * rep_dim;
    double s = 0.0;
    for (int d = 0; d < rep_dim; ++d) {
        const double ds = soft[d] - o[d];
        const double dh = hard[d] - o[d];
        s += 0.5 * ds * ds + 0.5 * dh * dh;
    }
    return s;
}

double gini_batch(const std::vector<std::span<const double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("gini_batch: empty batch");
    const size_t K = rows[0].size();
    double value = 0.0;
    for (size_t k = 0; k < K; ++k) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r[k];
        mean /= static_cast<double>(rows.size());
        value += mean * mean;
    }
    return value;
}

double gini_sample(std::span<const double> p) {
    double s = 0.0;
    for (double v : p) s += v * v;
    return -s;
}

void st_backward(std::span<const double> upstream, std::span<double> dp) {
    for (size_t i = 0; i < upstream.size(); ++i) dp[i] += upstream[i];
}

CompressedCode encode(std::span<const double> x, const DpqModel& model) {
    const SampleTrace t = forward(x, model);
    std::vector<uint32_t> z(t.kstar.begin(), t.kstar.end());
    return CompressedCode::from_indices(std::move(z),
                                        static_cast<uint32_t>(model.layout.K));
}

CodeSet encode_set(const VectorSet& data, const DpqModel& model) {
    CodeSet cs(model.layout.M, static_cast<uint32_t>(model.layout.K));
    for (int64_t i = 0; i < data.count; ++i) cs.append(encode(data.row(i), model));
    return cs;
}

std::vector<double> query_soft(std::span<const double> x, const DpqModel& model,
                               bool normalize) {
    SampleTrace t = forward(x, model);
    if (normalize) {
        const int M = model.layout.M, D = model.layout.D;
        for (int m = 0; m < M; ++m) {
            double* sub = t.soft.data() + static_cast<size_t>(m) * D;
            double norm = 0.0;
            for (int d = 0; d < D; ++d) norm += sub[d] * sub[d];
            norm = std::sqrt(norm);
            if (norm <= 0.0)
                throw std::runtime_error("query_soft: zero-norm soft sub-vector in partition " +
                                         std::to_string(m));
            for (int d = 0; d < D; ++d) sub[d] /= norm;
        }
    }
    return std::move(t.soft);
}

DpqModel intra_normalize(const DpqModel& model) {
    DpqModel out = model;
    const int M = out.layout.M, K = out.layout.K, D = out.layout.D;
    for (int m = 0; m < M; ++m) {
        std::span<double> rows = out.codebook_rows(m);
        for (int k = 0; k < K; ++k) {
            double* row = rows.data() + static_cast<size_t>(k) * D;
            double norm = 0.0;
            for (int d = 0; d < D; ++d) norm += row[d] * row[d];
            norm = std::sqrt(norm);
            if (norm <= 0.0)
                throw std::invalid_argument("intra_normalize: zero-norm codebook row " +
                                            std::to_string(k) + " in partition " +
                                            std::to_string(m));
            for (int d = 0; d < D; ++d) row[d] /= norm;
        }
    }
    return out;
}

}  // namespace dpq
