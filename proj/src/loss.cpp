#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpq/model.hpp"

namespace dpq {

namespace {

bool finite(double v) { return std::isfinite(v); }

std::string describe(const LossBreakdown& bd) {
    return "softmax_soft=" + std::to_string(bd.softmax_soft) +
           " softmax_hard=" + std::to_string(bd.softmax_hard) +
           " central=" + std::to_string(bd.central) +
           " gini_batch=" + std::to_string(bd.gini_batch) +
           " gini_sample=" + std::to_string(bd.gini_sample) +
           " weight_decay=" + std::to_string(bd.weight_decay);
}

}  // namespace

LossBreakdown total_loss(const DpqModel& model,
                         const std::vector<SampleTrace>& traces,
                         std::span<const int32_t> labels,
                         const LossWeights& weights, std::vector<double>* grad,
                         const LossOptions& options) {
    const size_t B = traces.size();
    if (B == 0) throw std::invalid_argument("total_loss: empty batch");
    if (labels.size() != B)
        throw std::invalid_argument("total_loss: label count does not match batch");
    const ParamLayout& L = model.layout;
    const int M = L.M, K = L.K, D = L.D, C = L.C, H = L.hidden, F = L.slice;
    const int V = M * D;
    const double invB = 1.0 / static_cast<double>(B);

    LossBreakdown bd;
    for (size_t i = 0; i < B; ++i) {
        const SampleTrace& t = traces[i];
        const int y = labels[i];
        if (options.soft_classification)
            bd.softmax_soft += softmax_loss(t.pred_soft, y) * invB;
        if (options.hard_classification)
            bd.softmax_hard += softmax_loss(t.pred_hard, y) * invB;
        bd.central +=
            joint_central_loss(t.soft, t.hard, y, model.centers(), V) * invB;
        for (int m = 0; m < M; ++m)
            bd.gini_sample += gini_sample(t.p_row(m, K)) * invB;
    }
    for (int m = 0; m < M; ++m) {
        std::vector<std::span<const double>> rows;
        rows.reserve(B);
        for (const SampleTrace& t : traces) rows.push_back(t.p_row(m, K));
        bd.gini_batch += gini_batch(rows);
    }
    for (double v : model.params) bd.weight_decay += 0.5 * v * v;

    bd.total = weights.softmax * (bd.softmax_soft + bd.softmax_hard) +
               weights.central * bd.central +
               weights.gini_batch * bd.gini_batch +
               weights.gini_sample * bd.gini_sample +
               weights.weight_decay * bd.weight_decay;
    if (!finite(bd.total))
        throw std::runtime_error("total_loss: non-finite loss (" + describe(bd) + ")");
    if (!grad) return bd;

    grad->assign(L.total, 0.0);
    std::vector<double>& g = *grad;

    // batch-mean assignment distribution, for the batch-diversity gradient
    std::vector<double> qmean;
    if (weights.gini_batch > 0) {
        qmean.assign(static_cast<size_t>(M) * K, 0.0);
        for (const SampleTrace& t : traces)
            for (size_t j = 0; j < qmean.size(); ++j) qmean[j] += t.p[j];
        for (double& q : qmean) q *= invB;
    }

    std::vector<double> dsoft(static_cast<size_t>(V));
    std::vector<double> dhard(static_cast<size_t>(V));
    std::vector<double> prob(static_cast<size_t>(C));
    std::vector<double> dp(static_cast<size_t>(K));
    std::vector<double> de(static_cast<size_t>(K));
    std::vector<double> dt(static_cast<size_t>(K));
    std::vector<double> dh(static_cast<size_t>(H));
    std::vector<double> da(static_cast<size_t>(H));
    std::vector<double> du;

    const auto W = model.classifier_w();

    for (size_t i = 0; i < B; ++i) {
        const SampleTrace& t = traces[i];
        const int y = labels[i];
        std::fill(dsoft.begin(), dsoft.end(), 0.0);
        std::fill(dhard.begin(), dhard.end(), 0.0);

        // classification heads: d(pred) = softmax(pred) - onehot(y)
        auto head = [&](std::span<const double> pred, const std::vector<double>& rep,
                        std::vector<double>& drep, double scale) {
            double mx = pred[0];
            for (double s : pred) mx = std::max(mx, s);
            double sum = 0.0;
            for (int c = 0; c < C; ++c) {
                prob[c] = std::exp(pred[c] - mx);
                sum += prob[c];
            }
            for (int c = 0; c < C; ++c) prob[c] /= sum;
            prob[y] -= 1.0;
            for (int c = 0; c < C; ++c) prob[c] *= scale;
            double* gW = g.data() + L.clf_w();
            double* gb = g.data() + L.clf_b();
            for (int d = 0; d < V; ++d) {
                const double* wrow = W.data() + static_cast<size_t>(d) * C;
                double* gwrow = gW + static_cast<size_t>(d) * C;
                const double rv = rep[d];
                double acc = 0.0;
                for (int c = 0; c < C; ++c) {
                    gwrow[c] += rv * prob[c];
                    acc += wrow[c] * prob[c];
                }
                drep[d] += acc;
            }
            for (int c = 0; c < C; ++c) gb[c] += prob[c];
        };
        if (weights.softmax > 0) {
            const double scale = weights.softmax * invB;
            if (options.soft_classification) head(t.pred_soft, t.soft, dsoft, scale);
            if (options.hard_classification) head(t.pred_hard, t.hard, dhard, scale);
        }

        // joint central loss
        if (weights.central > 0) {
            const double scale = weights.central * invB;
            const double* o = model.params.data() + L.centers() + static_cast<size_t>(y) * V;
            double* go = g.data() + L.centers() + static_cast<size_t>(y) * V;
            for (int d = 0; d < V; ++d) {
                const double ds = t.soft[d] - o[d];
                const double dhv = t.hard[d] - o[d];
                dsoft[d] += scale * ds;
                dhard[d] += scale * dhv;
                go[d] -= scale * (ds + dhv);
            }
        }

        for (int m = 0; m < M; ++m) {
            const std::span<const double> p = t.p_row(m, K);
            const double* dsoft_m = dsoft.data() + static_cast<size_t>(m) * D;
            const double* dhard_m = dhard.data() + static_cast<size_t>(m) * D;
            const int kstar = t.kstar[m];
            std::fill(dp.begin(), dp.end(), 0.0);

            // codebook gradient and the two representation paths into p
            double* gC = g.data() + L.codebook(m);
            for (int k = 0; k < K; ++k) {
                const auto row = model.codebook_row(m, k);
                double* grow = gC + static_cast<size_t>(k) * D;
                const double pk = p[k];
                double dot = 0.0;
                for (int d = 0; d < D; ++d) {
                    grow[d] += pk * dsoft_m[d];
                    dot += row[d] * dsoft_m[d];
                }
                dp[k] += dot;
                double edot = 0.0;
                for (int d = 0; d < D; ++d) edot += row[d] * dhard_m[d];
                de[k] = edot;
            }
            {
                double* grow = gC + static_cast<size_t>(kstar) * D;
                for (int d = 0; d < D; ++d) grow[d] += dhard_m[d];
            }
            if (options.straight_through) st_backward(de, dp);

            if (weights.gini_batch > 0) {
                const double* q = qmean.data() + static_cast<size_t>(m) * K;
                const double scale = weights.gini_batch * 2.0 * invB;
                for (int k = 0; k < K; ++k) dp[k] += scale * q[k];
            }
            if (weights.gini_sample > 0) {
                const double scale = weights.gini_sample * 2.0 * invB;
                for (int k = 0; k < K; ++k) dp[k] -= scale * p[k];
            }

            // softmax jacobian: dt = p .* (dp - <p, dp>)
            double pd = 0.0;
            for (int k = 0; k < K; ++k) pd += p[k] * dp[k];
            for (int k = 0; k < K; ++k) dt[k] = p[k] * (dp[k] - pd);

            // second affine layer
            const auto W2 = model.fc2_w(m);
            const double* h = t.fc1_out.data() + static_cast<size_t>(m) * H;
            const double* pre = t.fc1_pre.data() + static_cast<size_t>(m) * H;
            double* gW2 = g.data() + L.fc2_w(m);
            double* gb2 = g.data() + L.fc2_b(m);
            std::fill(dh.begin(), dh.end(), 0.0);
            for (int o = 0; o < K; ++o) {
                const double dto = dt[o];
                if (dto == 0.0) continue;
                const double* wrow = W2.data() + static_cast<size_t>(o) * H;
                double* gwrow = gW2 + static_cast<size_t>(o) * H;
                for (int j = 0; j < H; ++j) {
                    gwrow[j] += dto * h[j];
                    dh[j] += wrow[j] * dto;
                }
                gb2[o] += dto;
            }
            // rectifier
            for (int j = 0; j < H; ++j) da[j] = pre[j] > 0.0 ? dh[j] : 0.0;

            // first affine layer
            const auto W1 = model.fc1_w(m);
            const double* s = t.u.data() + static_cast<size_t>(m) * F;
            double* gW1 = g.data() + L.fc1_w(m);
            double* gb1 = g.data() + L.fc1_b(m);
            if (model.has_front() && du.empty())
                du.assign(static_cast<size_t>(L.front_dim), 0.0);
            for (int o = 0; o < H; ++o) {
                const double dao = da[o];
                if (dao == 0.0) continue;
                const double* wrow = W1.data() + static_cast<size_t>(o) * F;
                double* gwrow = gW1 + static_cast<size_t>(o) * F;
                for (int j = 0; j < F; ++j) {
                    gwrow[j] += dao * s[j];
                    if (model.has_front()) du[static_cast<size_t>(m) * F + j] += wrow[j] * dao;
                }
                gb1[o] += dao;
            }
        }

        if (model.has_front()) {
            double* gFw = g.data() + L.front_w();
            double* gFb = g.data() + L.front_b();
            for (int j = 0; j < L.front_dim; ++j) {
                const double dj = t.front_pre[j] > 0.0 ? du[j] : 0.0;
                if (dj == 0.0) continue;
                double* gwrow = gFw + static_cast<size_t>(j) * L.L;
                for (int i2 = 0; i2 < L.L; ++i2) gwrow[i2] += dj * t.x[i2];
                gFb[j] += dj;
            }
            std::fill(du.begin(), du.end(), 0.0);
        }
    }

    if (weights.weight_decay > 0) {
        for (size_t j = 0; j < g.size(); ++j)
            g[j] += weights.weight_decay * model.params[j];
    }
    return bd;
}

}  // namespace dpq
