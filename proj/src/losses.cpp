#include "semsum/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace semsum {

using namespace ad;

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

// Mean window SSIM over two already-normalized matrices, with analytic
// gradients accumulated per window. Uniform window weights, stride 1.
Var ssim_core(const Var& p, const Var& q, int wr, int wc) {
    const Mat& P = p->value;
    const Mat& Q = q->value;
    const int R = static_cast<int>(P.rows()), C = static_cast<int>(P.cols());
    const int nwr = R - wr + 1, nwc = C - wc + 1;
    const double n = static_cast<double>(wr) * wc;
    const double n_windows = static_cast<double>(nwr) * nwc;

    double total = 0.0;
    for (int i = 0; i < nwr; ++i)
        for (int j = 0; j < nwc; ++j) {
            auto a = P.block(i, j, wr, wc);
            auto b = Q.block(i, j, wr, wc);
            double mu1 = a.mean(), mu2 = b.mean();
            double s1 = a.cwiseAbs2().mean() - mu1 * mu1;
            double s2 = b.cwiseAbs2().mean() - mu2 * mu2;
            double s12 = a.cwiseProduct(b).mean() - mu1 * mu2;
            double num = (2 * mu1 * mu2 + kC1) * (2 * s12 + kC2);
            double den = (mu1 * mu1 + mu2 * mu2 + kC1) * (s1 + s2 + kC2);
            total += num / den;
        }
    Mat out = Mat::Constant(1, 1, total / n_windows);

    auto bw = [p, q, wr, wc, nwr, nwc, n, n_windows](Node& node) {
        const Mat& P = p->value;
        const Mat& Q = q->value;
        const double g = node.grad(0, 0) / n_windows;
        for (int i = 0; i < nwr; ++i)
            for (int j = 0; j < nwc; ++j) {
                auto a = P.block(i, j, wr, wc);
                auto b = Q.block(i, j, wr, wc);
                double mu1 = a.mean(), mu2 = b.mean();
                double s1 = a.cwiseAbs2().mean() - mu1 * mu1;
                double s2 = b.cwiseAbs2().mean() - mu2 * mu2;
                double s12 = a.cwiseProduct(b).mean() - mu1 * mu2;
                double l_num = 2 * mu1 * mu2 + kC1, l_den = mu1 * mu1 + mu2 * mu2 + kC1;
                double c_num = 2 * s12 + kC2, c_den = s1 + s2 + kC2;
                double den = l_den * c_den;
                double val = l_num * c_num / den;
                // partials of the window SSIM wrt its statistics
                double d_mu1 = (2 * mu2 * c_num - val * c_den * 2 * mu1) / den;
                double d_mu2 = (2 * mu1 * c_num - val * c_den * 2 * mu2) / den;
                double d_s = -val * l_den / den;            // wrt s1 and s2 alike
                double d_s12 = 2 * l_num / den;
                for (int r = 0; r < wr; ++r)
                    for (int c = 0; c < wc; ++c) {
                        double pv = P(i + r, j + c), qv = Q(i + r, j + c);
                        if (p->requires_grad)
                            p->grad(i + r, j + c) +=
                                g * (d_mu1 / n + d_s * 2 * (pv - mu1) / n +
                                     d_s12 * (qv - mu2) / n);
                        if (q->requires_grad)
                            q->grad(i + r, j + c) +=
                                g * (d_mu2 / n + d_s * 2 * (qv - mu2) / n +
                                     d_s12 * (pv - mu1) / n);
                    }
            }
    };

    bool rg = p->requires_grad || q->requires_grad;
    auto node = std::make_shared<Node>(std::move(out), rg);
    if (rg) {
        node->parents = {p, q};
        node->backward_fn = bw;
    }
    return node;
}

}  // namespace

Var ssim(const Var& a, const Var& b, int window) {
    if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
        throw std::invalid_argument("ssim: shape mismatch");
    const int wr = std::min<int>(window, static_cast<int>(a->value.rows()));
    const int wc = std::min<int>(window, static_cast<int>(a->value.cols()));

    Var lo = smin(reduce_min(a), reduce_min(b));
    Var hi = smax(reduce_max(a), reduce_max(b));
    double range = hi->scalar() - lo->scalar();
    if (range < 1e-12) {
        // Jointly constant pair: both normalize to the same flat image.
        return constant(1.0);
    }
    Var inv_range = cdiv(constant(1.0), sub(hi, lo));
    Var p = scale_by(add_scalar_node(a, neg(lo)), inv_range);
    Var q = scale_by(add_scalar_node(b, neg(lo)), inv_range);
    return ssim_core(p, q, wr, wc);
}

double ssim(const Mat& a, const Mat& b, int window) {
    return ssim(constant(a), constant(b), window)->scalar();
}

Var reconstruction_loss(const Var& x, const Var& x_hat, const Var& t,
                        const Var& t_hat, const LossWeights& w) {
    if (x->value.rows() != x_hat->value.rows() ||
        x->value.cols() != x_hat->value.cols() ||
        t->value.rows() != t_hat->value.rows() ||
        t->value.cols() != t_hat->value.cols())
        throw std::invalid_argument("reconstruction_loss: shape mismatch");
    Var mse_v = mean_all(square(sub(x, x_hat)));
    Var mse_s = mean_all(square(sub(t, t_hat)));
    Var ssim_term = add_scalar(neg(ssim(x, x_hat)), 1.0);
    return add(add(scale(mse_v, w.mu), scale(mse_s, w.nu)), ssim_term);
}

double reconstruction_loss(const Mat& x, const Mat& x_hat, const Mat& t,
                           const Mat& t_hat, const LossWeights& w) {
    return reconstruction_loss(constant(x), constant(x_hat), constant(t),
                               constant(t_hat), w)
        ->scalar();
}

Var sparsity_loss(const Var& scores, const LossWeights& w) {
    if (scores->value.size() == 0)
        throw std::invalid_argument("sparsity_loss: empty scores");
    return abs_val(add_scalar(mean_all(scores), -w.lambda_s));
}

double sparsity_loss(const Eigen::VectorXd& scores, const LossWeights& w) {
    return sparsity_loss(constant(Mat(scores)), w)->scalar();
}

Var total_loss(const Var& rec, const Var& sparse) { return add(rec, sparse); }

std::pair<Var, Var> adversarial_losses(const Var& p_real, const Var& p_fake) {
    constexpr double kEps = 1e-7;
    Var one_minus_fake = add_scalar(neg(p_fake), 1.0);
    Var d_loss = neg(add(log_clamped(p_real, kEps), log_clamped(one_minus_fake, kEps)));
    Var g_loss = neg(log_clamped(p_fake, kEps));
    return {d_loss, g_loss};
}

std::pair<double, double> adversarial_losses(double p_real, double p_fake) {
    auto [d, g] = adversarial_losses(constant(p_real), constant(p_fake));
    return {d->scalar(), g->scalar()};
}

}  // namespace semsum
