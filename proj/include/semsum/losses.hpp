#pragma once

#include <utility>

#include "semsum/ad.hpp"
#include "semsum/model_common.hpp"

namespace semsum {

struct LossWeights {
    double mu = 1.0;        // visual reconstruction weight
    double nu = 1.0;        // semantic reconstruction weight
    double lambda_s = 0.15; // sparsity target, matches the 15% summary budget
    double g_adv = 1.0;     // generator adversarial weight
};

// Structural similarity between two equal-shape matrices treated as
// single-channel images. Both are jointly min-max normalized to [0,1]; local
// statistics use uniform windows (8x8, shrunk to the matrix when smaller),
// stride 1, C1=0.01^2, C2=0.03^2. Result is the mean window SSIM in [-1,1].
ad::Var ssim(const ad::Var& a, const ad::Var& b, int window = 8);
double ssim(const Mat& a, const Mat& b, int window = 8);

// mu*mean((X-Xh)^2) + nu*mean((T-Th)^2) + (1 - SSIM(X, Xh))
ad::Var reconstruction_loss(const ad::Var& x, const ad::Var& x_hat, const ad::Var& t,
                            const ad::Var& t_hat, const LossWeights& w);
double reconstruction_loss(const Mat& x, const Mat& x_hat, const Mat& t,
                           const Mat& t_hat, const LossWeights& w);

// | mean(S) - lambda |
ad::Var sparsity_loss(const ad::Var& scores, const LossWeights& w);
double sparsity_loss(const Eigen::VectorXd& scores, const LossWeights& w);

ad::Var total_loss(const ad::Var& rec, const ad::Var& sparse);

// Non-saturating GAN objectives; probabilities clamped to [1e-7, 1-1e-7].
// d_loss = -log(p_real) - log(1 - p_fake); g_loss = -log(p_fake).
std::pair<ad::Var, ad::Var> adversarial_losses(const ad::Var& p_real,
                                               const ad::Var& p_fake);
std::pair<double, double> adversarial_losses(double p_real, double p_fake);

}  // namespace semsum
