#include "semsum/discriminator.hpp"

#include <stdexcept>

namespace semsum {

using namespace ad;

Discriminator::Discriminator(const DiscriminatorConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg) {
    const int d_in = cfg.d_v + cfg.d_s;
    const int h = cfg.hidden;
    w_x_ = params_.add("w_x", glorot(d_in, 4 * h, rng));
    w_h_ = params_.add("w_h", glorot(h, 4 * h, rng));
    b_ = params_.add("b", Mat::Zero(1, 4 * h));
    head_w_ = params_.add("head_w", glorot(h, 1, rng));
    head_b_ = params_.add("head_b", Mat::Zero(1, 1));
}

Var Discriminator::forward(const Var& visual, const Var& semantic) const {
    if (visual->value.rows() != semantic->value.rows())
        throw std::invalid_argument("discriminate: row count mismatch");
    if (!visual->value.allFinite() || !semantic->value.allFinite())
        throw std::invalid_argument("discriminate: non-finite input");
    const int T = static_cast<int>(visual->value.rows());
    const int h = cfg_.hidden;
    Var input = concat_cols(visual, semantic);
    Var hidden = constant(Mat::Zero(1, h));
    Var cell = constant(Mat::Zero(1, h));
    for (int t = 0; t < T; ++t) {
        Var x = slice_rows(input, t, 1);
        Var z = add_rowvec(add(matmul(x, w_x_), matmul(hidden, w_h_)), b_);
        Var gi = sigmoid(slice_cols(z, 0, h));
        Var gf = sigmoid(slice_cols(z, h, h));
        Var go = sigmoid(slice_cols(z, 2 * h, h));
        Var gc = tanh_op(slice_cols(z, 3 * h, h));
        cell = add(mul(gf, cell), mul(gi, gc));
        hidden = mul(go, tanh_op(cell));
    }
    return sigmoid(add(matmul(hidden, head_w_), head_b_));
}

double Discriminator::discriminate(const Mat& visual, const Mat& semantic) const {
    return forward(constant(visual), constant(semantic))->scalar();
}

}  // namespace semsum
