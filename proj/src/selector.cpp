#include "semsum/selector.hpp"

#include <stdexcept>

namespace semsum {

using namespace ad;

std::string to_string(ScoreMode m) {
    switch (m) {
        case ScoreMode::Fused: return "fused";
        case ScoreMode::CosineOnly: return "cosine_only";
        case ScoreMode::RecurrentOnly: return "recurrent_only";
    }
    return "fused";
}

ScoreMode score_mode_from_string(const std::string& s) {
    if (s == "fused") return ScoreMode::Fused;
    if (s == "cosine_only") return ScoreMode::CosineOnly;
    if (s == "recurrent_only") return ScoreMode::RecurrentOnly;
    throw std::invalid_argument("unknown score mode: " + s);
}

Selector::Selector(const SelectorConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
    const int d_in = cfg.d_v + cfg.d_s;
    const int h = cfg.hidden;
    proj_v_ = params_.add("proj_v", identity_slice(cfg.d_v, cfg.d_c));
    proj_s_ = params_.add("proj_s", identity_slice(cfg.d_s, cfg.d_c));
    w_x_fwd_ = params_.add("w_x_fwd", glorot(d_in, 4 * h, rng));
    w_h_fwd_ = params_.add("w_h_fwd", glorot(h, 4 * h, rng));
    b_fwd_ = params_.add("b_fwd", Mat::Zero(1, 4 * h));
    w_x_bwd_ = params_.add("w_x_bwd", glorot(d_in, 4 * h, rng));
    w_h_bwd_ = params_.add("w_h_bwd", glorot(h, 4 * h, rng));
    b_bwd_ = params_.add("b_bwd", Mat::Zero(1, 4 * h));
    head_w_ = params_.add("head_w", glorot(2 * h, 1, rng));
    head_b_ = params_.add("head_b", Mat::Zero(1, 1));
    alpha_raw_ = params_.add("alpha_raw", Mat::Zero(1, 1));  // alpha starts at 0.5
}

double Selector::alpha() const {
    return 1.0 / (1.0 + std::exp(-alpha_raw_->value(0, 0)));
}

Var Selector::cosine_alignment(const Var& visual, const Var& semantic) const {
    if (visual->value.rows() != semantic->value.rows())
        throw std::invalid_argument("cosine_alignment: row count mismatch");
    if (!visual->value.allFinite() || !semantic->value.allFinite())
        throw std::invalid_argument("cosine_alignment: non-finite input");
    constexpr double kEps = 1e-12;
    Var pv = matmul(visual, proj_v_);
    Var ps = matmul(semantic, proj_s_);
    Var dot = sum_rows(mul(pv, ps));
    Var nv = sqrt_eps(sum_rows(square(pv)), kEps);
    Var ns = sqrt_eps(sum_rows(square(ps)), kEps);
    for (Eigen::Index t = 0; t < pv->value.rows(); ++t)
        if (pv->value.row(t).squaredNorm() < 1e-15 ||
            ps->value.row(t).squaredNorm() < 1e-15)
            ++zero_norm_count_;
    // (1 + cos) / 2 maps [-1, 1] to [0, 1]
    return scale(add_scalar(cdiv(dot, mul(nv, ns)), 1.0), 0.5);
}

Var Selector::bilstm_direction(const Var& input, bool reverse) const {
    const int T = static_cast<int>(input->value.rows());
    const int h = cfg_.hidden;
    const Var& w_x = reverse ? w_x_bwd_ : w_x_fwd_;
    const Var& w_h = reverse ? w_h_bwd_ : w_h_fwd_;
    const Var& b = reverse ? b_bwd_ : b_fwd_;

    Var hidden = constant(Mat::Zero(1, h));
    Var cell = constant(Mat::Zero(1, h));
    std::vector<Var> outs(T);
    for (int step = 0; step < T; ++step) {
        int t = reverse ? T - 1 - step : step;
        Var x = slice_rows(input, t, 1);
        Var z = add_rowvec(add(matmul(x, w_x), matmul(hidden, w_h)), b);
        Var gi = sigmoid(slice_cols(z, 0, h));
        Var gf = sigmoid(slice_cols(z, h, h));
        Var go = sigmoid(slice_cols(z, 2 * h, h));
        Var gc = tanh_op(slice_cols(z, 3 * h, h));
        cell = add(mul(gf, cell), mul(gi, gc));
        hidden = mul(go, tanh_op(cell));
        outs[t] = hidden;
    }
    return concat_rows(outs);
}

Var Selector::recurrent_score(const Var& visual, const Var& semantic) const {
    if (visual->value.rows() == 0)
        throw std::invalid_argument("recurrent_score: empty sequence");
    Var input = concat_cols(visual, semantic);
    Var fwd = bilstm_direction(input, false);
    Var bwd = bilstm_direction(input, true);
    Var both = concat_cols(fwd, bwd);
    return sigmoid(add_rowvec(matmul(both, head_w_), head_b_));
}

Var Selector::fuse_scores(const Var& cosine, const Var& recurrent) const {
    if (cosine->value.rows() != recurrent->value.rows())
        throw std::invalid_argument("fuse_scores: length mismatch");
    Var alpha = sigmoid(alpha_raw_);
    Var one_minus = add_scalar(neg(alpha), 1.0);
    return add(scale_by(cosine, alpha), scale_by(recurrent, one_minus));
}

Var Selector::forward(const Var& visual, const Var& semantic) const {
    if (visual->value.cols() != cfg_.d_v || semantic->value.cols() != cfg_.d_s)
        throw std::invalid_argument(
            "selector: feature width does not match the configured d_v/d_s");
    Var sem = semantic;
    if (!cfg_.use_semantic)
        sem = constant(Mat::Zero(semantic->value.rows(), semantic->value.cols()));
    switch (cfg_.mode) {
        case ScoreMode::CosineOnly:
            return cosine_alignment(visual, sem);
        case ScoreMode::RecurrentOnly:
            return recurrent_score(visual, sem);
        case ScoreMode::Fused:
            break;
    }
    if (!cfg_.use_semantic) {
        // Without the semantic stream the alignment term carries no signal;
        // keep it neutral instead of dividing by a zero norm.
        Var neutral = constant(Mat::Constant(visual->value.rows(), 1, 0.5));
        return fuse_scores(neutral, recurrent_score(visual, sem));
    }
    return fuse_scores(cosine_alignment(visual, sem), recurrent_score(visual, sem));
}

ScoreSequence Selector::select(const Mat& visual, const Mat& semantic) const {
    if (visual.rows() != semantic.rows())
        throw std::invalid_argument("select: row count mismatch");
    Var s = forward(constant(visual), constant(semantic));
    ScoreSequence out;
    out.scores = s->value.col(0);
    out.mode = cfg_.mode;
    return out;
}

}  // namespace semsum
