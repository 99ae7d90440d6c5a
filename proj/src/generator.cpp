#include "semsum/generator.hpp"

#include <cmath>
#include <stdexcept>

namespace semsum {

using namespace ad;

Var weight_rows(const Var& features, const Var& scores) {
    if (features->value.rows() != scores->value.rows())
        throw std::invalid_argument("weight_rows: length mismatch");
    return mul_colvec(features, scores);
}

WeightedFeatures weight_features(const Mat& visual, const Mat& semantic,
                                 const Eigen::VectorXd& scores) {
    if (visual.rows() != scores.size() || semantic.rows() != scores.size())
        throw std::invalid_argument("weight_features: length mismatch");
    WeightedFeatures wf;
    wf.visual = visual.array().colwise() * scores.array();
    wf.semantic = semantic.array().colwise() * scores.array();
    return wf;
}

Generator::Generator(const GeneratorConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
    if (cfg.d_m % cfg.heads != 0)
        throw std::invalid_argument("generator: d_m must be divisible by heads");
    const int d_in = cfg.d_v + cfg.d_s;
    in_w_ = params_.add("in_w", glorot(d_in, cfg.d_m, rng));
    in_b_ = params_.add("in_b", Mat::Zero(1, cfg.d_m));
    layers_.resize(cfg.layers);
    for (int l = 0; l < cfg.layers; ++l) {
        auto tag = [l](const char* n) { return "layer" + std::to_string(l) + "." + n; };
        Layer& L = layers_[l];
        L.ln1_g = params_.add(tag("ln1_g"), Mat::Ones(1, cfg.d_m));
        L.ln1_b = params_.add(tag("ln1_b"), Mat::Zero(1, cfg.d_m));
        L.w_q = params_.add(tag("w_q"), glorot(cfg.d_m, cfg.d_m, rng));
        L.w_k = params_.add(tag("w_k"), glorot(cfg.d_m, cfg.d_m, rng));
        L.w_v = params_.add(tag("w_v"), glorot(cfg.d_m, cfg.d_m, rng));
        L.w_o = params_.add(tag("w_o"), glorot(cfg.d_m, cfg.d_m, rng));
        L.ln2_g = params_.add(tag("ln2_g"), Mat::Ones(1, cfg.d_m));
        L.ln2_b = params_.add(tag("ln2_b"), Mat::Zero(1, cfg.d_m));
        L.ff1_w = params_.add(tag("ff1_w"), glorot(cfg.d_m, cfg.d_f, rng));
        L.ff1_b = params_.add(tag("ff1_b"), Mat::Zero(1, cfg.d_f));
        L.ff2_w = params_.add(tag("ff2_w"), glorot(cfg.d_f, cfg.d_m, rng));
        L.ff2_b = params_.add(tag("ff2_b"), Mat::Zero(1, cfg.d_m));
    }
    head_v_w_ = params_.add("head_v_w", glorot(cfg.d_m, cfg.d_v, rng));
    head_v_b_ = params_.add("head_v_b", Mat::Zero(1, cfg.d_v));
    head_s_w_ = params_.add("head_s_w", glorot(cfg.d_m, cfg.d_s, rng));
    head_s_b_ = params_.add("head_s_b", Mat::Zero(1, cfg.d_s));
}

Mat Generator::positional_encoding(int T, int d_m) {
    Mat pe(T, d_m);
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < d_m; ++i) {
            double angle = t / std::pow(10000.0, 2.0 * (i / 2) / d_m);
            pe(t, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    return pe;
}

Generator::Output Generator::reconstruct(const Var& weighted_visual,
                                         const Var& weighted_semantic, bool training,
                                         std::mt19937_64* rng) const {
    if (!weighted_visual->value.allFinite() || !weighted_semantic->value.allFinite())
        throw std::invalid_argument("reconstruct: non-finite input");
    const int T = static_cast<int>(weighted_visual->value.rows());
    const int d_h = cfg_.d_m / cfg_.heads;
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(d_h));

    auto maybe_dropout = [&](Var x) {
        if (!training || cfg_.dropout <= 0.0 || rng == nullptr) return x;
        std::bernoulli_distribution keep(1.0 - cfg_.dropout);
        Mat mask(x->value.rows(), x->value.cols());
        for (Eigen::Index i = 0; i < mask.rows(); ++i)
            for (Eigen::Index j = 0; j < mask.cols(); ++j)
                mask(i, j) = keep(*rng) ? 1.0 : 0.0;
        return dropout(x, mask, 1.0 - cfg_.dropout);
    };

    Var x = add_rowvec(matmul(concat_cols(weighted_visual, weighted_semantic), in_w_),
                       in_b_);
    x = add(x, constant(positional_encoding(T, cfg_.d_m)));
    x = maybe_dropout(x);

    for (const Layer& L : layers_) {
        Var normed = layer_norm(x, L.ln1_g, L.ln1_b);
        Var q = matmul(normed, L.w_q);
        Var k = matmul(normed, L.w_k);
        Var v = matmul(normed, L.w_v);
        std::vector<Var> head_outs;
        for (int h = 0; h < cfg_.heads; ++h) {
            Var qh = slice_cols(q, h * d_h, d_h);
            Var kh = slice_cols(k, h * d_h, d_h);
            Var vh = slice_cols(v, h * d_h, d_h);
            Var att = softmax_rows(scale(matmul(qh, transpose(kh)), att_scale));
            head_outs.push_back(matmul(att, vh));
        }
        Var merged = head_outs[0];
        for (size_t h = 1; h < head_outs.size(); ++h)
            merged = concat_cols(merged, head_outs[h]);
        x = add(x, maybe_dropout(matmul(merged, L.w_o)));

        Var normed2 = layer_norm(x, L.ln2_g, L.ln2_b);
        Var ff = add_rowvec(matmul(relu(add_rowvec(matmul(normed2, L.ff1_w), L.ff1_b)),
                                   L.ff2_w),
                            L.ff2_b);
        x = add(x, maybe_dropout(ff));
    }

    Output out;
    out.visual = add_rowvec(matmul(x, head_v_w_), head_v_b_);
    out.semantic = add_rowvec(matmul(x, head_s_w_), head_s_b_);
    return out;
}

}  // namespace semsum
