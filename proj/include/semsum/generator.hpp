#pragma once

#include <random>

#include "semsum/ad.hpp"
#include "semsum/model_common.hpp"

namespace semsum {

struct GeneratorConfig {
    int d_v = 1024;
    int d_s = 512;
    int d_m = 256;  // model width, divisible by heads
    int heads = 4;
    int d_f = 512;  // feed-forward width
    int layers = 2; // 0 gives a purely linear autoencoder
    double dropout = 0.1;
};

struct WeightedFeatures {
    Mat visual;    // T x d_v, row t scaled by S_t
    Mat semantic;  // T x d_s
};

// Score-weighted feature rows: W_t = S_t * X_t, V_t = S_t * T_t.
ad::Var weight_rows(const ad::Var& features, const ad::Var& scores);
WeightedFeatures weight_features(const Mat& visual, const Mat& semantic,
                                 const Eigen::VectorXd& scores);

// Encoder-only transformer autoencoder over concatenated weighted rows, with
// sinusoidal positional encoding and separate visual / semantic output heads.
class Generator {
public:
    Generator(const GeneratorConfig& cfg, std::mt19937_64& rng);

    struct Output {
        ad::Var visual;    // T x d_v reconstruction
        ad::Var semantic;  // T x d_s reconstruction
    };

    // training=true applies inverted dropout driven by rng; eval mode is
    // deterministic and rng is unused.
    Output reconstruct(const ad::Var& weighted_visual, const ad::Var& weighted_semantic,
                       bool training = false, std::mt19937_64* rng = nullptr) const;

    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }
    const GeneratorConfig& config() const { return cfg_; }

    static Mat positional_encoding(int T, int d_m);

private:
    GeneratorConfig cfg_;
    ParamSet params_;
    ad::Var in_w_, in_b_;
    struct Layer {
        ad::Var ln1_g, ln1_b, ln2_g, ln2_b;
        ad::Var w_q, w_k, w_v, w_o;
        ad::Var ff1_w, ff1_b, ff2_w, ff2_b;
    };
    std::vector<Layer> layers_;
    ad::Var head_v_w_, head_v_b_, head_s_w_, head_s_b_;
};

}  // namespace semsum
