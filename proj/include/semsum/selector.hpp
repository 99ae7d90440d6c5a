#pragma once

#include <random>
#include <string>

#include "semsum/ad.hpp"
#include "semsum/model_common.hpp"

namespace semsum {

enum class ScoreMode { Fused, CosineOnly, RecurrentOnly };

std::string to_string(ScoreMode m);
ScoreMode score_mode_from_string(const std::string& s);

struct ScoreSequence {
    Eigen::VectorXd scores;  // length T, each in [0,1]
    ScoreMode mode = ScoreMode::Fused;
};

struct SelectorConfig {
    int d_v = 1024;
    int d_s = 512;
    int d_c = 128;   // common alignment space
    int hidden = 256;  // per direction
    ScoreMode mode = ScoreMode::Fused;
    bool use_semantic = true;  // multimodal ablation toggle
};

// FSSA frame selector: convex fusion of cross-modal cosine alignment and a
// bidirectional LSTM score, weighted by a learnable alpha = logistic(alpha_raw).
class Selector {
public:
    Selector(const SelectorConfig& cfg, std::mt19937_64& rng);

    // Graph-building forward passes. Inputs are constants on the tape; the
    // returned T x 1 node depends on this selector's parameters.
    ad::Var cosine_alignment(const ad::Var& visual, const ad::Var& semantic) const;
    ad::Var recurrent_score(const ad::Var& visual, const ad::Var& semantic) const;
    ad::Var fuse_scores(const ad::Var& cosine, const ad::Var& recurrent) const;
    ad::Var forward(const ad::Var& visual, const ad::Var& semantic) const;

    // Inference convenience: validates inputs, detaches to plain scores.
    ScoreSequence select(const Mat& visual, const Mat& semantic) const;

    double alpha() const;  // logistic(alpha_raw), always in (0,1)
    long zero_norm_frames() const { return zero_norm_count_; }

    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }
    const SelectorConfig& config() const { return cfg_; }

private:
    ad::Var bilstm_direction(const ad::Var& input, bool reverse) const;

    SelectorConfig cfg_;
    ParamSet params_;
    ad::Var proj_v_, proj_s_;
    ad::Var w_x_fwd_, w_h_fwd_, b_fwd_;
    ad::Var w_x_bwd_, w_h_bwd_, b_bwd_;
    ad::Var head_w_, head_b_;
    ad::Var alpha_raw_;
    mutable long zero_norm_count_ = 0;
};

}  // namespace semsum
