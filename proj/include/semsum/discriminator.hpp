#pragma once

#include <random>

#include "semsum/ad.hpp"
#include "semsum/model_common.hpp"

namespace semsum {

struct DiscriminatorConfig {
    int d_v = 1024;
    int d_s = 512;
    int hidden = 256;
};

// Unidirectional LSTM over concatenated (visual, semantic) rows; the final
// hidden state feeds a scalar head. Output is P(sequence is original).
class Discriminator {
public:
    Discriminator(const DiscriminatorConfig& cfg, std::mt19937_64& rng);

    ad::Var forward(const ad::Var& visual, const ad::Var& semantic) const;  // 1x1 prob
    double discriminate(const Mat& visual, const Mat& semantic) const;

    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }
    const DiscriminatorConfig& config() const { return cfg_; }

private:
    DiscriminatorConfig cfg_;
    ParamSet params_;
    ad::Var w_x_, w_h_, b_;
    ad::Var head_w_, head_b_;
};

}  // namespace semsum
