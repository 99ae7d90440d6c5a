#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "semsum/ad.hpp"

namespace semsum::testutil {

using Mat = ad::Mat;

inline Mat random_mat(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
}

// Central-difference check of d(build())/d(params). build() must construct a
// fresh scalar graph from the params' current values on every call.
inline double max_grad_rel_err(const std::function<ad::Var()>& build,
                               const std::vector<ad::Var>& params,
                               double eps = 1e-6) {
    ad::Var loss = build();
    ad::backward(loss);
    std::vector<Mat> analytic;
    for (const auto& p : params) {
        p->ensure_grad();
        analytic.push_back(p->grad);
    }
    double worst = 0.0;
    for (size_t k = 0; k < params.size(); ++k) {
        Mat& v = params[k]->value;
        for (Eigen::Index i = 0; i < v.rows(); ++i)
            for (Eigen::Index j = 0; j < v.cols(); ++j) {
                double orig = v(i, j);
                v(i, j) = orig + eps;
                double fp = build()->scalar();
                v(i, j) = orig - eps;
                double fm = build()->scalar();
                v(i, j) = orig;
                double fd = (fp - fm) / (2.0 * eps);
                double g = analytic[k](i, j);
                double err = std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-4});
                worst = std::max(worst, err);
            }
    }
    return worst;
}

}  // namespace semsum::testutil
