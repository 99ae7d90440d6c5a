#include "semsum/model_common.hpp"

#include <cmath>

namespace semsum {

Eigen::VectorXd ParamSet::flatten_values() const {
    Eigen::VectorXd out(n_scalars());
    long at = 0;
    for (const auto& v : vars_) {
        Eigen::Map<const Eigen::VectorXd> m(v->value.data(), v->value.size());
        out.segment(at, v->value.size()) = m;
        at += v->value.size();
    }
    return out;
}

Eigen::VectorXd ParamSet::flatten_grads() const {
    Eigen::VectorXd out(n_scalars());
    long at = 0;
    for (const auto& v : vars_) {
        if (v->grad.size() == 0)
            out.segment(at, v->value.size()).setZero();
        else {
            Eigen::Map<const Eigen::VectorXd> m(v->grad.data(), v->grad.size());
            out.segment(at, v->grad.size()) = m;
        }
        at += v->value.size();
    }
    return out;
}

void ParamSet::assign_values(const Eigen::VectorXd& flat) {
    long at = 0;
    for (auto& v : vars_) {
        Eigen::Map<Eigen::VectorXd> m(v->value.data(), v->value.size());
        m = flat.segment(at, v->value.size());
        at += v->value.size();
    }
}

long ParamSet::n_scalars() const {
    long n = 0;
    for (const auto& v : vars_) n += v->value.size();
    return n;
}

Mat glorot(int rows, int cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

Mat identity_slice(int rows, int cols) {
    Mat m = Mat::Zero(rows, cols);
    const int k = std::min(rows, cols);
    for (int i = 0; i < k; ++i) m(i, i) = 1.0;
    return m;
}

}  // namespace semsum
