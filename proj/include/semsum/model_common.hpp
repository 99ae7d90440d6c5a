#pragma once

#include <random>
#include <string>
#include <vector>

#include "semsum/ad.hpp"

namespace semsum {

using Mat = ad::Mat;

// Named learnable tensors shared between forward passes, optimizer steps and
// checkpoint serialization. Order is construction order and is stable.
class ParamSet {
public:
    ad::Var add(const std::string& name, Mat init) {
        auto v = ad::param(std::move(init));
        names_.push_back(name);
        vars_.push_back(v);
        return v;
    }
    size_t size() const { return vars_.size(); }
    const std::vector<ad::Var>& vars() const { return vars_; }
    const std::vector<std::string>& names() const { return names_; }

    void zero_grad() {
        for (auto& v : vars_) {
            v->ensure_grad();
            v->grad.setZero();
        }
    }

    Eigen::VectorXd flatten_values() const;
    Eigen::VectorXd flatten_grads() const;
    void assign_values(const Eigen::VectorXd& flat);
    long n_scalars() const;

private:
    std::vector<std::string> names_;
    std::vector<ad::Var> vars_;
};

// Uniform(-limit, limit) init with limit = sqrt(6/(fan_in+fan_out)).
Mat glorot(int rows, int cols, std::mt19937_64& rng);

// Identity on the leading square block, zero elsewhere. Keeps a learned
// projection close to a coordinate slice at the start of training.
Mat identity_slice(int rows, int cols);

}  // namespace semsum
