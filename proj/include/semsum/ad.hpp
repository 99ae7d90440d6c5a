#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

namespace semsum::ad {

using Mat = Eigen::MatrixXd;

// Reverse-mode tape node. Scalars are 1x1 matrices.
struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    explicit Node(Mat v, bool rg = false)
        : value(std::move(v)), requires_grad(rg) {
        if (requires_grad) grad = Mat::Zero(value.rows(), value.cols());
    }
    void ensure_grad() {
        if (grad.size() == 0) grad = Mat::Zero(value.rows(), value.cols());
    }
    double scalar() const { return value(0, 0); }
};

using Var = std::shared_ptr<Node>;

Var constant(Mat v);
Var constant(double v);
Var param(Mat v);

// Runs reverse accumulation from a scalar root. Seeds d(root)/d(root) = 1.
void backward(const Var& root);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);   // elementwise
Var cdiv(const Var& a, const Var& b);  // elementwise
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var scale_by(const Var& a, const Var& s);      // s is 1x1, broadcast
Var add_scalar_node(const Var& a, const Var& s);  // s is 1x1, broadcast
Var add_rowvec(const Var& a, const Var& row);  // broadcast row to each row of a

Var neg(const Var& a);
Var square(const Var& a);
Var sqrt_eps(const Var& a, double eps = 0.0);
Var log_clamped(const Var& a, double eps = 1e-12);
Var abs_val(const Var& a);
Var sigmoid(const Var& a);
Var tanh_op(const Var& a);
Var relu(const Var& a);

Var sum_all(const Var& a);
Var sum_rows(const Var& a);                   // T x d -> T x 1
Var mul_colvec(const Var& a, const Var& col); // scale row i of a by col(i)
Var mean_all(const Var& a);
Var reduce_min(const Var& a);  // gradient to the first argmin entry
Var reduce_max(const Var& a);
Var smin(const Var& a, const Var& b);  // scalar min of two 1x1 nodes
Var smax(const Var& a, const Var& b);

Var softmax_rows(const Var& a);
Var concat_cols(const Var& a, const Var& b);
Var concat_rows(const std::vector<Var>& rows);
Var slice_cols(const Var& a, int start, int n);
Var slice_rows(const Var& a, int start, int n);
Var dropout(const Var& a, const Mat& keep_mask, double keep_prob);

// x normalized per row to zero mean / unit variance, then gamma/beta (row vectors).
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

}  // namespace semsum::ad
