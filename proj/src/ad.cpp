#include "semsum/ad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace semsum::ad {

Var constant(Mat v) { return std::make_shared<Node>(std::move(v), false); }
Var constant(double v) { return constant(Mat::Constant(1, 1, v)); }
Var param(Mat v) { return std::make_shared<Node>(std::move(v), true); }

namespace {

bool needs(const Var& a) { return a->requires_grad; }

Var make(Mat value, std::vector<Var> parents, std::function<void(Node&)> fn) {
    bool rg = false;
    for (const auto& p : parents) rg = rg || p->requires_grad;
    auto n = std::make_shared<Node>(std::move(value), rg);
    if (rg) {
        n->parents = std::move(parents);
        n->backward_fn = std::move(fn);
    }
    return n;
}

void topo(const Var& v, std::unordered_set<Node*>& seen, std::vector<Var>& order) {
    if (!v->requires_grad || seen.count(v.get())) return;
    seen.insert(v.get());
    for (const auto& p : v->parents) topo(p, seen, order);
    order.push_back(v);
}

}  // namespace

void backward(const Var& root) {
    if (root->value.size() != 1)
        throw std::invalid_argument("backward: root must be scalar");
    std::unordered_set<Node*> seen;
    std::vector<Var> order;
    topo(root, seen, order);
    for (const auto& n : order) n->ensure_grad(), n->grad.setZero();
    root->ensure_grad();
    root->grad(0, 0) = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backward_fn) (*it)->backward_fn(**it);
}

Var add(const Var& a, const Var& b) {
    return make(a->value + b->value, {a, b}, [a, b](Node& n) {
        if (needs(a)) a->grad += n.grad;
        if (needs(b)) b->grad += n.grad;
    });
}

Var sub(const Var& a, const Var& b) {
    return make(a->value - b->value, {a, b}, [a, b](Node& n) {
        if (needs(a)) a->grad += n.grad;
        if (needs(b)) b->grad -= n.grad;
    });
}

Var mul(const Var& a, const Var& b) {
    return make(a->value.cwiseProduct(b->value), {a, b}, [a, b](Node& n) {
        if (needs(a)) a->grad += n.grad.cwiseProduct(b->value);
        if (needs(b)) b->grad += n.grad.cwiseProduct(a->value);
    });
}

Var cdiv(const Var& a, const Var& b) {
    return make(a->value.cwiseQuotient(b->value), {a, b}, [a, b](Node& n) {
        if (needs(a)) a->grad += n.grad.cwiseQuotient(b->value);
        if (needs(b))
            b->grad -= n.grad.cwiseProduct(a->value).cwiseQuotient(b->value.cwiseAbs2());
    });
}

Var matmul(const Var& a, const Var& b) {
    return make(a->value * b->value, {a, b}, [a, b](Node& n) {
        if (needs(a)) a->grad += n.grad * b->value.transpose();
        if (needs(b)) b->grad += a->value.transpose() * n.grad;
    });
}

Var transpose(const Var& a) {
    return make(a->value.transpose(), {a},
                [a](Node& n) { a->grad += n.grad.transpose(); });
}

Var scale(const Var& a, double s) {
    return make(a->value * s, {a}, [a, s](Node& n) { a->grad += n.grad * s; });
}

Var add_scalar(const Var& a, double s) {
    return make(a->value.array() + s, {a}, [a](Node& n) { a->grad += n.grad; });
}

Var scale_by(const Var& a, const Var& s) {
    return make(a->value * s->scalar(), {a, s}, [a, s](Node& n) {
        if (needs(a)) a->grad += n.grad * s->value(0, 0);
        if (needs(s)) s->grad(0, 0) += n.grad.cwiseProduct(a->value).sum();
    });
}

Var add_scalar_node(const Var& a, const Var& s) {
    return make(a->value.array() + s->scalar(), {a, s}, [a, s](Node& n) {
        if (needs(a)) a->grad += n.grad;
        if (needs(s)) s->grad(0, 0) += n.grad.sum();
    });
}

Var add_rowvec(const Var& a, const Var& row) {
    Mat out = a->value;
    out.rowwise() += Eigen::RowVectorXd(row->value.row(0));
    return make(std::move(out), {a, row}, [a, row](Node& n) {
        if (needs(a)) a->grad += n.grad;
        if (needs(row)) row->grad += n.grad.colwise().sum();
    });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var square(const Var& a) {
    return make(a->value.cwiseAbs2(), {a}, [a](Node& n) {
        a->grad += 2.0 * n.grad.cwiseProduct(a->value);
    });
}

Var sqrt_eps(const Var& a, double eps) {
    Mat out = (a->value.array() + eps).sqrt();
    return make(out, {a}, [a, out](Node& n) {
        a->grad += n.grad.cwiseQuotient(2.0 * out);
    });
}

Var log_clamped(const Var& a, double eps) {
    Mat clamped = a->value.cwiseMax(eps);
    return make(clamped.array().log(), {a}, [a, clamped](Node& n) {
        a->grad += n.grad.cwiseQuotient(clamped);
    });
}

Var abs_val(const Var& a) {
    return make(a->value.cwiseAbs(), {a}, [a](Node& n) {
        a->grad += n.grad.cwiseProduct(a->value.unaryExpr(
            [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }));
    });
}

Var sigmoid(const Var& a) {
    Mat out = a->value.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    return make(out, {a}, [a, out](Node& n) {
        a->grad += n.grad.cwiseProduct(out.cwiseProduct(Mat::Ones(out.rows(), out.cols()) - out));
    });
}

Var tanh_op(const Var& a) {
    Mat out = a->value.array().tanh();
    return make(out, {a}, [a, out](Node& n) {
        a->grad += n.grad.cwiseProduct(Mat::Ones(out.rows(), out.cols()) - out.cwiseAbs2());
    });
}

Var relu(const Var& a) {
    Mat out = a->value.cwiseMax(0.0);
    return make(out, {a}, [a](Node& n) {
        a->grad += n.grad.cwiseProduct(a->value.unaryExpr(
            [](double v) { return v > 0 ? 1.0 : 0.0; }));
    });
}

Var sum_all(const Var& a) {
    return make(Mat::Constant(1, 1, a->value.sum()), {a}, [a](Node& n) {
        a->grad.array() += n.grad(0, 0);
    });
}

Var sum_rows(const Var& a) {
    return make(a->value.rowwise().sum(), {a}, [a](Node& n) {
        a->grad += n.grad.col(0) * Eigen::RowVectorXd::Ones(a->value.cols());
    });
}

Var mul_colvec(const Var& a, const Var& col) {
    Mat out = a->value.array().colwise() * col->value.col(0).array();
    return make(std::move(out), {a, col}, [a, col](Node& n) {
        if (needs(a))
            a->grad += (n.grad.array().colwise() * col->value.col(0).array()).matrix();
        if (needs(col))
            col->grad.col(0) += n.grad.cwiseProduct(a->value).rowwise().sum();
    });
}

Var mean_all(const Var& a) {
    const double inv = 1.0 / static_cast<double>(a->value.size());
    return make(Mat::Constant(1, 1, a->value.mean()), {a}, [a, inv](Node& n) {
        a->grad.array() += n.grad(0, 0) * inv;
    });
}

Var reduce_min(const Var& a) {
    Eigen::Index r, c;
    double m = a->value.minCoeff(&r, &c);
    return make(Mat::Constant(1, 1, m), {a}, [a, r, c](Node& n) {
        a->grad(r, c) += n.grad(0, 0);
    });
}

Var reduce_max(const Var& a) {
    Eigen::Index r, c;
    double m = a->value.maxCoeff(&r, &c);
    return make(Mat::Constant(1, 1, m), {a}, [a, r, c](Node& n) {
        a->grad(r, c) += n.grad(0, 0);
    });
}

Var smin(const Var& a, const Var& b) {
    bool pick_a = a->scalar() <= b->scalar();
    return make(Mat::Constant(1, 1, pick_a ? a->scalar() : b->scalar()), {a, b},
                [a, b, pick_a](Node& n) {
                    auto& t = pick_a ? a : b;
                    if (needs(t)) t->grad(0, 0) += n.grad(0, 0);
                });
}

Var smax(const Var& a, const Var& b) {
    bool pick_a = a->scalar() >= b->scalar();
    return make(Mat::Constant(1, 1, pick_a ? a->scalar() : b->scalar()), {a, b},
                [a, b, pick_a](Node& n) {
                    auto& t = pick_a ? a : b;
                    if (needs(t)) t->grad(0, 0) += n.grad(0, 0);
                });
}

Var softmax_rows(const Var& a) {
    Mat out = a->value;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        Eigen::RowVectorXd row = out.row(i);
        row.array() -= row.maxCoeff();
        row = row.array().exp();
        out.row(i) = row / row.sum();
    }
    return make(out, {a}, [a, out](Node& n) {
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            Eigen::RowVectorXd s = out.row(i);
            Eigen::RowVectorXd g = n.grad.row(i);
            double dot = g.cwiseProduct(s).sum();
            a->grad.row(i) += (g.array() - dot).matrix().cwiseProduct(s);
        }
    });
}

Var concat_cols(const Var& a, const Var& b) {
    Mat out(a->value.rows(), a->value.cols() + b->value.cols());
    out << a->value, b->value;
    const int ca = static_cast<int>(a->value.cols());
    const int cb = static_cast<int>(b->value.cols());
    return make(std::move(out), {a, b}, [a, b, ca, cb](Node& n) {
        if (needs(a)) a->grad += n.grad.leftCols(ca);
        if (needs(b)) b->grad += n.grad.rightCols(cb);
    });
}

Var concat_rows(const std::vector<Var>& rows) {
    if (rows.empty()) throw std::invalid_argument("concat_rows: empty");
    Eigen::Index total = 0;
    for (const auto& r : rows) total += r->value.rows();
    Mat out(total, rows[0]->value.cols());
    Eigen::Index at = 0;
    for (const auto& r : rows) {
        out.middleRows(at, r->value.rows()) = r->value;
        at += r->value.rows();
    }
    return make(std::move(out), rows, [rows](Node& n) {
        Eigen::Index at = 0;
        for (const auto& r : rows) {
            if (needs(r)) r->grad += n.grad.middleRows(at, r->value.rows());
            at += r->value.rows();
        }
    });
}

Var slice_cols(const Var& a, int start, int ncols) {
    return make(a->value.middleCols(start, ncols), {a}, [a, start, ncols](Node& n) {
        a->grad.middleCols(start, ncols) += n.grad;
    });
}

Var slice_rows(const Var& a, int start, int nrows) {
    return make(a->value.middleRows(start, nrows), {a}, [a, start, nrows](Node& n) {
        a->grad.middleRows(start, nrows) += n.grad;
    });
}

Var dropout(const Var& a, const Mat& keep_mask, double keep_prob) {
    Mat scaled = keep_mask / keep_prob;
    return make(a->value.cwiseProduct(scaled), {a}, [a, scaled](Node& n) {
        a->grad += n.grad.cwiseProduct(scaled);
    });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
    const Eigen::Index R = x->value.rows(), C = x->value.cols();
    Mat mu(R, 1), inv_sd(R, 1), xhat(R, C);
    for (Eigen::Index i = 0; i < R; ++i) {
        double m = x->value.row(i).mean();
        double var = (x->value.row(i).array() - m).square().mean();
        mu(i, 0) = m;
        inv_sd(i, 0) = 1.0 / std::sqrt(var + eps);
        xhat.row(i) = (x->value.row(i).array() - m) * inv_sd(i, 0);
    }
    Mat out = xhat;
    for (Eigen::Index i = 0; i < R; ++i)
        out.row(i) = out.row(i).cwiseProduct(gamma->value.row(0)) + beta->value.row(0);
    return make(std::move(out), {x, gamma, beta},
                [x, gamma, beta, xhat, inv_sd](Node& n) {
                    const Eigen::Index R = xhat.rows(), C = xhat.cols();
                    if (needs(gamma))
                        gamma->grad += n.grad.cwiseProduct(xhat).colwise().sum();
                    if (needs(beta)) beta->grad += n.grad.colwise().sum();
                    if (needs(x)) {
                        for (Eigen::Index i = 0; i < R; ++i) {
                            Eigen::RowVectorXd gh =
                                n.grad.row(i).cwiseProduct(gamma->value.row(0));
                            double gsum = gh.sum();
                            double gdot = gh.cwiseProduct(xhat.row(i)).sum();
                            x->grad.row(i) +=
                                inv_sd(i, 0) / static_cast<double>(C) *
                                (static_cast<double>(C) * gh.array() - gsum -
                                 xhat.row(i).array() * gdot)
                                    .matrix();
                        }
                    }
                });
}

}  // namespace semsum::ad
