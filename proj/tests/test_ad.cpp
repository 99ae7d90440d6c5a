#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "semsum/ad.hpp"
#include "test_util.hpp"

using namespace semsum;
using namespace semsum::ad;
using semsum::testutil::max_grad_rel_err;
using semsum::testutil::random_mat;

TEST_CASE("basic op values") {
    auto a = constant(Mat::Constant(2, 2, 3.0));
    auto b = constant(Mat::Constant(2, 2, 2.0));
    CHECK(add(a, b)->value(0, 0) == 5.0);
    CHECK(mul(a, b)->value(1, 1) == 6.0);
    CHECK(matmul(a, b)->value(0, 0) == 12.0);
    CHECK(mean_all(a)->scalar() == 3.0);
    CHECK(sigmoid(constant(0.0))->scalar() == 0.5);
}

TEST_CASE("backward through a chain") {
    auto x = param(Mat::Constant(1, 1, 2.0));
    auto y = mul(x, x);           // x^2
    auto z = add(y, scale(x, 3)); // x^2 + 3x
    backward(z);
    CHECK(x->grad(0, 0) == doctest::Approx(7.0));  // 2x + 3
}

TEST_CASE("gradients match finite differences for composed graphs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto w1 = param(random_mat(4, 3, rng));
        auto w2 = param(random_mat(3, 4, rng));
        auto b = param(random_mat(1, 3, rng));
        auto x = constant(random_mat(5, 4, rng));
        Mat target = random_mat(5, 3, rng);
        auto build = [&]() {
            auto h = tanh_op(add_rowvec(matmul(x, w1), b));
            auto s = sigmoid(matmul(h, w2));
            auto sm = softmax_rows(matmul(s, w1));
            return mean_all(square(sub(sm, constant(target))));
        };
        CHECK(max_grad_rel_err(build, {w1, w2, b}) < 1e-5);
    }
}

TEST_CASE("layer_norm gradient") {
    std::mt19937_64 rng(5);
    auto x = param(random_mat(4, 6, rng));
    auto g = param(random_mat(1, 6, rng));
    auto bb = param(random_mat(1, 6, rng));
    auto build = [&]() { return mean_all(square(layer_norm(x, g, bb))); };
    CHECK(max_grad_rel_err(build, {x, g, bb}) < 1e-5);
}

TEST_CASE("reduction and slicing gradients") {
    std::mt19937_64 rng(9);
    auto x = param(random_mat(5, 4, rng));
    auto build = [&]() {
        auto top = slice_rows(x, 1, 3);
        auto cols = slice_cols(top, 0, 2);
        auto rs = sum_rows(square(cols));
        auto lo = reduce_min(x);
        auto hi = reduce_max(x);
        return add(mean_all(rs), mul(lo, hi));
    };
    CHECK(max_grad_rel_err(build, {x}) < 1e-5);
}

TEST_CASE("mul_colvec and scalar broadcast gradients") {
    std::mt19937_64 rng(3);
    auto x = param(random_mat(6, 3, rng));
    auto s = param(random_mat(6, 1, rng));
    auto c = param(random_mat(1, 1, rng));
    auto build = [&]() {
        return mean_all(square(add_scalar_node(mul_colvec(x, s), c)));
    };
    CHECK(max_grad_rel_err(build, {x, s, c}) < 1e-5);
}

TEST_CASE("abs/log/sqrt/cdiv gradients away from kinks") {
    std::mt19937_64 rng(21);
    auto x = param(random_mat(3, 3, rng).array().abs().matrix() + Mat::Constant(3, 3, 0.5));
    auto y = param(random_mat(3, 3, rng).array().abs().matrix() + Mat::Constant(3, 3, 0.5));
    auto build = [&]() {
        auto t = cdiv(log_clamped(x), sqrt_eps(y));
        return mean_all(abs_val(add_scalar(t, -0.1)));
    };
    CHECK(max_grad_rel_err(build, {x, y}) < 1e-5);
}

TEST_CASE("concat gradients") {
    std::mt19937_64 rng(33);
    auto a = param(random_mat(2, 3, rng));
    auto b = param(random_mat(2, 2, rng));
    auto build = [&]() {
        auto cc = concat_cols(a, b);
        auto rr = concat_rows({slice_rows(cc, 0, 1), slice_rows(cc, 1, 1)});
        return mean_all(square(rr));
    };
    CHECK(max_grad_rel_err(build, {a, b}) < 1e-5);
}

TEST_CASE("backward rejects non-scalar roots") {
    auto x = param(Mat::Ones(2, 2));
    CHECK_THROWS_AS(backward(mul(x, x)), std::invalid_argument);
}
