#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "semsum/generator.hpp"
#include "semsum/losses.hpp"
#include "semsum/selector.hpp"
#include "test_util.hpp"

using namespace semsum;
using namespace semsum::ad;
using semsum::testutil::max_grad_rel_err;
using semsum::testutil::random_mat;

namespace {

GeneratorConfig small_config() {
    GeneratorConfig cfg;
    cfg.d_v = 6;
    cfg.d_s = 4;
    cfg.d_m = 8;
    cfg.heads = 2;
    cfg.d_f = 12;
    cfg.layers = 1;
    cfg.dropout = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("weight_features arithmetic") {
    std::mt19937_64 rng(1);
    Mat x = random_mat(3, 4, rng), t = random_mat(3, 2, rng);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    auto wf = weight_features(x, t, ones);
    CHECK(wf.visual == x);
    CHECK(wf.semantic == t);

    Eigen::VectorXd zeros = Eigen::VectorXd::Zero(3);
    auto wz = weight_features(x, t, zeros);
    CHECK(wz.visual.isZero(0.0));
    CHECK(wz.semantic.isZero(0.0));

    Mat single(1, 2);
    single << 2.0, 4.0;
    Eigen::VectorXd half = Eigen::VectorXd::Constant(1, 0.5);
    auto wh = weight_features(single, Mat::Zero(1, 1), half);
    CHECK(wh.visual(0, 0) == doctest::Approx(1.0));
    CHECK(wh.visual(0, 1) == doctest::Approx(2.0));

    CHECK_THROWS_AS(weight_features(x, t, Eigen::VectorXd::Ones(2)),
                    std::invalid_argument);
}

TEST_CASE("reconstruct shape contract under fuzzed T") {
    auto cfg = small_config();
    std::mt19937_64 rng(2);
    Generator gen(cfg, rng);
    for (int T : {1, 2, 3, 17, 64, 128}) {
        auto out = gen.reconstruct(constant(random_mat(T, cfg.d_v, rng)),
                                   constant(random_mat(T, cfg.d_s, rng)));
        CHECK(out.visual->value.rows() == T);
        CHECK(out.visual->value.cols() == cfg.d_v);
        CHECK(out.semantic->value.rows() == T);
        CHECK(out.semantic->value.cols() == cfg.d_s);
    }
}

TEST_CASE("eval mode is bitwise deterministic") {
    auto cfg = small_config();
    std::mt19937_64 rng(3);
    Generator gen(cfg, rng);
    Mat wv = random_mat(7, cfg.d_v, rng), ws = random_mat(7, cfg.d_s, rng);
    auto a = gen.reconstruct(constant(wv), constant(ws));
    auto b = gen.reconstruct(constant(wv), constant(ws));
    CHECK(a.visual->value == b.visual->value);
    CHECK(a.semantic->value == b.semantic->value);
}

TEST_CASE("positional encoding makes the output order sensitive") {
    auto cfg = small_config();
    std::mt19937_64 rng(4);
    Generator gen(cfg, rng);
    Mat wv = random_mat(6, cfg.d_v, rng), ws = random_mat(6, cfg.d_s, rng);
    auto base = gen.reconstruct(constant(wv), constant(ws));
    Mat pv = wv, ps = ws;
    pv.row(0).swap(pv.row(5));
    ps.row(0).swap(ps.row(5));
    auto permuted = gen.reconstruct(constant(pv), constant(ps));
    // row 2 never moved; with PE off its output would be unchanged too
    CHECK((base.visual->value.row(2) - permuted.visual->value.row(2))
              .cwiseAbs()
              .maxCoeff() > 1e-9);
}

TEST_CASE("zero layers with identity heads reduces to a linear map") {
    auto cfg = small_config();
    cfg.d_v = 4;
    cfg.d_s = 4;
    cfg.d_m = 8;
    cfg.layers = 0;
    std::mt19937_64 rng(5);
    Generator gen(cfg, rng);
    // identity input projection and slice heads make the whole map affine
    auto& ps = gen.params();
    Eigen::VectorXd flat = ps.flatten_values();
    // assemble by name to stay robust to parameter ordering
    long at = 0;
    for (size_t i = 0; i < ps.size(); ++i) {
        const auto& name = ps.names()[i];
        Mat m = ps.vars()[i]->value;
        if (name == "in_w") {
            m.setZero();
            for (int d = 0; d < 8; ++d) m(d, d) = 1.0;
        } else if (name == "head_v_w") {
            m.setZero();
            for (int d = 0; d < 4; ++d) m(d, d) = 1.0;
        } else if (name == "head_s_w") {
            m.setZero();
            for (int d = 0; d < 4; ++d) m(4 + d, d) = 1.0;
        } else {
            m.setZero();
        }
        Eigen::Map<Eigen::VectorXd> seg(flat.data() + at, m.size());
        seg = Eigen::Map<Eigen::VectorXd>(m.data(), m.size());
        at += m.size();
    }
    ps.assign_values(flat);
    Mat wv = random_mat(5, 4, rng), ws = random_mat(5, 4, rng);
    auto out = gen.reconstruct(constant(wv), constant(ws));
    Mat pe = Generator::positional_encoding(5, 8);
    CHECK((out.visual->value - (wv + pe.leftCols(4))).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((out.semantic->value - (ws + pe.rightCols(4))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("non-finite input is rejected") {
    auto cfg = small_config();
    std::mt19937_64 rng(6);
    Generator gen(cfg, rng);
    Mat bad = Mat::Zero(3, cfg.d_v);
    bad(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(gen.reconstruct(constant(bad), constant(Mat::Zero(3, cfg.d_s))),
                    std::invalid_argument);
}

TEST_CASE("reconstruction loss gradient reaches alpha_raw through the weighting") {
    SelectorConfig scfg;
    scfg.d_v = 4;
    scfg.d_s = 3;
    scfg.d_c = 3;
    scfg.hidden = 2;
    GeneratorConfig gcfg;
    gcfg.d_v = 4;
    gcfg.d_s = 3;
    gcfg.d_m = 4;
    gcfg.heads = 2;
    gcfg.d_f = 6;
    gcfg.layers = 1;
    gcfg.dropout = 0.0;
    std::mt19937_64 rng(7);
    Selector sel(scfg, rng);
    Generator gen(gcfg, rng);
    Mat v = random_mat(5, 4, rng), s = random_mat(5, 3, rng);
    LossWeights w;
    auto alpha_raw = sel.params().vars().back();
    auto build = [&]() {
        auto x = constant(v);
        auto t = constant(s);
        auto scores = sel.forward(x, t);
        auto out = gen.reconstruct(weight_rows(x, scores), weight_rows(t, scores));
        return reconstruction_loss(x, out.visual, t, out.semantic, w);
    };
    auto loss = build();
    backward(loss);
    double analytic = alpha_raw->grad(0, 0);
    CHECK(analytic != 0.0);
    CHECK(max_grad_rel_err(build, {alpha_raw}) < 1e-3);
}

TEST_CASE("dropout only perturbs training mode") {
    auto cfg = small_config();
    cfg.dropout = 0.5;
    std::mt19937_64 rng(8);
    Generator gen(cfg, rng);
    Mat wv = random_mat(6, cfg.d_v, rng), ws = random_mat(6, cfg.d_s, rng);
    auto eval1 = gen.reconstruct(constant(wv), constant(ws), false);
    auto eval2 = gen.reconstruct(constant(wv), constant(ws), false);
    CHECK(eval1.visual->value == eval2.visual->value);
    std::mt19937_64 drop_rng(1);
    auto train1 = gen.reconstruct(constant(wv), constant(ws), true, &drop_rng);
    CHECK((train1.visual->value - eval1.visual->value).cwiseAbs().maxCoeff() > 0.0);
}
