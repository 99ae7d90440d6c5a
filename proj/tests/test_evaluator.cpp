#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "semsum/evaluator.hpp"

using namespace semsum;

namespace {

Eigen::VectorX<uint8_t> bits(std::initializer_list<int> v) {
    Eigen::VectorX<uint8_t> out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (int b : v) out(i++) = static_cast<uint8_t>(b);
    return out;
}

Eigen::VectorX<uint8_t> random_bits(int n, std::mt19937_64& rng) {
    Eigen::VectorX<uint8_t> out(n);
    for (int i = 0; i < n; ++i) out(i) = static_cast<uint8_t>(rng() % 2);
    return out;
}

VideoRecord toy_record(int T, int frames_per_pick, int n_users,
                       std::mt19937_64& rng) {
    VideoRecord rec;
    rec.video_id = "toy";
    rec.n_frames = static_cast<long>(T) * frames_per_pick;
    rec.visual = Mat::Zero(T, 2);
    rec.semantic = Mat::Zero(T, 2);
    for (int t = 0; t < T; ++t) rec.picks.push_back(t * frames_per_pick);
    for (int t = 0; t < T; ++t)
        rec.change_points.emplace_back(t * frames_per_pick,
                                       (t + 1) * frames_per_pick - 1);
    Eigen::MatrixX<uint8_t> users(n_users, rec.n_frames);
    for (int u = 0; u < n_users; ++u)
        users.row(u) = random_bits(static_cast<int>(rec.n_frames), rng).transpose();
    rec.user_summaries = users;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd gt(T);
    for (int t = 0; t < T; ++t) gt(t) = unif(rng);
    rec.gt_score = gt;
    return rec;
}

}  // namespace

TEST_CASE("f1_frame hand cases") {
    auto a = bits({1, 1, 0, 0});
    CHECK(f1_frame(a, a) == doctest::Approx(1.0));
    CHECK(f1_frame(bits({1, 1, 0, 0}), bits({0, 0, 1, 1})) == 0.0);
    CHECK(f1_frame(bits({0, 0, 0, 0}), bits({1, 1, 0, 0})) == 0.0);
    CHECK(f1_frame(bits({1, 1, 0, 0}), bits({0, 0, 0, 0})) == 0.0);

    // P=0.6, R=0.5 -> F1 = 2*0.3/1.1
    Eigen::VectorX<uint8_t> pred(12), gt(12);
    pred.setZero();
    gt.setZero();
    for (int i = 0; i < 5; ++i) pred(i) = 1;       // |A| = 5
    for (int i = 2; i < 8; ++i) gt(i) = 1;         // |G| = 6, overlap = 3
    CHECK(f1_frame(pred, gt) == doctest::Approx(2.0 * 0.3 / 1.1).epsilon(1e-9));

    CHECK_THROWS_AS(f1_frame(bits({1}), bits({1, 0})), std::invalid_argument);
}

TEST_CASE("f1_frame symmetry and zero-padding invariance") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 500; ++t) {
        int n = 1 + static_cast<int>(rng() % 40);
        auto a = random_bits(n, rng);
        auto g = random_bits(n, rng);
        double f = f1_frame(a, g);
        CHECK(f == doctest::Approx(f1_frame(g, a)).epsilon(1e-12));
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        Eigen::VectorX<uint8_t> a2(n + 5), g2(n + 5);
        a2.setZero();
        g2.setZero();
        a2.head(n) = a;
        g2.head(n) = g;
        CHECK(f1_frame(a2, g2) == doctest::Approx(f).epsilon(1e-12));
    }
}

TEST_CASE("protocol reductions") {
    std::mt19937_64 rng(2);
    VideoRecord rec = toy_record(6, 5, 1, rng);
    SummaryMask mask;
    mask.mask = random_bits(static_cast<int>(rec.n_frames), rng);
    Eigen::VectorX<uint8_t> user = rec.user_summaries->row(0).transpose();
    double single = f1_frame(mask.mask, user);
    CHECK(evaluate_video(mask, rec, Protocol::MaxUser) == doctest::Approx(single));
    CHECK(evaluate_video(mask, rec, Protocol::MeanUser) == doctest::Approx(single));

    // exact user match -> max-user 1.0
    SummaryMask exact;
    exact.mask = user;
    if (user.cast<long>().sum() > 0)
        CHECK(evaluate_video(exact, rec, Protocol::MaxUser) == doctest::Approx(1.0));
}

TEST_CASE("max-user dominates mean-user") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        VideoRecord rec = toy_record(6, 5, 4, rng);
        SummaryMask mask;
        mask.mask = random_bits(static_cast<int>(rec.n_frames), rng);
        CHECK(evaluate_video(mask, rec, Protocol::MaxUser) >=
              evaluate_video(mask, rec, Protocol::MeanUser));
    }
}

TEST_CASE("two-user arithmetic") {
    std::mt19937_64 rng(4);
    VideoRecord rec = toy_record(4, 5, 2, rng);
    // craft users so the mask hits f1=1 on user 0 and 0 on user 1
    SummaryMask mask;
    mask.mask = Eigen::VectorX<uint8_t>::Zero(rec.n_frames);
    mask.mask.head(10).setConstant(1);
    Eigen::MatrixX<uint8_t> users(2, rec.n_frames);
    users.setZero();
    users.row(0).head(10).setConstant(1);  // identical to the mask
    users.row(1).tail(5).setConstant(1);   // disjoint
    rec.user_summaries = users;
    CHECK(evaluate_video(mask, rec, Protocol::MaxUser) == doctest::Approx(1.0));
    CHECK(evaluate_video(mask, rec, Protocol::MeanUser) == doctest::Approx(0.5));
}

TEST_CASE("single-reference protocol uses the gt-derived mask") {
    std::mt19937_64 rng(5);
    VideoRecord rec = toy_record(8, 5, 2, rng);
    SummaryMask ref = reference_mask(rec, 0.15);
    CHECK(evaluate_video(ref, rec, Protocol::SingleReference) == doctest::Approx(1.0));

    VideoRecord no_gt = rec;
    no_gt.gt_score.reset();
    CHECK_THROWS_AS(evaluate_video(ref, no_gt, Protocol::SingleReference),
                    std::invalid_argument);

    VideoRecord no_users = rec;
    no_users.user_summaries.reset();
    CHECK_THROWS_AS(evaluate_video(ref, no_users, Protocol::MaxUser),
                    std::invalid_argument);
}

TEST_CASE("multi-run aggregation") {
    EvalReport a, b;
    a.aggregate_f1 = 0.5;
    b.aggregate_f1 = 0.7;
    MultiRunReport agg = aggregate_runs({a, b});
    CHECK(agg.grand_mean == doctest::Approx(0.6));
    CHECK_THROWS_AS(aggregate_runs({}), std::invalid_argument);
}
