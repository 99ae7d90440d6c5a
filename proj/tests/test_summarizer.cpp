#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include <random>

#include "semsum/summarizer.hpp"

using namespace semsum;

namespace {

// Exhaustive 0/1 knapsack over all subsets; the independent oracle for the DP.
std::pair<double, std::vector<int>> brute_force(const ShotTable& shots, long budget,
                                                KnapsackValue value) {
    const int n = static_cast<int>(shots.size());
    double best_val = 0.0;
    std::vector<int> best_set;
    for (int mask = 0; mask < (1 << n); ++mask) {
        long len = 0;
        double val = 0.0;
        std::vector<int> set;
        for (int i = 0; i < n; ++i)
            if (mask & (1 << i)) {
                len += shots[i].length;
                val += value == KnapsackValue::MeanScore
                           ? shots[i].score
                           : shots[i].score * shots[i].length;
                set.push_back(i);
            }
        if (len > budget) continue;
        if (val > best_val || (val == best_val && set < best_set))
            best_val = val, best_set = set;
    }
    return {best_val, best_set};
}

ShotTable random_shots(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::uniform_int_distribution<long> len(1, 12);
    ShotTable shots;
    long at = 0;
    for (int i = 0; i < n; ++i) {
        Shot s;
        s.start = at;
        s.length = len(rng);
        s.end = at + s.length - 1;
        s.score = score(rng);
        at = s.end + 1;
        shots.push_back(s);
    }
    return shots;
}

double total_value(const ShotTable& shots, const std::vector<int>& picked,
                   KnapsackValue value) {
    double v = 0.0;
    for (int i : picked)
        v += value == KnapsackValue::MeanScore ? shots[i].score
                                               : shots[i].score * shots[i].length;
    return v;
}

}  // namespace

TEST_CASE("expand_scores piecewise-constant rule") {
    Eigen::VectorXd single(1);
    single << 0.7;
    Eigen::VectorXd out = expand_scores(single, {0}, 4);
    CHECK(out.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(out(i) == doctest::Approx(0.7));

    Eigen::VectorXd two(2);
    two << 0.2, 0.9;
    Eigen::VectorXd out2 = expand_scores(two, {0, 2}, 4);
    CHECK(out2(0) == doctest::Approx(0.2));
    CHECK(out2(1) == doctest::Approx(0.2));
    CHECK(out2(2) == doctest::Approx(0.9));
    CHECK(out2(3) == doctest::Approx(0.9));

    CHECK_THROWS_AS(expand_scores(two, {0, 9}, 4), std::invalid_argument);
    CHECK_THROWS_AS(expand_scores(two, {0}, 4), std::invalid_argument);
}

TEST_CASE("shot_scores aggregation") {
    Eigen::VectorXd scores(4);
    scores << 0, 1, 1, 0;
    ShotTable shots = shot_scores(scores, {{0, 1}, {2, 3}});
    REQUIRE(shots.size() == 2);
    CHECK(shots[0].score == doctest::Approx(0.5));
    CHECK(shots[1].score == doctest::Approx(0.5));

    ShotTable one = shot_scores(scores, {{0, 3}});
    CHECK(one[0].score == doctest::Approx(0.5));

    Eigen::VectorXd flat = Eigen::VectorXd::Constant(6, 0.3);
    for (const auto& s : shot_scores(flat, {{0, 2}, {3, 5}}))
        CHECK(s.score == doctest::Approx(0.3));

    CHECK_THROWS_AS(shot_scores(scores, {{0, 1}, {3, 3}}), std::invalid_argument);
}

TEST_CASE("knapsack basics") {
    CHECK(knapsack_select({}, 0).empty());
    ShotTable shots;
    double sc[3] = {0.9, 0.8, 0.1};
    long at = 0;
    for (int i = 0; i < 3; ++i) {
        Shot s;
        s.start = at;
        s.end = at + 4;
        s.length = 5;
        s.score = sc[i];
        at += 5;
        shots.push_back(s);
    }
    CHECK(knapsack_select(shots, 0).empty());
    auto picked = knapsack_select(shots, 10);
    CHECK(picked == std::vector<int>{0, 1});
}

TEST_CASE("knapsack matches exhaustive search on fuzzed instances") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng() % 12);
        ShotTable shots = random_shots(rng, n);
        std::uniform_int_distribution<long> bud(0, shots.back().end + 2);
        long budget = bud(rng);
        for (KnapsackValue v : {KnapsackValue::MeanScore, KnapsackValue::ScoreTimesLength}) {
            auto picked = knapsack_select(shots, budget, v);
            auto [best_val, best_set] = brute_force(shots, budget, v);
            CHECK(total_value(shots, picked, v) == best_val);
            CHECK(picked == best_set);  // lexicographic tie-break
            long used = 0;
            for (int i : picked) used += shots[i].length;
            CHECK(used <= budget);
        }
    }
}

TEST_CASE("knapsack tie-break prefers the smallest index set") {
    ShotTable shots;
    for (int i = 0; i < 3; ++i) {
        Shot s;
        s.start = i * 2;
        s.end = i * 2 + 1;
        s.length = 2;
        s.score = 0.5;  // all identical: any single shot is optimal at budget 2
        shots.push_back(s);
    }
    CHECK(knapsack_select(shots, 2) == std::vector<int>{0});
}

TEST_CASE("build_summary budget and atomicity") {
    VideoRecord rec;
    rec.video_id = "v";
    rec.n_frames = 60;
    const int T = 12;
    rec.visual = Mat::Zero(T, 3);
    rec.semantic = Mat::Zero(T, 2);
    for (int t = 0; t < T; ++t) rec.picks.push_back(t * 5);
    for (int s = 0; s < 12; ++s) rec.change_points.emplace_back(s * 5, s * 5 + 4);

    ScoreSequence scores;
    scores.scores = Eigen::VectorXd::LinSpaced(T, 0.05, 0.95);  // monotone
    SummaryMask mask = build_summary(rec, scores, 0.15);
    CHECK(mask.mask.cast<long>().sum() <= static_cast<long>(0.15 * 60));
    // mask is constant within each shot
    for (const auto& [s, e] : rec.change_points) {
        for (long f = s; f <= e; ++f) CHECK(mask.mask(f) == mask.mask(s));
    }
    // monotone scores with uniform shots select the top-scoring shot
    REQUIRE(!mask.selected_shots.empty());
    CHECK(mask.selected_shots.back() == 11);

    // a budget below every shot length selects nothing and crashes nowhere
    SummaryMask none = build_summary(rec, scores, 0.05);
    CHECK(none.selected_shots.empty());
    CHECK(none.mask.cast<long>().sum() == 0);

    SummaryMask all = build_summary(rec, scores, 1.0);
    CHECK(all.selected_shots.size() == 12);
    CHECK(all.mask.cast<long>().sum() == 60);
}

TEST_CASE("build_summary budget property under fuzzing") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        int n_shots = 2 + static_cast<int>(rng() % 8);
        int T = n_shots * 2;
        VideoRecord rec;
        rec.video_id = "f";
        rec.n_frames = T * 5;
        rec.visual = Mat::Zero(T, 2);
        rec.semantic = Mat::Zero(T, 2);
        for (int t = 0; t < T; ++t) rec.picks.push_back(t * 5);
        // split [0, n_frames) at n_shots-1 distinct interior cuts
        std::set<long> cuts;
        while (static_cast<int>(cuts.size()) < n_shots - 1)
            cuts.insert(1 + static_cast<long>(rng() % (rec.n_frames - 1)));
        long at = 0;
        for (long cut : cuts) {
            rec.change_points.emplace_back(at, cut - 1);
            at = cut;
        }
        rec.change_points.emplace_back(at, rec.n_frames - 1);
        ScoreSequence scores;
        scores.scores = Eigen::VectorXd::NullaryExpr(T, [&]() { return u(rng); });
        SummaryMask mask = build_summary(rec, scores, 0.15);
        CHECK(mask.mask.cast<long>().sum() <=
              static_cast<long>(std::floor(0.15 * rec.n_frames)));
    }
}
