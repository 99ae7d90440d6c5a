#include "semsum/summarizer.hpp"

#include <cmath>
#include <stdexcept>

namespace semsum {

Eigen::VectorXd expand_scores(const Eigen::VectorXd& scores,
                              const std::vector<long>& picks, long n_frames) {
    if (scores.size() != static_cast<Eigen::Index>(picks.size()))
        throw std::invalid_argument("expand_scores: scores/picks length mismatch");
    for (long p : picks)
        if (p < 0 || p >= n_frames)
            throw std::invalid_argument("expand_scores: pick out of range");
    Eigen::VectorXd out(n_frames);
    for (size_t i = 0; i < picks.size(); ++i) {
        long lo = picks[i];
        long hi = (i + 1 < picks.size()) ? picks[i + 1] - 1 : n_frames - 1;
        for (long f = lo; f <= hi; ++f) out(f) = scores(i);
    }
    // frames before the first pick inherit its score
    for (long f = 0; f < picks.front(); ++f) out(f) = scores(0);
    return out;
}

ShotTable shot_scores(const Eigen::VectorXd& frame_scores,
                      const std::vector<std::pair<long, long>>& change_points) {
    long expect = 0;
    for (const auto& [s, e] : change_points)
        if (s != expect || e < s)
            throw std::invalid_argument("shot_scores: change_points not a partition");
        else
            expect = e + 1;
    if (expect != frame_scores.size())
        throw std::invalid_argument("shot_scores: change_points do not cover frames");
    ShotTable shots;
    for (const auto& [s, e] : change_points) {
        Shot shot;
        shot.start = s;
        shot.end = e;
        shot.length = e - s + 1;
        shot.score = frame_scores.segment(s, shot.length).mean();
        shots.push_back(shot);
    }
    return shots;
}

std::vector<int> knapsack_select(const ShotTable& shots, long budget_frames,
                                 KnapsackValue value) {
    if (budget_frames < 0)
        throw std::invalid_argument("knapsack_select: negative budget");
    const int n = static_cast<int>(shots.size());
    const long W = budget_frames;
    auto val = [&](int i) {
        return value == KnapsackValue::MeanScore
                   ? shots[i].score
                   : shots[i].score * static_cast<double>(shots[i].length);
    };
    // best[i][w]: optimum over shots i..n-1 with capacity w. Filling from the
    // back lets the reconstruction below prefer taking earlier shots on ties,
    // which yields the lexicographically smallest optimal index set.
    std::vector<std::vector<double>> best(n + 1, std::vector<double>(W + 1, 0.0));
    for (int i = n - 1; i >= 0; --i)
        for (long w = 0; w <= W; ++w) {
            best[i][w] = best[i + 1][w];
            if (shots[i].length <= w) {
                double take = val(i) + best[i + 1][w - shots[i].length];
                if (take > best[i][w]) best[i][w] = take;
            }
        }
    std::vector<int> picked;
    long w = W;
    for (int i = 0; i < n; ++i)
        if (shots[i].length <= w &&
            val(i) + best[i + 1][w - shots[i].length] >= best[i + 1][w]) {
            picked.push_back(i);
            w -= shots[i].length;
        }
    return picked;
}

SummaryMask build_summary(const VideoRecord& record, const ScoreSequence& scores,
                          double budget_ratio, KnapsackValue value) {
    Eigen::VectorXd frame_scores =
        expand_scores(scores.scores, record.picks, record.n_frames);
    ShotTable shots = shot_scores(frame_scores, record.change_points);
    long budget = static_cast<long>(std::floor(budget_ratio * record.n_frames));
    SummaryMask out;
    out.budget_ratio = budget_ratio;
    out.selected_shots = knapsack_select(shots, budget, value);
    out.mask = Eigen::VectorX<uint8_t>::Zero(record.n_frames);
    for (int idx : out.selected_shots)
        for (long f = shots[idx].start; f <= shots[idx].end; ++f) out.mask(f) = 1;
    return out;
}

}  // namespace semsum
