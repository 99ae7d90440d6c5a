#pragma once

#include <vector>

#include "semsum/dataset.hpp"
#include "semsum/selector.hpp"

namespace semsum {

struct Shot {
    long start = 0;  // inclusive original-frame interval
    long end = 0;
    long length = 0;
    double score = 0.0;
};

using ShotTable = std::vector<Shot>;

enum class KnapsackValue { MeanScore, ScoreTimesLength };

struct SummaryMask {
    Eigen::VectorX<uint8_t> mask;  // length n_frames
    double budget_ratio = 0.15;
    std::vector<int> selected_shots;
};

// Piecewise-constant expansion of sampled-frame scores to the full frame rate.
Eigen::VectorXd expand_scores(const Eigen::VectorXd& scores,
                              const std::vector<long>& picks, long n_frames);

ShotTable shot_scores(const Eigen::VectorXd& frame_scores,
                      const std::vector<std::pair<long, long>>& change_points);

// Exact 0/1 knapsack: maximize total shot value under a frame budget. Ties are
// broken toward the lexicographically smallest index set among optima.
std::vector<int> knapsack_select(const ShotTable& shots, long budget_frames,
                                 KnapsackValue value = KnapsackValue::MeanScore);

SummaryMask build_summary(const VideoRecord& record, const ScoreSequence& scores,
                          double budget_ratio = 0.15,
                          KnapsackValue value = KnapsackValue::MeanScore);

}  // namespace semsum
