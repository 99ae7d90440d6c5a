#pragma once

#include <string>
#include <vector>

#include "semsum/dataset.hpp"
#include "semsum/summarizer.hpp"

namespace semsum {

struct EvalReport {
    Protocol protocol = Protocol::MaxUser;
    std::vector<std::string> video_ids;
    std::vector<double> per_video_f1;
    double aggregate_f1 = 0.0;  // mean over videos
};

struct MultiRunReport {
    std::vector<EvalReport> runs;
    double grand_mean = 0.0;  // mean of per-run aggregates
};

// Frame-level F1 between two binary vectors; 0 when either side or the
// overlap is empty.
double f1_frame(const Eigen::VectorX<uint8_t>& a, const Eigen::VectorX<uint8_t>& g);

double evaluate_video(const SummaryMask& mask, const VideoRecord& record,
                      Protocol protocol, double budget_ratio = 0.15);

MultiRunReport aggregate_runs(std::vector<EvalReport> runs);

// Reference mask for the single-reference protocol: gt_score pushed through
// the same expand -> shot -> knapsack pipeline as a model summary.
SummaryMask reference_mask(const VideoRecord& record, double budget_ratio = 0.15);

}  // namespace semsum
