#include "semsum/evaluator.hpp"

#include <algorithm>
#include <stdexcept>

namespace semsum {

double f1_frame(const Eigen::VectorX<uint8_t>& a, const Eigen::VectorX<uint8_t>& g) {
    if (a.size() != g.size())
        throw std::invalid_argument("f1_frame: length mismatch");
    long sa = 0, sg = 0, overlap = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        sa += a(i) ? 1 : 0;
        sg += g(i) ? 1 : 0;
        overlap += (a(i) && g(i)) ? 1 : 0;
    }
    if (sa == 0 || sg == 0 || overlap == 0) return 0.0;
    double p = static_cast<double>(overlap) / sa;
    double r = static_cast<double>(overlap) / sg;
    return 2.0 * p * r / (p + r);
}

SummaryMask reference_mask(const VideoRecord& record, double budget_ratio) {
    if (!record.gt_score)
        throw std::invalid_argument("reference_mask: video '" + record.video_id +
                                    "' has no gt_score");
    ScoreSequence gt;
    gt.scores = *record.gt_score;
    gt.mode = ScoreMode::Fused;
    return build_summary(record, gt, budget_ratio);
}

double evaluate_video(const SummaryMask& mask, const VideoRecord& record,
                      Protocol protocol, double budget_ratio) {
    if (protocol == Protocol::SingleReference) {
        SummaryMask ref = reference_mask(record, budget_ratio);
        return f1_frame(mask.mask, ref.mask);
    }
    if (!record.user_summaries)
        throw std::invalid_argument("evaluate_video: video '" + record.video_id +
                                    "' has no user summaries");
    const auto& users = *record.user_summaries;
    double best = 0.0, sum = 0.0;
    for (Eigen::Index u = 0; u < users.rows(); ++u) {
        Eigen::VectorX<uint8_t> g = users.row(u).transpose();
        double f1 = f1_frame(mask.mask, g);
        best = std::max(best, f1);
        sum += f1;
    }
    return protocol == Protocol::MaxUser ? best
                                         : sum / static_cast<double>(users.rows());
}

MultiRunReport aggregate_runs(std::vector<EvalReport> runs) {
    if (runs.empty()) throw std::invalid_argument("aggregate_runs: no runs");
    MultiRunReport out;
    double total = 0.0;
    for (auto& r : runs) total += r.aggregate_f1;
    out.grand_mean = total / static_cast<double>(runs.size());
    out.runs = std::move(runs);
    return out;
}

}  // namespace semsum
