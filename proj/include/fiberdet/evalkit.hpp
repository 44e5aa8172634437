#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fiberdet/ellipse.hpp"

namespace fiberdet {

struct MatchPair {
    int det = 0;
    int gt = 0;
    double iou = 0;
};

// One-to-one detection/ground-truth assignment. Indices never repeat and
// every pair's IoU exceeds the match threshold.
struct MatchResult {
    std::vector<MatchPair> pairs;
    std::vector<int> unmatched_dets;
    std::vector<int> unmatched_gts;
};

struct EvalReport {
    double precision = 0;
    double recall = 0;
    double f_measure = 0;
    // Orientation errors over matched pairs; absent when there are none.
    std::optional<double> ml1_rad;
    std::optional<double> mse_rad;
    std::optional<double> ml1_deg;
    long tp = 0, fp = 0, fn = 0;
};

// Greedy one-to-one matching by descending detection score (ties: input
// order): each detection takes the unmatched ground truth with the highest
// pixel IoU (ties: lower index), accepted iff IoU > thresh. Candidates are
// prefiltered to ground truths whose bounding box overlaps the detection's.
MatchResult match_ellipses(const std::vector<ScoredEllipse>& dets,
                           const std::vector<Ellipse>& gts, int width, int height,
                           double thresh = 0.5);

// Precision/recall/F from the match counts plus orientation errors averaged
// over matched pairs (wraparound angle distance).
EvalReport ellipse_metrics(const MatchResult& m, const std::vector<ScoredEllipse>& dets,
                           const std::vector<Ellipse>& gts);

// Same pipeline on tightest axis-aligned boxes with rectangle IoU.
// Orientation fields stay absent.
EvalReport box_metrics(const std::vector<ScoredEllipse>& dets, const std::vector<Ellipse>& gts,
                       double thresh = 0.5);

// Micro-average: pools TP/FP/FN counts and angle-error sums across images,
// then recomputes every metric. Throws ConfigError on empty input.
EvalReport aggregate(const std::vector<EvalReport>& reports);

// Two-line aligned table: F(%) P(%) R(%) ML1_deg. "-" for absent fields.
std::string report_table(const EvalReport& r);

// Metric fields as JSON; orientation fields are omitted when absent.
nlohmann::ordered_json report_json(const EvalReport& r);

} // namespace fiberdet
