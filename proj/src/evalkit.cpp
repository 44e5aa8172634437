#include "fiberdet/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>

#include "fiberdet/errors.hpp"
#include "fiberdet/raster.hpp"

namespace fiberdet {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

bool boxes_overlap(const HBox& a, const HBox& b) {
    return std::abs(a.cx - b.cx) < (a.w + b.w) / 2 && std::abs(a.cy - b.cy) < (a.h + b.h) / 2;
}

// Greedy score-ordered assignment shared by the ellipse and box pipelines;
// quality(d, g) returns the IoU of detection d against ground truth g.
MatchResult greedy_match(const std::vector<ScoredEllipse>& dets, std::size_t gt_count,
                         double thresh,
                         const std::function<double(std::size_t, std::size_t)>& quality) {
    if (!(thresh > 0 && thresh < 1)) throw ConfigError("match IoU threshold must lie in (0, 1)");

    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });

    MatchResult m;
    std::vector<std::uint8_t> gt_taken(gt_count, 0);
    for (std::size_t d : order) {
        double best_iou = 0;
        std::size_t best_gt = gt_count;
        for (std::size_t g = 0; g < gt_count; ++g) {
            if (gt_taken[g]) continue;
            const double iou = quality(d, g);
            if (iou > best_iou) {
                best_iou = iou;
                best_gt = g;
            }
        }
        if (best_gt < gt_count && best_iou > thresh) {
            gt_taken[best_gt] = 1;
            m.pairs.push_back({static_cast<int>(d), static_cast<int>(best_gt), best_iou});
        } else {
            m.unmatched_dets.push_back(static_cast<int>(d));
        }
    }
    for (std::size_t g = 0; g < gt_count; ++g)
        if (!gt_taken[g]) m.unmatched_gts.push_back(static_cast<int>(g));
    std::sort(m.unmatched_dets.begin(), m.unmatched_dets.end());
    return m;
}

EvalReport from_counts(long tp, long fp, long fn, std::optional<double> angle_abs_sum,
                       std::optional<double> angle_sq_sum) {
    EvalReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0;
    r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0;
    r.f_measure = r.precision + r.recall > 0
                      ? 2 * r.precision * r.recall / (r.precision + r.recall)
                      : 0;
    if (angle_abs_sum && tp > 0) {
        r.ml1_rad = *angle_abs_sum / static_cast<double>(tp);
        r.mse_rad = *angle_sq_sum / static_cast<double>(tp);
        r.ml1_deg = *r.ml1_rad * kDegPerRad;
    }
    return r;
}

} // namespace

MatchResult match_ellipses(const std::vector<ScoredEllipse>& dets, const std::vector<Ellipse>& gts,
                           int width, int height, double thresh) {
    std::vector<HBox> det_boxes, gt_boxes;
    det_boxes.reserve(dets.size());
    gt_boxes.reserve(gts.size());
    for (const auto& d : dets) det_boxes.push_back(hbe_of(d.ellipse));
    for (const auto& g : gts) gt_boxes.push_back(hbe_of(g));
    return greedy_match(dets, gts.size(), thresh, [&](std::size_t d, std::size_t g) {
        if (!boxes_overlap(det_boxes[d], gt_boxes[g])) return 0.0;
        return pixel_iou(dets[d].ellipse, gts[g], width, height);
    });
}

EvalReport ellipse_metrics(const MatchResult& m, const std::vector<ScoredEllipse>& dets,
                           const std::vector<Ellipse>& gts) {
    const long tp = static_cast<long>(m.pairs.size());
    const long fp = static_cast<long>(m.unmatched_dets.size());
    const long fn = static_cast<long>(m.unmatched_gts.size());
    if (tp == 0) return from_counts(tp, fp, fn, std::nullopt, std::nullopt);
    double abs_sum = 0, sq_sum = 0;
    for (const MatchPair& p : m.pairs) {
        const double d = angle_distance(dets[static_cast<std::size_t>(p.det)].ellipse.theta,
                                        gts[static_cast<std::size_t>(p.gt)].theta);
        abs_sum += d;
        sq_sum += d * d;
    }
    return from_counts(tp, fp, fn, abs_sum, sq_sum);
}

EvalReport box_metrics(const std::vector<ScoredEllipse>& dets, const std::vector<Ellipse>& gts,
                       double thresh) {
    std::vector<HBox> det_boxes, gt_boxes;
    det_boxes.reserve(dets.size());
    gt_boxes.reserve(gts.size());
    for (const auto& d : dets) det_boxes.push_back(hbe_of(d.ellipse));
    for (const auto& g : gts) gt_boxes.push_back(hbe_of(g));
    const MatchResult m =
        greedy_match(dets, gts.size(), thresh, [&](std::size_t d, std::size_t g) {
            return box_iou(det_boxes[d], gt_boxes[g]);
        });
    return from_counts(static_cast<long>(m.pairs.size()),
                       static_cast<long>(m.unmatched_dets.size()),
                       static_cast<long>(m.unmatched_gts.size()), std::nullopt, std::nullopt);
}

EvalReport aggregate(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw ConfigError("cannot aggregate zero reports");
    long tp = 0, fp = 0, fn = 0;
    long angle_tp = 0;
    double abs_sum = 0, sq_sum = 0;
    for (const EvalReport& r : reports) {
        tp += r.tp;
        fp += r.fp;
        fn += r.fn;
        if (r.ml1_rad) {
            angle_tp += r.tp;
            abs_sum += *r.ml1_rad * static_cast<double>(r.tp);
            sq_sum += *r.mse_rad * static_cast<double>(r.tp);
        }
    }
    if (angle_tp == 0) return from_counts(tp, fp, fn, std::nullopt, std::nullopt);
    EvalReport r = from_counts(tp, fp, fn, std::nullopt, std::nullopt);
    r.ml1_rad = abs_sum / static_cast<double>(angle_tp);
    r.mse_rad = sq_sum / static_cast<double>(angle_tp);
    r.ml1_deg = *r.ml1_rad * kDegPerRad;
    return r;
}

std::string report_table(const EvalReport& r) {
    char row[128];
    if (r.ml1_deg)
        std::snprintf(row, sizeof(row), "%-8.2f%-8.2f%-8.2f%-8.4f", r.f_measure * 100,
                      r.precision * 100, r.recall * 100, *r.ml1_deg);
    else
        std::snprintf(row, sizeof(row), "%-8.2f%-8.2f%-8.2f%-8s", r.f_measure * 100,
                      r.precision * 100, r.recall * 100, "-");
    return std::string("F(%)    P(%)    R(%)    ML1_deg\n") + row + "\n";
}

nlohmann::ordered_json report_json(const EvalReport& r) {
    nlohmann::ordered_json j{{"f_measure", r.f_measure}, {"precision", r.precision},
                             {"recall", r.recall},       {"tp", r.tp},
                             {"fp", r.fp},               {"fn", r.fn}};
    if (r.ml1_rad) {
        j["ml1_rad"] = *r.ml1_rad;
        j["mse_rad"] = *r.mse_rad;
        j["ml1_deg"] = *r.ml1_deg;
    }
    return j;
}

} // namespace fiberdet
