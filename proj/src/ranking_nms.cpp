#include "fiberdet/ranking_nms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fiberdet/errors.hpp"

namespace fiberdet {

SymmetryScore symmetry_score(const GrayImage& img, const HBox& box) {
    const int x0 = std::max(0, static_cast<int>(std::floor(box.cx - box.w / 2)));
    const int y0 = std::max(0, static_cast<int>(std::floor(box.cy - box.h / 2)));
    const int x1 = std::min(img.width, static_cast<int>(std::ceil(box.cx + box.w / 2)));
    const int y1 = std::min(img.height, static_cast<int>(std::ceil(box.cy + box.h / 2)));
    if (x1 - x0 < 4 || y1 - y0 < 4) return {0, true};
    const GrayImage patch = crop(img, x0, y0, x1, y1);
    return {ssim(patch, rotate180(patch)), false};
}

double combined_score(double s_obj, double s_sym, double lambda) {
    return s_obj + lambda * s_sym;
}

std::vector<RankedProposal> rank_proposals(const GrayImage& img,
                                           const std::vector<Proposal>& proposals, double lambda) {
    std::vector<RankedProposal> out;
    out.reserve(proposals.size());
    for (const Proposal& p : proposals) {
        const double s_sym = symmetry_score(img, p.box).value;
        out.push_back({p, s_sym, combined_score(p.score, s_sym, lambda)});
    }
    return out;
}

std::vector<RankedProposal> nms_symmetry(const std::vector<RankedProposal>& proposals,
                                         double iou_thresh) {
    if (!(iou_thresh > 0 && iou_thresh < 1))
        throw ConfigError("NMS IoU threshold must lie in (0, 1)");

    std::vector<std::size_t> order(proposals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (proposals[a].s_combined != proposals[b].s_combined)
            return proposals[a].s_combined > proposals[b].s_combined;
        if (proposals[a].proposal.score != proposals[b].proposal.score)
            return proposals[a].proposal.score > proposals[b].proposal.score;
        return a < b;
    });

    std::vector<RankedProposal> kept;
    std::vector<std::uint8_t> suppressed(proposals.size(), 0);
    for (std::size_t i : order) {
        if (suppressed[i]) continue;
        kept.push_back(proposals[i]);
        for (std::size_t j : order) {
            if (suppressed[j] || j == i) continue;
            if (box_iou(proposals[i].proposal.box, proposals[j].proposal.box) > iou_thresh)
                suppressed[j] = 1;
        }
        suppressed[i] = 1;
    }
    return kept;
}

std::vector<ScoredEllipse> dedup_final(const std::vector<ScoredEllipse>& candidates,
                                       double dist_thresh) {
    if (!(dist_thresh > 0)) throw ConfigError("dedup distance must be positive");

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (candidates[a].score != candidates[b].score)
            return candidates[a].score > candidates[b].score;
        return a < b;
    });

    std::vector<ScoredEllipse> kept;
    for (std::size_t i : order) {
        const Ellipse& e = candidates[i].ellipse;
        bool ok = true;
        for (const ScoredEllipse& k : kept) {
            const double dx = e.cx - k.ellipse.cx;
            const double dy = e.cy - k.ellipse.cy;
            if (std::sqrt(dx * dx + dy * dy) < dist_thresh) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(candidates[i]);
    }
    return kept;
}

} // namespace fiberdet
