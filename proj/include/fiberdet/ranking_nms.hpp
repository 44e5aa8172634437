#pragma once

#include <vector>

#include "fiberdet/detect.hpp"
#include "fiberdet/ellipse.hpp"
#include "fiberdet/raster.hpp"

namespace fiberdet {

struct SymmetryScore {
    double value = 0;
    bool degenerate = false; // crop too small or outside the image
};

// Crop the box (floor/ceil integer bounds, clipped to the image), rotate the
// crop 180 degrees and return the structural similarity between the two.
// Crops smaller than 4x4 score 0 and are marked degenerate.
SymmetryScore symmetry_score(const GrayImage& img, const HBox& box);

// S = S_obj + lambda * S_sym.
double combined_score(double s_obj, double s_sym, double lambda);

struct RankedProposal {
    Proposal proposal;
    double s_sym = 0;
    double s_combined = 0;
};

// Attach symmetry and combined scores to every proposal.
std::vector<RankedProposal> rank_proposals(const GrayImage& img,
                                           const std::vector<Proposal>& proposals, double lambda);

// Greedy suppression: repeatedly keep the highest combined score (ties:
// higher raw score, then lower input index) and drop everything whose box
// IoU with it exceeds iou_thresh. Survivors come back in selection order.
std::vector<RankedProposal> nms_symmetry(const std::vector<RankedProposal>& proposals,
                                         double iou_thresh);

// Final duplicate removal: greedy by descending score, keep a candidate iff
// its center is at least dist_thresh away from every kept one.
std::vector<ScoredEllipse> dedup_final(const std::vector<ScoredEllipse>& candidates,
                                       double dist_thresh);

} // namespace fiberdet
