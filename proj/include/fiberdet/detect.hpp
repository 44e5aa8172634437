#pragma once

#include <vector>

#include "fiberdet/ellipse.hpp"
#include "fiberdet/raster.hpp"
#include "fiberdet/rng.hpp"
#include "fiberdet/synthgen.hpp"

namespace fiberdet {

// One detection hypothesis: an axis-aligned box for suppression plus the
// five-parameter ellipse it carries. score is the classification-score
// surrogate used for ranking.
struct Proposal {
    HBox box;
    Ellipse ellipse;
    double score;
    bool touches_border = false;

    Proposal(const HBox& box, const Ellipse& ellipse, double score, bool touches_border = false);
};

struct MomentsConfig {
    bool use_otsu = true;
    int fixed_threshold = 128; // used when use_otsu is false
    bool dark_foreground = false;
    int min_area = 20; // components below this pixel count are dropped
};

// Classical detector: global threshold, 8-connected components, then a
// moment-based ellipse fit per component. Components whose minor-axis
// eigenvalue is degenerate (collinear pixels) are dropped; components
// touching the image border are kept but flagged.
std::vector<Proposal> detect_moments(const GrayImage& img, const MomentsConfig& cfg);

struct OracleConfig {
    int proposals_per_object = 1;
    double sigma_center = 0; // px, center jitter
    double sigma_scale = 0;  // log-space axis scale jitter
    double sigma_theta = 0;  // rad, orientation jitter
    int false_positives = 0;
    int width = 646; // image bounds for false-positive placement
    int height = 484;
};

// Detector stand-in that perturbs ground truth: per GT ellipse emits
// proposals_per_object jittered copies scored U(0.5, 1), then adds
// false_positives relocated GT shapes scored U(0.1, 0.6).
std::vector<Proposal> propose_oracle(const SceneGroundTruth& gt, const OracleConfig& cfg, Rng& rng);

} // namespace fiberdet
