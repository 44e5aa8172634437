#pragma once

#include <numbers>

namespace fiberdet {

// Orientation reduced to [0, pi). Ellipses have period-pi symmetry.
double canonicalize_angle(double theta);

// Wraparound distance between two orientations, in [0, pi/2].
double angle_distance(double a, double b);

// Axis-aligned box in continuous pixel coordinates (origin at the top-left
// corner of the top-left pixel, pixel centers at half-integers).
struct HBox {
    double cx = 0, cy = 0, w = 0, h = 0;

    HBox() = default;
    HBox(double cx, double cy, double w, double h);
};

// Five-parameter ellipse: center, orientation of the major axis against the
// horizontal, semi-major and semi-minor axes. Construction canonicalizes:
// theta lands in [0, pi), axes are ordered semi_major >= semi_minor (swapping
// rotates theta by pi/2), and a circle gets theta = 0. Immutable by
// convention; all operations below are pure.
struct Ellipse {
    double cx, cy;
    double theta;
    double semi_major, semi_minor;

    Ellipse(double cx, double cy, double theta, double semi_major, double semi_minor);
};

struct ScoredEllipse {
    Ellipse ellipse;
    double score;
};

// An RoI rotated 90 degrees clockwise: same center and sides, orientation
// fixed at pi/2. Offsets are always encoded against this convention.
struct RRoI {
    double cx = 0, cy = 0, w = 0, h = 0;
    static constexpr double theta = std::numbers::pi / 2;

    RRoI(double cx, double cy, double w, double h);
};

// Box with sides parallel to an ellipse's axes. Its five parameters are the
// ellipse's five parameters with w = 2*semi_major, h = 2*semi_minor.
struct OrientedBox {
    double cx, cy, w, h, theta;
};

// Normalized regression deltas RRoI -> oriented box over ellipse.
struct EllipseOffsets {
    double t_x, t_y, t_w, t_h, t_theta;
};

// Standard horizontal-box regression deltas (anchor -> target box).
struct BoxOffsets {
    double t_x, t_y, t_w, t_h;
};

// Tightest axis-aligned box containing the ellipse:
// w = 2*sqrt(a^2 cos^2 t + b^2 sin^2 t), h = 2*sqrt(a^2 sin^2 t + b^2 cos^2 t).
HBox hbe_of(const Ellipse& e);

// Tightest axis-parallel oriented box: (cx, cy, 2a, 2b, theta).
OrientedBox obe_of(const Ellipse& e);

RRoI rotate_roi(const HBox& roi);

// t_x = (y* - y^r)/w^r, t_y = -(x* - x^r)/h^r, t_w = ln(2a/w^r),
// t_h = ln(2b/h^r), t_theta = (theta* - pi/2)/(pi/2). The center offset is
// projected into the RRoI's local frame, hence the coordinate swap.
EllipseOffsets encode_ellipse_offsets(const RRoI& rroi, const Ellipse& target);

// Inverse of the encoding. If the decoded axes come out unordered the roles
// swap and theta rotates by pi/2, so every decode yields a valid ellipse.
Ellipse decode_ellipse_offsets(const RRoI& rroi, const EllipseOffsets& off);

BoxOffsets encode_box_offsets(const HBox& anchor, const HBox& target);
HBox decode_box_offsets(const HBox& anchor, const BoxOffsets& off);

} // namespace fiberdet
