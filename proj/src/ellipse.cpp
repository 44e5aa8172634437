#include "fiberdet/ellipse.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace fiberdet {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}
} // namespace

double canonicalize_angle(double theta) {
    require_finite(theta, "canonicalize_angle");
    double t = std::fmod(theta, kPi);
    if (t < 0) t += kPi;
    if (t >= kPi) t = 0; // rounding of t + pi can land exactly on pi
    return t;
}

double angle_distance(double a, double b) {
    const double d = std::fabs(canonicalize_angle(a) - canonicalize_angle(b));
    return std::min(d, kPi - d);
}

HBox::HBox(double cx, double cy, double w, double h) : cx(cx), cy(cy), w(w), h(h) {
    require_finite(cx, "HBox");
    require_finite(cy, "HBox");
    if (!std::isfinite(w) || !std::isfinite(h) || w <= 0 || h <= 0)
        throw std::invalid_argument("HBox: sides must be positive");
}

RRoI::RRoI(double cx, double cy, double w, double h) : cx(cx), cy(cy), w(w), h(h) {
    require_finite(cx, "RRoI");
    require_finite(cy, "RRoI");
    if (!std::isfinite(w) || !std::isfinite(h) || w <= 0 || h <= 0)
        throw std::invalid_argument("RRoI: sides must be positive");
}

Ellipse::Ellipse(double cx, double cy, double theta, double a, double b) : cx(cx), cy(cy) {
    require_finite(cx, "Ellipse");
    require_finite(cy, "Ellipse");
    if (!std::isfinite(a) || !std::isfinite(b) || a <= 0 || b <= 0)
        throw std::invalid_argument("Ellipse: semi-axes must be positive");
    if (a < b) {
        std::swap(a, b);
        theta += kHalfPi;
    }
    this->theta = canonicalize_angle(theta);
    if (a - b <= 1e-9 * a) this->theta = 0; // circle: orientation undefined
    semi_major = a;
    semi_minor = b;
}

HBox hbe_of(const Ellipse& e) {
    const double c = std::cos(e.theta);
    const double s = std::sin(e.theta);
    const double a2 = e.semi_major * e.semi_major;
    const double b2 = e.semi_minor * e.semi_minor;
    const double w = 2 * std::sqrt(a2 * c * c + b2 * s * s);
    const double h = 2 * std::sqrt(a2 * s * s + b2 * c * c);
    return HBox(e.cx, e.cy, w, h);
}

OrientedBox obe_of(const Ellipse& e) {
    return {e.cx, e.cy, 2 * e.semi_major, 2 * e.semi_minor, e.theta};
}

RRoI rotate_roi(const HBox& roi) {
    return RRoI(roi.cx, roi.cy, roi.w, roi.h);
}

EllipseOffsets encode_ellipse_offsets(const RRoI& rroi, const Ellipse& target) {
    return {
        (target.cy - rroi.cy) / rroi.w,
        -(target.cx - rroi.cx) / rroi.h,
        std::log(2 * target.semi_major / rroi.w),
        std::log(2 * target.semi_minor / rroi.h),
        (target.theta - kHalfPi) / kHalfPi,
    };
}

Ellipse decode_ellipse_offsets(const RRoI& rroi, const EllipseOffsets& off) {
    require_finite(off.t_x, "decode_ellipse_offsets");
    require_finite(off.t_y, "decode_ellipse_offsets");
    require_finite(off.t_w, "decode_ellipse_offsets");
    require_finite(off.t_h, "decode_ellipse_offsets");
    require_finite(off.t_theta, "decode_ellipse_offsets");
    const double cx = rroi.cx - off.t_y * rroi.h;
    const double cy = rroi.cy + off.t_x * rroi.w;
    const double a = 0.5 * rroi.w * std::exp(off.t_w);
    const double b = 0.5 * rroi.h * std::exp(off.t_h);
    const double theta = kHalfPi + off.t_theta * kHalfPi;
    return Ellipse(cx, cy, theta, a, b); // ctor swaps axes / rotates if a < b
}

BoxOffsets encode_box_offsets(const HBox& anchor, const HBox& target) {
    return {
        (target.cx - anchor.cx) / anchor.w,
        (target.cy - anchor.cy) / anchor.h,
        std::log(target.w / anchor.w),
        std::log(target.h / anchor.h),
    };
}

HBox decode_box_offsets(const HBox& anchor, const BoxOffsets& off) {
    require_finite(off.t_x, "decode_box_offsets");
    require_finite(off.t_y, "decode_box_offsets");
    require_finite(off.t_w, "decode_box_offsets");
    require_finite(off.t_h, "decode_box_offsets");
    return HBox(anchor.cx + off.t_x * anchor.w, anchor.cy + off.t_y * anchor.h,
                anchor.w * std::exp(off.t_w), anchor.h * std::exp(off.t_h));
}

} // namespace fiberdet
