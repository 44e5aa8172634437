#include "fiberdet/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fiberdet {

namespace {

// Membership test against the rotated-ellipse inequality, evaluated at pixel
// centers.
struct InsideEllipse {
    double cx, cy, c, s, inv_a, inv_b;

    explicit InsideEllipse(const Ellipse& e)
        : cx(e.cx), cy(e.cy), c(std::cos(e.theta)), s(std::sin(e.theta)),
          inv_a(1.0 / e.semi_major), inv_b(1.0 / e.semi_minor) {}

    bool contains_point(double px, double py) const {
        const double dx = px - cx;
        const double dy = py - cy;
        const double u = (dx * c + dy * s) * inv_a;
        const double v = (-dx * s + dy * c) * inv_b;
        return u * u + v * v <= 1.0;
    }

    // Pixel (x, y) is treated as its center point.
    bool operator()(int x, int y) const { return contains_point(x + 0.5, y + 0.5); }
};

struct PixelRect {
    int x0, y0, x1, y1; // half-open
    bool empty() const { return x0 >= x1 || y0 >= y1; }
};

// Pixel indices whose centers could fall inside the box, with 1 px of slack,
// clipped to the image.
PixelRect candidate_rect(const HBox& box, int width, int height) {
    PixelRect r;
    r.x0 = std::max(0, static_cast<int>(std::floor(box.cx - box.w / 2 - 1)));
    r.y0 = std::max(0, static_cast<int>(std::floor(box.cy - box.h / 2 - 1)));
    r.x1 = std::min(width, static_cast<int>(std::ceil(box.cx + box.w / 2 + 1)));
    r.y1 = std::min(height, static_cast<int>(std::ceil(box.cy + box.h / 2 + 1)));
    return r;
}

PixelRect rect_union(const PixelRect& a, const PixelRect& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

void check_dims(int width, int height) {
    if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be positive");
}

} // namespace

GrayImage::GrayImage(int width, int height, std::uint8_t fill) : width(width), height(height) {
    check_dims(width, height);
    data.assign(static_cast<std::size_t>(width) * height, fill);
}

PixelMask::PixelMask(int width, int height) : width(width), height(height) {
    check_dims(width, height);
    bits.assign((static_cast<std::size_t>(width) * height + 63) / 64, 0);
}

bool ellipse_contains(const Ellipse& e, double px, double py) {
    return InsideEllipse(e).contains_point(px, py);
}

PixelMask rasterize(const Ellipse& e, int width, int height) {
    check_dims(width, height);
    PixelMask mask(width, height);
    const PixelRect r = candidate_rect(hbe_of(e), width, height);
    if (r.empty()) return mask;
    const InsideEllipse inside(e);
    for (int y = r.y0; y < r.y1; ++y)
        for (int x = r.x0; x < r.x1; ++x)
            if (inside(x, y)) mask.set(x, y);
    return mask;
}

double pixel_iou(const Ellipse& a, const Ellipse& b, int width, int height) {
    check_dims(width, height);
    const PixelRect r =
        rect_union(candidate_rect(hbe_of(a), width, height), candidate_rect(hbe_of(b), width, height));
    if (r.empty()) return 0.0;
    const InsideEllipse in_a(a);
    const InsideEllipse in_b(b);
    std::size_t na = 0, nb = 0, ninter = 0;
    for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
            const bool ia = in_a(x, y);
            const bool ib = in_b(x, y);
            na += ia;
            nb += ib;
            ninter += ia && ib;
        }
    }
    const std::size_t nunion = na + nb - ninter;
    return nunion == 0 ? 0.0 : static_cast<double>(ninter) / static_cast<double>(nunion);
}

double box_iou(const HBox& a, const HBox& b) {
    const double ix = std::max(0.0, std::min(a.cx + a.w / 2, b.cx + b.w / 2) -
                                        std::max(a.cx - a.w / 2, b.cx - b.w / 2));
    const double iy = std::max(0.0, std::min(a.cy + a.h / 2, b.cy + b.h / 2) -
                                        std::max(a.cy - a.h / 2, b.cy - b.h / 2));
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return inter <= 0 ? 0.0 : inter / uni;
}

double ssim(const GrayImage& a, const GrayImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("ssim: patch dimensions differ");
    if (a.width < 4 || a.height < 4) throw std::invalid_argument("ssim: patch smaller than 4x4");

    const std::size_t n = a.data.size();
    double sum_a = 0, sum_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_a += a.data[i];
        sum_b += b.data[i];
    }
    const double mu_a = sum_a / static_cast<double>(n);
    const double mu_b = sum_b / static_cast<double>(n);

    double var_a = 0, var_b = 0, cov = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a.data[i] - mu_a;
        const double db = b.data[i] - mu_b;
        var_a += da * da;
        var_b += db * db;
        cov += da * db;
    }
    var_a /= static_cast<double>(n);
    var_b /= static_cast<double>(n);
    cov /= static_cast<double>(n);

    constexpr double c1 = (0.01 * 255) * (0.01 * 255);
    constexpr double c2 = (0.03 * 255) * (0.03 * 255);
    return ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
           ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
}

GrayImage rotate180(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(img.width - 1 - x, img.height - 1 - y) = img.at(x, y);
    return out;
}

GrayImage crop(const GrayImage& img, int x0, int y0, int x1, int y1) {
    if (x0 < 0 || y0 < 0 || x1 > img.width || y1 > img.height || x0 >= x1 || y0 >= y1)
        throw std::invalid_argument("crop: window out of bounds");
    GrayImage out(x1 - x0, y1 - y0);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            out.at(x - x0, y - y0) = img.at(x, y);
    return out;
}

void draw_ellipse_outline(GrayImage& img, const Ellipse& e, std::uint8_t value) {
    const double c = std::cos(e.theta);
    const double s = std::sin(e.theta);
    // Step small enough that consecutive samples are < ~0.5 px apart.
    const int n = std::max(32, static_cast<int>(std::ceil(4 * std::numbers::pi * e.semi_major)));
    for (int k = 0; k < n; ++k) {
        const double t = (k + 0.5) * (2 * std::numbers::pi / n);
        const double px = e.semi_major * std::cos(t);
        const double py = e.semi_minor * std::sin(t);
        const double x = e.cx + px * c - py * s;
        const double y = e.cy + px * s + py * c;
        const int xi = static_cast<int>(std::floor(x));
        const int yi = static_cast<int>(std::floor(y));
        if (xi >= 0 && xi < img.width && yi >= 0 && yi < img.height) img.at(xi, yi) = value;
    }
}

} // namespace fiberdet
