#pragma once

#include <cstdint>
#include <vector>

#include "fiberdet/ellipse.hpp"

namespace fiberdet {

// 8-bit grayscale raster, row-major. Immutable after construction by
// convention (rendering builds an image before handing it out).
struct GrayImage {
    int width = 0, height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int width, int height, std::uint8_t fill = 0);

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

// Set of member pixels on an image grid.
struct PixelMask {
    int width = 0, height = 0;
    std::vector<std::uint64_t> bits;
    std::size_t count = 0;

    PixelMask(int width, int height);

    bool test(int x, int y) const {
        const std::size_t i = static_cast<std::size_t>(y) * width + x;
        return (bits[i >> 6] >> (i & 63)) & 1;
    }
    void set(int x, int y) {
        const std::size_t i = static_cast<std::size_t>(y) * width + x;
        std::uint64_t& word = bits[i >> 6];
        const std::uint64_t bit = 1ULL << (i & 63);
        if (!(word & bit)) {
            word |= bit;
            ++count;
        }
    }
};

// True iff the point (px, py) satisfies the rotated-ellipse inequality
// (boundary included). Pixel membership tests use the pixel center
// (x + 0.5, y + 0.5).
bool ellipse_contains(const Ellipse& e, double px, double py);

// Pixel (x, y) is a member iff its center (x+0.5, y+0.5) satisfies the
// rotated-ellipse inequality; pixels outside the image are clipped. No
// anti-aliasing: membership is integer-exact and oracle-checkable.
PixelMask rasterize(const Ellipse& e, int width, int height);

// |mask(a) & mask(b)| / |mask(a) | mask(b)| on the image grid; 0 when the
// union is empty. Iteration is restricted to the union of the two HBEs.
double pixel_iou(const Ellipse& a, const Ellipse& b, int width, int height);

// Rectangle intersection-over-union on continuous coordinates.
double box_iou(const HBox& a, const HBox& b);

// Single-window SSIM over the whole patch (population statistics,
// C1 = (0.01*255)^2, C2 = (0.03*255)^2). Patches must match and be >= 4x4.
double ssim(const GrayImage& a, const GrayImage& b);

// Pixel (x, y) maps to (W-1-x, H-1-y). Involution.
GrayImage rotate180(const GrayImage& img);

// Copy of the half-open window [x0, x1) x [y0, y1); bounds must be valid.
GrayImage crop(const GrayImage& img, int x0, int y0, int x1, int y1);

// 1-px outline by midpoint sampling of the parametric curve; out-of-bounds
// samples are clipped silently.
void draw_ellipse_outline(GrayImage& img, const Ellipse& e, std::uint8_t value);

} // namespace fiberdet
