#include "fiberdet/detect.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fiberdet/errors.hpp"

namespace fiberdet {

namespace {

// Between-class-variance-maximizing threshold over the 256-bin histogram.
// Foreground is the class above the returned level. Returns -1 when no
// level splits the image into two non-empty classes (constant image).
int otsu_threshold(const GrayImage& img) {
    std::array<std::int64_t, 256> hist{};
    for (std::uint8_t v : img.data) ++hist[v];
    const double total = static_cast<double>(img.data.size());
    double sum_all = 0;
    for (int v = 0; v < 256; ++v) sum_all += static_cast<double>(v) * hist[v];

    double best_var = -1;
    int best_t = -1;
    double w0 = 0, sum0 = 0;
    for (int t = 0; t < 255; ++t) {
        w0 += hist[t];
        if (w0 == 0) continue;
        const double w1 = total - w0;
        if (w1 == 0) break;
        sum0 += static_cast<double>(t) * hist[t];
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best_var) {
            best_var = between;
            best_t = t;
        }
    }
    return best_t;
}

struct Component {
    std::int64_t area = 0;
    double sum_x = 0, sum_y = 0;
    std::vector<int> pixels; // flat indices, filled during the flood
    bool touches_border = false;
};

} // namespace

Proposal::Proposal(const HBox& box, const Ellipse& ellipse, double score, bool touches_border)
    : box(box), ellipse(ellipse), score(score), touches_border(touches_border) {
    if (!std::isfinite(score) || score < 0 || score > 1)
        throw std::invalid_argument("Proposal: score must lie in [0, 1]");
}

std::vector<Proposal> detect_moments(const GrayImage& img, const MomentsConfig& cfg) {
    if (cfg.min_area < 1) throw ConfigError("min_area must be >= 1");
    const int w = img.width, h = img.height;
    std::vector<Proposal> out;
    if (w <= 0 || h <= 0) return out;

    int thresh = cfg.fixed_threshold;
    if (cfg.use_otsu) {
        thresh = otsu_threshold(img);
        if (thresh < 0) return out; // constant image: nothing to separate
    }
    const auto is_fg = [&](std::uint8_t v) {
        return cfg.dark_foreground ? v <= thresh : v > thresh;
    };

    std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
    std::vector<int> stack;
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            const int start = sy * w + sx;
            if (visited[start] || !is_fg(img.data[start])) continue;

            Component comp;
            visited[start] = 1;
            stack.assign(1, start);
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                const int x = idx % w, y = idx / w;
                comp.pixels.push_back(idx);
                ++comp.area;
                comp.sum_x += x + 0.5;
                comp.sum_y += y + 0.5;
                if (x == 0 || x == w - 1 || y == 0 || y == h - 1) comp.touches_border = true;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        const int nidx = ny * w + nx;
                        if (visited[nidx] || !is_fg(img.data[nidx])) continue;
                        visited[nidx] = 1;
                        stack.push_back(nidx);
                    }
                }
            }
            if (comp.area < cfg.min_area) continue;

            const double area = static_cast<double>(comp.area);
            const double cx = comp.sum_x / area;
            const double cy = comp.sum_y / area;
            double m20 = 0, m02 = 0, m11 = 0;
            for (int idx : comp.pixels) {
                const double dx = idx % w + 0.5 - cx;
                const double dy = idx / w + 0.5 - cy;
                m20 += dx * dx;
                m02 += dy * dy;
                m11 += dx * dy;
            }
            const double mu20 = m20 / area, mu02 = m02 / area, mu11 = m11 / area;
            // A solid ellipse with semi-axes R >= r has principal second
            // moments lambda1 = R^2/4 and lambda2 = r^2/4, so the axes are
            // recovered as 2*sqrt(lambda).
            const double half_trace = (mu20 + mu02) / 2;
            const double root = std::sqrt((mu20 - mu02) * (mu20 - mu02) / 4 + mu11 * mu11);
            const double lambda1 = half_trace + root;
            const double lambda2 = half_trace - root;
            if (lambda2 <= 1e-9) continue;
            const double theta = canonicalize_angle(0.5 * std::atan2(2 * mu11, mu20 - mu02));
            const Ellipse e(cx, cy, theta, 2 * std::sqrt(lambda1), 2 * std::sqrt(lambda2));
            const double fill =
                std::clamp(area / (std::numbers::pi * e.semi_major * e.semi_minor), 0.0, 1.0);
            out.emplace_back(hbe_of(e), e, fill, comp.touches_border);
        }
    }
    return out;
}

std::vector<Proposal> propose_oracle(const SceneGroundTruth& gt, const OracleConfig& cfg,
                                     Rng& rng) {
    if (cfg.proposals_per_object < 1) throw ConfigError("proposals_per_object must be >= 1");
    if (cfg.false_positives < 0) throw ConfigError("false_positives must be >= 0");
    if (cfg.sigma_center < 0 || cfg.sigma_scale < 0 || cfg.sigma_theta < 0)
        throw ConfigError("oracle noise sigmas must be >= 0");
    if (cfg.false_positives > 0 && (cfg.width <= 0 || cfg.height <= 0))
        throw ConfigError("false-positive placement needs positive image bounds");

    std::vector<Proposal> out;
    for (const FiberSample& fiber : gt.fibers) {
        for (int k = 0; k < cfg.proposals_per_object; ++k) {
            const Ellipse& g = fiber.ellipse;
            const double cx = g.cx + rng.normal(0, cfg.sigma_center);
            const double cy = g.cy + rng.normal(0, cfg.sigma_center);
            const double a = g.semi_major * std::exp(rng.normal(0, cfg.sigma_scale));
            const double b = g.semi_minor * std::exp(rng.normal(0, cfg.sigma_scale));
            const double theta = g.theta + rng.normal(0, cfg.sigma_theta);
            const Ellipse e(cx, cy, theta, a, b);
            out.emplace_back(hbe_of(e), e, rng.uniform(0.5, 1.0), false);
        }
    }
    if (cfg.false_positives > 0 && !gt.fibers.empty()) {
        for (int k = 0; k < cfg.false_positives; ++k) {
            const auto pick = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(gt.fibers.size()) - 1));
            const Ellipse& g = gt.fibers[pick].ellipse;
            const Ellipse e(rng.uniform(0, cfg.width), rng.uniform(0, cfg.height), g.theta,
                            g.semi_major, g.semi_minor);
            out.emplace_back(hbe_of(e), e, rng.uniform(0.1, 0.6), false);
        }
    }
    return out;
}

} // namespace fiberdet
