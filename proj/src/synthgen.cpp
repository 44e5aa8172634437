#include "fiberdet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fiberdet/errors.hpp"
#include "fiberdet/png_io.hpp"

namespace fiberdet {

namespace {

constexpr int kShapeAttempts = 1000;

std::uint8_t to_gray(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

double channel_mean(const std::vector<double>& xs) {
    double sum = 0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

double channel_std(const std::vector<double>& xs, double mean) {
    double sq = 0;
    for (double x : xs) sq += (x - mean) * (x - mean);
    return std::sqrt(sq / static_cast<double>(xs.size() - 1));
}

GaussianChannel fit_channel(const std::vector<double>& xs) {
    const double mean = channel_mean(xs);
    return {mean, channel_std(xs, mean)};
}

void validate_config(const SynthConfig& cfg) {
    if (cfg.width <= 0 || cfg.height <= 0)
        throw ConfigError("image size must be positive, got " + std::to_string(cfg.width) + "x" +
                          std::to_string(cfg.height));
    if (cfg.count < 0) throw ConfigError("ellipse count must be >= 0");
    if (cfg.margin < 0) throw ConfigError("margin must be >= 0");
    if (cfg.background_noise_std < 0) throw ConfigError("background noise std must be >= 0");
    for (const Degradation& d : cfg.degradations) {
        if (d.kind == Degradation::Kind::stain && (d.factor < 0 || d.factor >= 1))
            throw ConfigError("stain factor must lie in [0, 1)");
        if (d.kind == Degradation::Kind::blur && d.kernel_radius < 1)
            throw ConfigError("blur kernel radius must be >= 1");
    }
}

// Inflating both boxes by the margin turns "gap >= 2*margin" into a plain
// box intersection test. Touching inflated boxes are allowed.
bool inflated_boxes_overlap(const HBox& a, const HBox& b, double margin) {
    const double dx = std::abs(a.cx - b.cx);
    const double dy = std::abs(a.cy - b.cy);
    return dx < (a.w + b.w) / 2 + 2 * margin && dy < (a.h + b.h) / 2 + 2 * margin;
}

GrayImage resample_bilinear(const GrayImage& src, int width, int height) {
    GrayImage out(width, height);
    const double sx = static_cast<double>(src.width) / width;
    const double sy = static_cast<double>(src.height) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double wx = fx - x0;
            const double top = src.at(x0, y0) * (1 - wx) + src.at(x1, y0) * wx;
            const double bot = src.at(x0, y1) * (1 - wx) + src.at(x1, y1) * wx;
            out.at(x, y) = to_gray(top * (1 - wy) + bot * wy);
        }
    }
    return out;
}

GrayImage make_background(const SynthConfig& cfg, Rng& rng) {
    if (cfg.background_image.empty()) {
        GrayImage img(cfg.width, cfg.height, to_gray(cfg.background_level));
        if (cfg.background_noise_std > 0) {
            for (int y = 0; y < cfg.height; ++y)
                for (int x = 0; x < cfg.width; ++x)
                    img.at(x, y) =
                        to_gray(cfg.background_level + rng.normal(0, cfg.background_noise_std));
        }
        return img;
    }
    const GrayImage src = read_png_gray(cfg.background_image);
    if (src.width == cfg.width && src.height == cfg.height) return src;
    if (cfg.background_resample) return resample_bilinear(src, cfg.width, cfg.height);
    if (src.width >= cfg.width && src.height >= cfg.height)
        return crop(src, 0, 0, cfg.width, cfg.height);
    throw ConfigError("background image " + cfg.background_image + " is " +
                      std::to_string(src.width) + "x" + std::to_string(src.height) +
                      ", smaller than the target " + std::to_string(cfg.width) + "x" +
                      std::to_string(cfg.height) + ", and resampling is disabled");
}

void paint_fiber(GrayImage& img, const FiberSample& fiber) {
    const HBox box = hbe_of(fiber.ellipse);
    const int x0 = std::max(0, static_cast<int>(std::floor(box.cx - box.w / 2)) - 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(box.cy - box.h / 2)) - 1);
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(box.cx + box.w / 2)) + 1);
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(box.cy + box.h / 2)) + 1);
    const std::uint8_t value = to_gray(fiber.intensity);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (ellipse_contains(fiber.ellipse, x + 0.5, y + 0.5)) img.at(x, y) = value;
}

void apply_stain(GrayImage& img, double factor, Rng& rng) {
    const double cx = rng.uniform(0, img.width);
    const double cy = rng.uniform(0, img.height);
    const double lo = std::min(img.width, img.height) / 16.0;
    const double hi = std::min(img.width, img.height) / 6.0;
    const double radius = rng.uniform(lo, hi);
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)) - 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)) - 1);
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + radius)) + 1);
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + radius)) + 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            if (dx * dx + dy * dy <= radius * radius) img.at(x, y) = to_gray(img.at(x, y) * factor);
        }
    }
}

void apply_blur(GrayImage& img, int kernel_radius, Rng& rng) {
    const int rw = static_cast<int>(
        rng.uniform_int(std::max(1, img.width / 8), std::max(1, img.width / 2)));
    const int rh = static_cast<int>(
        rng.uniform_int(std::max(1, img.height / 8), std::max(1, img.height / 2)));
    const int x0 = static_cast<int>(rng.uniform_int(0, img.width - rw));
    const int y0 = static_cast<int>(rng.uniform_int(0, img.height - rh));
    const GrayImage src = img; // blur reads the pre-blur image, clamped at borders
    const int k = kernel_radius;
    const double inv = 1.0 / ((2 * k + 1) * (2 * k + 1));
    for (int y = y0; y < y0 + rh; ++y) {
        for (int x = x0; x < x0 + rw; ++x) {
            double sum = 0;
            for (int dy = -k; dy <= k; ++dy) {
                const int sy = std::clamp(y + dy, 0, img.height - 1);
                for (int dx = -k; dx <= k; ++dx)
                    sum += src.at(std::clamp(x + dx, 0, img.width - 1), sy);
            }
            img.at(x, y) = to_gray(sum * inv);
        }
    }
}

} // namespace

GaussianPrior fit_priors(const std::vector<FiberSample>& samples) {
    if (samples.size() < 2)
        throw DataError("prior fitting needs at least 2 samples, got " +
                        std::to_string(samples.size()));
    std::vector<double> a, b, t, i;
    a.reserve(samples.size());
    b.reserve(samples.size());
    t.reserve(samples.size());
    i.reserve(samples.size());
    for (const FiberSample& s : samples) {
        a.push_back(s.ellipse.semi_major);
        b.push_back(s.ellipse.semi_minor);
        t.push_back(s.ellipse.theta);
        i.push_back(s.intensity);
    }
    return {fit_channel(a), fit_channel(b), fit_channel(t), fit_channel(i)};
}

FiberDraw draw_channels(const GaussianPrior& prior, Rng& rng) {
    return {rng.normal(prior.semi_major.mean, prior.semi_major.std),
            rng.normal(prior.semi_minor.mean, prior.semi_minor.std),
            rng.normal(prior.theta.mean, prior.theta.std),
            rng.normal(prior.intensity.mean, prior.intensity.std)};
}

FiberShape sample_fiber_params(const GaussianPrior& prior, Rng& rng) {
    for (int attempt = 0; attempt < kShapeAttempts; ++attempt) {
        const FiberDraw d = draw_channels(prior, rng);
        if (d.semi_minor > d.semi_major || d.semi_major <= 1 || d.semi_minor <= 1) continue;
        return {d.semi_major, d.semi_minor, canonicalize_angle(d.theta),
                std::clamp(d.intensity, 0.0, 255.0)};
    }
    throw ConfigError("axis prior produced no draw with 1 < semi_minor <= semi_major in " +
                      std::to_string(kShapeAttempts) + " attempts");
}

SceneGroundTruth sample_scene(const GaussianPrior& prior, const SynthConfig& cfg, Rng& rng,
                              int* attempts_out) {
    validate_config(cfg);
    SceneGroundTruth gt;
    std::vector<HBox> accepted_boxes;
    const int budget = 1000 + 200 * cfg.count;
    int attempts = 0;
    while (static_cast<int>(gt.fibers.size()) < cfg.count && attempts < budget) {
        ++attempts;
        const FiberShape shape = sample_fiber_params(prior, rng);
        const HBox extent = hbe_of(Ellipse(0, 0, shape.theta, shape.semi_major, shape.semi_minor));
        if (extent.w > cfg.width || extent.h > cfg.height) continue;
        const double cx = rng.uniform(extent.w / 2, cfg.width - extent.w / 2);
        const double cy = rng.uniform(extent.h / 2, cfg.height - extent.h / 2);
        const HBox box{cx, cy, extent.w, extent.h};
        bool overlaps = false;
        for (const HBox& other : accepted_boxes) {
            if (inflated_boxes_overlap(box, other, cfg.margin)) {
                overlaps = true;
                break;
            }
        }
        if (overlaps) continue;
        accepted_boxes.push_back(box);
        gt.fibers.push_back(
            {Ellipse(cx, cy, shape.theta, shape.semi_major, shape.semi_minor), shape.intensity});
    }
    if (attempts_out) *attempts_out = attempts;
    if (cfg.count > 0 && gt.fibers.empty())
        throw ConfigError("could not place any ellipse in a " + std::to_string(cfg.width) + "x" +
                          std::to_string(cfg.height) + " image; prior shapes may be too large");
    return gt;
}

GrayImage render_scene(const SceneGroundTruth& gt, const SynthConfig& cfg, Rng& rng) {
    validate_config(cfg);
    GrayImage img = make_background(cfg, rng);
    for (const FiberSample& fiber : gt.fibers) paint_fiber(img, fiber);
    for (const Degradation& d : cfg.degradations) {
        if (d.kind == Degradation::Kind::stain)
            apply_stain(img, d.factor, rng);
        else
            apply_blur(img, d.kernel_radius, rng);
    }
    return img;
}

std::vector<ManifestEntry> export_dataset(const std::vector<SceneGroundTruth>& scenes,
                                          const std::vector<GrayImage>& images,
                                          const std::string& dir, bool degraded) {
    if (scenes.size() != images.size())
        throw ConfigError("scene/image list size mismatch: " + std::to_string(scenes.size()) +
                          " vs " + std::to_string(images.size()));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());

    std::vector<ManifestEntry> entries;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        if (scenes[i].image_id.empty()) throw ConfigError("scene missing an image id");
        const std::string png_name = scenes[i].image_id + ".png";
        const std::string csv_name = scenes[i].image_id + ".csv";
        write_png_gray((std::filesystem::path(dir) / png_name).string(), images[i]);
        std::vector<AnnotationRow> rows;
        rows.reserve(scenes[i].fibers.size());
        for (const FiberSample& f : scenes[i].fibers)
            rows.push_back({png_name, f.ellipse, f.intensity});
        write_annotation_csv((std::filesystem::path(dir) / csv_name).string(), rows);
        entries.push_back({png_name, csv_name, degraded});
    }
    write_manifest((std::filesystem::path(dir) / "manifest.json").string(), entries);
    return entries;
}

void write_priors_json(const std::string& path, const GaussianPrior& prior) {
    const auto channel = [](const GaussianChannel& c) {
        return nlohmann::ordered_json{{"mean", c.mean}, {"std", c.std}};
    };
    nlohmann::ordered_json doc{{"semi_major", channel(prior.semi_major)},
                               {"semi_minor", channel(prior.semi_minor)},
                               {"theta", channel(prior.theta)},
                               {"intensity", channel(prior.intensity)}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open priors file for writing: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw DataError("write failed: " + path);
}

GaussianPrior read_priors_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open priors file: " + path);
    nlohmann::json doc;
    GaussianPrior prior;
    try {
        in >> doc;
        const auto channel = [&](const char* name) {
            const auto& node = doc.at(name);
            return GaussianChannel{node.at("mean").get<double>(), node.at("std").get<double>()};
        };
        prior = {channel("semi_major"), channel("semi_minor"), channel("theta"),
                 channel("intensity")};
    } catch (const nlohmann::json::exception& err) {
        throw DataError("malformed priors file " + path + ": " + err.what());
    }
    if (prior.semi_major.std < 0 || prior.semi_minor.std < 0 || prior.theta.std < 0 ||
        prior.intensity.std < 0)
        throw DataError("priors file " + path + ": channel std must be >= 0");
    if (prior.semi_major.mean <= 0 || prior.semi_minor.mean <= 0)
        throw DataError("priors file " + path + ": semi-axis means must be positive");
    return prior;
}

} // namespace fiberdet
