#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fiberdet/detect.hpp"
#include "fiberdet/errors.hpp"
#include "fiberdet/raster.hpp"
#include "fiberdet/rng.hpp"
#include "fiberdet/synthgen.hpp"

using namespace fiberdet;

namespace {

constexpr double kPi = std::numbers::pi;

// Paints the ellipse's member pixels over a flat background.
GrayImage paint(int width, int height, std::uint8_t bg, const Ellipse& e, std::uint8_t fg) {
    GrayImage img(width, height, bg);
    const PixelMask mask = rasterize(e, width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (mask.test(x, y)) img.at(x, y) = fg;
    return img;
}

} // namespace

TEST_SUITE("detect") {

TEST_CASE("proposal scores are validated") {
    const Ellipse e(10, 10, 0, 5.0, 3.0);
    const HBox box = hbe_of(e);
    CHECK_NOTHROW(Proposal(box, e, 0.0, false));
    CHECK_NOTHROW(Proposal(box, e, 1.0, true));
    CHECK_THROWS_AS(Proposal(box, e, -0.1, false), std::invalid_argument);
    CHECK_THROWS_AS(Proposal(box, e, 1.1, false), std::invalid_argument);
    CHECK_THROWS_AS(Proposal(box, e, std::nan(""), false), std::invalid_argument);
}

TEST_CASE("constant images produce no detections") {
    CHECK(detect_moments(GrayImage(64, 64, 200), {}).empty());
    CHECK(detect_moments(GrayImage(64, 64, 0), {}).empty());
    CHECK(detect_moments(GrayImage(64, 64, 255), {}).empty());
}

TEST_CASE("a single bright circle is recovered") {
    const Ellipse gt(32.5, 32.5, 0.0, 10.0, 10.0);
    const GrayImage img = paint(64, 64, 50, gt, 200);
    const auto props = detect_moments(img, {});
    REQUIRE(props.size() == 1);
    const Proposal& p = props[0];
    CHECK(std::abs(p.ellipse.cx - gt.cx) < 0.5);
    CHECK(std::abs(p.ellipse.cy - gt.cy) < 0.5);
    CHECK(std::abs(p.ellipse.semi_major - gt.semi_major) < 0.05 * gt.semi_major);
    CHECK(std::abs(p.ellipse.semi_minor - gt.semi_minor) < 0.05 * gt.semi_minor);
    CHECK(p.score >= 0.9);
    CHECK(p.score <= 1.0);
    CHECK_FALSE(p.touches_border);
}

TEST_CASE("dark foreground mode inverts the threshold test") {
    const Ellipse gt(30.5, 25.5, 0.3, 9.0, 5.0);
    const GrayImage img = paint(64, 52, 200, gt, 40);

    MomentsConfig cfg;
    cfg.dark_foreground = true;
    const auto props = detect_moments(img, cfg);
    REQUIRE(props.size() == 1);
    CHECK(std::abs(props[0].ellipse.cx - gt.cx) < 0.5);
    CHECK(std::abs(props[0].ellipse.cy - gt.cy) < 0.5);
}

TEST_CASE("fixed threshold path ignores the histogram") {
    const Ellipse gt(20.5, 20.5, 0.0, 8.0, 6.0);
    const GrayImage img = paint(48, 48, 100, gt, 160);
    MomentsConfig cfg;
    cfg.use_otsu = false;
    cfg.fixed_threshold = 130;
    const auto props = detect_moments(img, cfg);
    REQUIRE(props.size() == 1);

    cfg.fixed_threshold = 200; // everything below: nothing is foreground
    CHECK(detect_moments(img, cfg).empty());
}

TEST_CASE("min_area filters small components") {
    GrayImage img(64, 64, 50);
    // A 2x2 dot plus a real ellipse.
    img.at(5, 5) = img.at(6, 5) = img.at(5, 6) = img.at(6, 6) = 200;
    const Ellipse gt(40.5, 40.5, 0.0, 9.0, 7.0);
    const PixelMask mask = rasterize(gt, 64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if (mask.test(x, y)) img.at(x, y) = 200;

    MomentsConfig strict;
    strict.min_area = 50;
    CHECK(detect_moments(img, strict).size() == 1);

    MomentsConfig lax;
    lax.min_area = 1;
    CHECK(detect_moments(img, lax).size() == 2);

    MomentsConfig bad;
    bad.min_area = 0;
    CHECK_THROWS_AS(detect_moments(img, bad), ConfigError);
}

TEST_CASE("components are 8-connected") {
    GrayImage img(32, 32, 0);
    // Two 3x3 blocks touching only at one diagonal corner.
    for (int y = 10; y <= 12; ++y)
        for (int x = 10; x <= 12; ++x) img.at(x, y) = 255;
    for (int y = 13; y <= 15; ++y)
        for (int x = 13; x <= 15; ++x) img.at(x, y) = 255;
    MomentsConfig cfg;
    cfg.min_area = 1;
    const auto props = detect_moments(img, cfg);
    CHECK(props.size() == 1);
}

TEST_CASE("axes follow the second-moment identity of the found component") {
    const Ellipse gt(64.5, 48.5, 0.0, 20.0, 10.0);
    const GrayImage img = paint(129, 97, 50, gt, 200);
    const auto props = detect_moments(img, {});
    REQUIRE(props.size() == 1);
    const Proposal& p = props[0];

    // Independent moment pass over the same member pixels.
    const PixelMask mask = rasterize(gt, 129, 97);
    double n = 0, sx = 0, sy = 0;
    for (int y = 0; y < 97; ++y) {
        for (int x = 0; x < 129; ++x) {
            if (!mask.test(x, y)) continue;
            n += 1;
            sx += x + 0.5;
            sy += y + 0.5;
        }
    }
    const double cx = sx / n, cy = sy / n;
    double mu20 = 0, mu02 = 0;
    for (int y = 0; y < 97; ++y) {
        for (int x = 0; x < 129; ++x) {
            if (!mask.test(x, y)) continue;
            mu20 += (x + 0.5 - cx) * (x + 0.5 - cx);
            mu02 += (y + 0.5 - cy) * (y + 0.5 - cy);
        }
    }
    mu20 /= n;
    mu02 /= n;

    CHECK(std::abs(p.ellipse.cx - cx) < 1e-9);
    CHECK(std::abs(p.ellipse.cy - cy) < 1e-9);
    // Axis-aligned shape: the principal moments are mu20 and mu02.
    CHECK(std::abs(p.ellipse.semi_major - 2 * std::sqrt(mu20)) < 1e-6);
    CHECK(std::abs(p.ellipse.semi_minor - 2 * std::sqrt(mu02)) < 1e-6);
    CHECK(angle_distance(p.ellipse.theta, 0.0) < 0.02);
}

TEST_CASE("a rotated ellipse is recovered") {
    const Ellipse gt(50.5, 40.5, 0.7, 18.0, 8.0);
    const GrayImage img = paint(101, 81, 50, gt, 200);
    const auto props = detect_moments(img, {});
    REQUIRE(props.size() == 1);
    const Proposal& p = props[0];
    CHECK(std::abs(p.ellipse.cx - gt.cx) < 0.5);
    CHECK(std::abs(p.ellipse.cy - gt.cy) < 0.5);
    CHECK(std::abs(p.ellipse.semi_major - gt.semi_major) < 0.05 * gt.semi_major);
    CHECK(std::abs(p.ellipse.semi_minor - gt.semi_minor) < 0.05 * gt.semi_minor);
    CHECK(angle_distance(p.ellipse.theta, gt.theta) < 0.05);
    CHECK(p.score >= 0.9);
}

TEST_CASE("fill score of a solid rectangle is 3/pi") {
    GrayImage img(64, 48, 50);
    for (int y = 14; y < 34; ++y)
        for (int x = 12; x < 52; ++x) img.at(x, y) = 200;
    const auto props = detect_moments(img, {});
    REQUIRE(props.size() == 1);
    CHECK(std::abs(props[0].score - 3.0 / kPi) <= 0.02);
}

TEST_CASE("touches_border is set for edge components") {
    const Ellipse edge(2.0, 30.0, 0.0, 6.0, 5.0); // spills past x = 0
    const GrayImage img = paint(64, 60, 50, edge, 200);
    const auto props = detect_moments(img, {});
    REQUIRE(props.size() == 1);
    CHECK(props[0].touches_border);
}

TEST_CASE("two separated fibers give two proposals") {
    GrayImage img(96, 64, 50);
    const Ellipse a(25.5, 30.5, 0.2, 10.0, 6.0);
    const Ellipse b(70.5, 33.5, 1.1, 9.0, 5.0);
    for (const Ellipse* e : {&a, &b}) {
        const PixelMask mask = rasterize(*e, 96, 64);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 96; ++x)
                if (mask.test(x, y)) img.at(x, y) = 200;
    }
    auto props = detect_moments(img, {});
    REQUIRE(props.size() == 2);
    // Scan order finds the left one first.
    CHECK(std::abs(props[0].ellipse.cx - a.cx) < 0.5);
    CHECK(std::abs(props[1].ellipse.cx - b.cx) < 0.5);
}

TEST_CASE("oracle with zero noise returns the ground truth") {
    SceneGroundTruth gt{"id",
                        {{Ellipse(100.25, 50.5, 0.7, 20.0, 10.0), 200.0},
                         {Ellipse(300.0, 200.0, 2.3, 15.0, 5.0), 180.0}}};
    OracleConfig cfg;
    Rng rng(0xdec0de01);
    const auto props = propose_oracle(gt, cfg, rng);
    REQUIRE(props.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(props[i].ellipse.cx == gt.fibers[i].ellipse.cx);
        CHECK(props[i].ellipse.cy == gt.fibers[i].ellipse.cy);
        CHECK(props[i].ellipse.theta == gt.fibers[i].ellipse.theta);
        CHECK(props[i].ellipse.semi_major == gt.fibers[i].ellipse.semi_major);
        CHECK(props[i].ellipse.semi_minor == gt.fibers[i].ellipse.semi_minor);
        CHECK(props[i].score >= 0.5);
        CHECK(props[i].score < 1.0);
    }
}

TEST_CASE("oracle is deterministic in the seed") {
    SceneGroundTruth gt{"id", {{Ellipse(50.0, 50.0, 0.4, 10.0, 6.0), 190.0}}};
    OracleConfig cfg;
    cfg.proposals_per_object = 3;
    cfg.sigma_center = 1.0;
    cfg.sigma_scale = 0.05;
    cfg.sigma_theta = 0.05;
    cfg.false_positives = 2;
    cfg.width = 100;
    cfg.height = 100;
    Rng a(0xdec0de02), b(0xdec0de02);
    const auto pa = propose_oracle(gt, cfg, a);
    const auto pb = propose_oracle(gt, cfg, b);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i].ellipse.cx == pb[i].ellipse.cx);
        CHECK(pa[i].score == pb[i].score);
    }
}

TEST_CASE("oracle proposal and false-positive counts") {
    SceneGroundTruth gt{"id",
                        {{Ellipse(30.0, 30.0, 0.1, 8.0, 4.0), 200.0},
                         {Ellipse(70.0, 70.0, 0.9, 9.0, 5.0), 210.0}}};
    OracleConfig cfg;
    cfg.proposals_per_object = 3;
    cfg.false_positives = 5;
    cfg.width = 120;
    cfg.height = 100;
    Rng rng(0xdec0de03);
    const auto props = propose_oracle(gt, cfg, rng);
    REQUIRE(props.size() == 2 * 3 + 5);
    for (std::size_t i = 6; i < props.size(); ++i) {
        CHECK(props[i].score >= 0.1);
        CHECK(props[i].score < 0.6);
        CHECK(props[i].ellipse.cx >= 0.0);
        CHECK(props[i].ellipse.cx <= 120.0);
        CHECK(props[i].ellipse.cy >= 0.0);
        CHECK(props[i].ellipse.cy <= 100.0);
    }
}

TEST_CASE("oracle jitter keeps proposals on top of their objects") {
    OracleConfig cfg;
    cfg.proposals_per_object = 3;
    cfg.sigma_center = 1.0;
    cfg.sigma_scale = 0.05;
    cfg.sigma_theta = 0.05;
    for (std::uint64_t seed : {11ULL, 22ULL, 33ULL}) {
        SceneGroundTruth gt{"id", {}};
        Rng place(seed);
        for (int i = 0; i < 5; ++i) {
            gt.fibers.push_back({Ellipse(60.0 + 90.0 * i, 60.0 + place.uniform(0.0, 30.0),
                                         place.uniform(0.0, kPi), 18.0, 9.0),
                                 200.0});
        }
        Rng rng(seed * 7919);
        const auto props = propose_oracle(gt, cfg, rng);
        REQUIRE(props.size() == 15);
        for (const FiberSample& f : gt.fibers) {
            bool covered = false;
            for (const Proposal& p : props)
                covered = covered || pixel_iou(p.ellipse, f.ellipse, 520, 130) > 0.5;
            CHECK(covered);
        }
    }
}

TEST_CASE("oracle on an empty scene is empty") {
    OracleConfig cfg;
    cfg.false_positives = 3;
    cfg.width = 64;
    cfg.height = 64;
    Rng rng(0xdec0de04);
    CHECK(propose_oracle({"id", {}}, cfg, rng).empty());
}

TEST_CASE("oracle configuration is validated") {
    SceneGroundTruth gt{"id", {{Ellipse(10, 10, 0, 5.0, 3.0), 100.0}}};
    Rng rng(1);
    OracleConfig cfg;
    cfg.proposals_per_object = 0;
    CHECK_THROWS_AS(propose_oracle(gt, cfg, rng), ConfigError);
    cfg = {};
    cfg.false_positives = -1;
    CHECK_THROWS_AS(propose_oracle(gt, cfg, rng), ConfigError);
    cfg = {};
    cfg.sigma_center = -0.5;
    CHECK_THROWS_AS(propose_oracle(gt, cfg, rng), ConfigError);
    cfg = {};
    cfg.false_positives = 2;
    cfg.width = 0;
    CHECK_THROWS_AS(propose_oracle(gt, cfg, rng), ConfigError);
}

} // TEST_SUITE
