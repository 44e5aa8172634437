#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fiberdet/ellipse.hpp"
#include "fiberdet/io.hpp"
#include "fiberdet/raster.hpp"
#include "fiberdet/rng.hpp"

namespace fiberdet {

// One Gaussian-distributed parameter channel.
struct GaussianChannel {
    double mean = 0;
    double std = 0;
};

// Per-channel Gaussian model of a fiber population: semi-axes in pixels,
// orientation in radians, fill intensity in gray levels.
struct GaussianPrior {
    GaussianChannel semi_major;
    GaussianChannel semi_minor;
    GaussianChannel theta;
    GaussianChannel intensity;
};

struct FiberSample {
    Ellipse ellipse;
    double intensity = 0;
};

// Raw per-channel draws, before ordering/positivity rejection and before
// intensity clipping. Exposed so distribution tests can see the
// unconditioned stream.
struct FiberDraw {
    double semi_major = 0;
    double semi_minor = 0;
    double theta = 0;
    double intensity = 0;
};

// Accepted shape draw: axes ordered semi_minor <= semi_major and > 1 px,
// theta canonical, intensity clipped to [0, 255].
struct FiberShape {
    double semi_major = 0;
    double semi_minor = 0;
    double theta = 0;
    double intensity = 0;
};

struct SceneGroundTruth {
    std::string image_id;
    std::vector<FiberSample> fibers;
};

struct Degradation {
    enum class Kind { stain, blur };
    Kind kind = Kind::stain;
    double factor = 0.5;   // stain: multiplier in [0, 1) applied inside a random disk
    int kernel_radius = 2; // blur: box kernel half-width, >= 1
};

struct SynthConfig {
    int width = 646;
    int height = 484;
    int count = 50;      // placement target; fewer are placed if space runs out
    double margin = 2.0; // padding added around every bounding box in the overlap test
    double background_level = 128;
    double background_noise_std = 8;
    std::string background_image; // empty: flat level + noise
    bool background_resample = true;
    std::vector<Degradation> degradations;
    std::uint64_t seed = 0;
};

// Sample mean and (n-1)-normalized standard deviation for each channel.
// Throws DataError on fewer than 2 samples.
GaussianPrior fit_priors(const std::vector<FiberSample>& samples);

// Single unconstrained draw from every channel.
FiberDraw draw_channels(const GaussianPrior& prior, Rng& rng);

// Redraws all channels until semi_minor <= semi_major and both axes exceed
// 1 px, then clips intensity to [0, 255]. Throws ConfigError if no valid
// draw appears within 1000 attempts.
FiberShape sample_fiber_params(const GaussianPrior& prior, Rng& rng);

// Draws shapes and places each at a uniform-random center whose bounding
// box stays inside the image, rejecting candidates whose margin-inflated
// bounding box overlaps an accepted one. Stops at cfg.count placements or
// when the attempt budget runs out; attempts_out (optional) reports the
// number of draws spent. Throws ConfigError if cfg.count > 0 and nothing
// could be placed.
SceneGroundTruth sample_scene(const GaussianPrior& prior, const SynthConfig& cfg, Rng& rng,
                              int* attempts_out = nullptr);

// Fills the background (flat level + clipped Gaussian noise, or the
// configured image, bilinearly resampled to the target size when allowed),
// paints every fiber's member pixels with its intensity, then applies the
// configured degradations in order. Throws ConfigError if a provided
// background is too small and resampling is disabled.
GrayImage render_scene(const SceneGroundTruth& gt, const SynthConfig& cfg, Rng& rng);

// Writes <id>.png and <id>.csv per scene plus manifest.json into dir and
// returns the manifest entries (paths relative to dir). The degraded flag
// is recorded on every entry.
std::vector<ManifestEntry> export_dataset(const std::vector<SceneGroundTruth>& scenes,
                                          const std::vector<GrayImage>& images,
                                          const std::string& dir, bool degraded = false);

void write_priors_json(const std::string& path, const GaussianPrior& prior);
GaussianPrior read_priors_json(const std::string& path);

} // namespace fiberdet
