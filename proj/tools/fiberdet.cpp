// fiberdet: elliptical fiber detection toolkit.
//
// Subcommands: fit-priors, synth, detect, eval, overlay. Exit codes:
// 0 success, 1 usage/config error, 2 data error, 3 partial failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fiberdet/detect.hpp"
#include "fiberdet/ellipse.hpp"
#include "fiberdet/errors.hpp"
#include "fiberdet/evalkit.hpp"
#include "fiberdet/io.hpp"
#include "fiberdet/parallel.hpp"
#include "fiberdet/png_io.hpp"
#include "fiberdet/ranking_nms.hpp"
#include "fiberdet/raster.hpp"
#include "fiberdet/rng.hpp"
#include "fiberdet/synthgen.hpp"

namespace fs = std::filesystem;
using namespace fiberdet;

namespace {

unsigned default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

std::string detection_name(const std::string& image) {
    return fs::path(image).stem().string() + ".det.csv";
}

double parse_degradation_number(const std::string& text, const std::string& arg) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(arg, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != arg.size() || arg.empty())
        throw ConfigError("bad degradation argument in '" + text + "'");
    return v;
}

Degradation parse_degradation(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    Degradation d;
    if (kind == "stain") {
        d.kind = Degradation::Kind::stain;
        if (!arg.empty()) d.factor = parse_degradation_number(text, arg);
    } else if (kind == "blur") {
        d.kind = Degradation::Kind::blur;
        if (!arg.empty()) d.kernel_radius = static_cast<int>(parse_degradation_number(text, arg));
    } else {
        throw ConfigError("unknown degradation '" + text +
                          "' (expected stain:<factor> or blur:<radius>)");
    }
    return d;
}

// ---- fit-priors ----

struct FitPriorsArgs {
    std::string annotations;
    std::string out;
};

int run_fit_priors(const FitPriorsArgs& a) {
    const std::vector<AnnotationRow> rows = read_annotation_csv(a.annotations);
    std::vector<FiberSample> samples;
    samples.reserve(rows.size());
    for (const AnnotationRow& r : rows) samples.push_back({r.ellipse, r.intensity});
    write_priors_json(a.out, fit_priors(samples));
    return 0;
}

// ---- synth ----

struct SynthArgs {
    std::string priors;
    std::string out;
    std::uint64_t seed = 0;
    int images = 10;
    SynthConfig cfg;
    std::vector<std::string> degrade_args;
    unsigned jobs = default_jobs();
};

int run_synth(SynthArgs& a) {
    if (a.images < 1) throw ConfigError("--images must be >= 1");
    for (const std::string& arg : a.degrade_args)
        a.cfg.degradations.push_back(parse_degradation(arg));
    a.cfg.seed = a.seed;
    const GaussianPrior prior = read_priors_json(a.priors);

    const Rng master(a.seed);
    const auto n = static_cast<std::size_t>(a.images);
    std::vector<SceneGroundTruth> scenes(n);
    std::vector<GrayImage> images(n);
    parallel_for(n, a.jobs, [&](std::size_t i) {
        const Rng scene_rng = master.child(i);
        Rng sample_rng = scene_rng.child(0);
        Rng render_rng = scene_rng.child(1);
        SceneGroundTruth gt = sample_scene(prior, a.cfg, sample_rng);
        char id[32];
        std::snprintf(id, sizeof(id), "img_%04zu", i);
        gt.image_id = id;
        images[i] = render_scene(gt, a.cfg, render_rng);
        scenes[i] = std::move(gt);
    });
    export_dataset(scenes, images, a.out, !a.cfg.degradations.empty());
    return 0;
}

// ---- detect ----

struct DetectArgs {
    std::string manifest;
    std::string out;
    std::string backend = "moments";
    double lambda = 1.0;
    double nms_iou = 0.7;
    double dedup_dist = 20.0;
    bool drop_border = false;
    MomentsConfig moments;
    int fixed_threshold = -1; // >= 0 disables Otsu
    std::uint64_t seed = 0;
    bool seed_given = false;
    OracleConfig oracle;
    unsigned jobs = default_jobs();
};

int run_detect(DetectArgs& a) {
    if (!std::isfinite(a.lambda)) throw ConfigError("--lambda must be finite");
    if (!(a.nms_iou > 0 && a.nms_iou < 1)) throw ConfigError("--nms-iou must lie in (0, 1)");
    if (!(a.dedup_dist > 0)) throw ConfigError("--dedup-dist must be positive");
    const bool use_oracle = a.backend == "oracle";
    if (use_oracle && !a.seed_given) throw ConfigError("--seed is required for the oracle backend");
    if (a.fixed_threshold >= 0) {
        if (a.fixed_threshold > 255) throw ConfigError("--fixed-threshold must lie in [0, 255]");
        a.moments.use_otsu = false;
        a.moments.fixed_threshold = a.fixed_threshold;
    }

    const std::vector<ManifestEntry> entries = read_manifest(a.manifest);
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw DataError("cannot create output directory " + a.out + ": " + ec.message());

    const Rng master(a.seed);
    std::vector<std::string> errors(entries.size());
    parallel_for(entries.size(), a.jobs, [&](std::size_t i) {
        const ManifestEntry& entry = entries[i];
        try {
            const GrayImage img = read_png_gray(resolve_against(a.manifest, entry.image));
            std::vector<Proposal> props;
            if (use_oracle) {
                SceneGroundTruth gt;
                gt.image_id = entry.image;
                for (const AnnotationRow& r :
                     read_annotation_csv(resolve_against(a.manifest, entry.annotations)))
                    gt.fibers.push_back({r.ellipse, r.intensity});
                OracleConfig cfg = a.oracle;
                cfg.width = img.width;
                cfg.height = img.height;
                Rng rng = master.child(i);
                props = propose_oracle(gt, cfg, rng);
            } else {
                props = detect_moments(img, a.moments);
            }
            if (a.drop_border)
                std::erase_if(props, [](const Proposal& p) { return p.touches_border; });

            const std::vector<RankedProposal> kept =
                nms_symmetry(rank_proposals(img, props, a.lambda), a.nms_iou);
            std::vector<ScoredEllipse> candidates;
            candidates.reserve(kept.size());
            for (const RankedProposal& r : kept)
                candidates.push_back({r.proposal.ellipse, r.s_combined});
            const std::vector<ScoredEllipse> final_set = dedup_final(candidates, a.dedup_dist);

            std::vector<DetectionRow> rows;
            rows.reserve(final_set.size());
            for (const ScoredEllipse& s : final_set)
                rows.push_back({entry.image, s.ellipse, s.score});
            write_detection_csv((fs::path(a.out) / detection_name(entry.image)).string(), rows);
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
            if (errors[i].empty()) errors[i] = "unknown error";
        }
    });

    int failed = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!errors[i].empty()) {
            ++failed;
            std::cerr << "error: " << entries[i].image << ": " << errors[i] << "\n";
        }
    }
    return failed > 0 ? 3 : 0;
}

// ---- eval ----

struct EvalArgs {
    std::string manifest;
    std::string detections;
    std::string out;
    std::string mode = "ellipse";
    double match_iou = 0.5;
    unsigned jobs = default_jobs();
};

int run_eval(const EvalArgs& a) {
    if (!(a.match_iou > 0 && a.match_iou < 1)) throw ConfigError("--match-iou must lie in (0, 1)");
    const std::vector<ManifestEntry> entries = read_manifest(a.manifest);
    if (entries.empty()) throw DataError("manifest " + a.manifest + " lists no images");
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw DataError("cannot create output directory " + a.out + ": " + ec.message());

    std::vector<EvalReport> reports(entries.size());
    parallel_for(entries.size(), a.jobs, [&](std::size_t i) {
        const ManifestEntry& entry = entries[i];
        const std::string det_path =
            (fs::path(a.detections) / detection_name(entry.image)).string();

        std::vector<Ellipse> gts;
        for (const AnnotationRow& r :
             read_annotation_csv(resolve_against(a.manifest, entry.annotations))) {
            if (r.image != entry.image)
                throw DataError(entry.annotations + " references image '" + r.image +
                                "' but the manifest entry is '" + entry.image + "'");
            gts.push_back(r.ellipse);
        }
        std::vector<ScoredEllipse> dets;
        for (const DetectionRow& r : read_detection_csv(det_path)) {
            if (r.image != entry.image)
                throw DataError(det_path + " references image '" + r.image +
                                "' but the manifest entry is '" + entry.image + "'");
            dets.push_back({r.ellipse, r.score});
        }

        if (a.mode == "ellipse") {
            const GrayImage img = read_png_gray(resolve_against(a.manifest, entry.image));
            reports[i] = ellipse_metrics(
                match_ellipses(dets, gts, img.width, img.height, a.match_iou), dets, gts);
        } else {
            reports[i] = box_metrics(dets, gts, a.match_iou);
        }
    });

    const EvalReport overall = aggregate(reports);
    nlohmann::ordered_json doc;
    doc["metadata"] = {{"mode", a.mode},
                       {"match_iou", a.match_iou},
                       {"matching", "greedy-by-descending-score"},
                       {"averaging", "micro"}};
    doc["overall"] = report_json(overall);
    doc["images"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        nlohmann::ordered_json item{{"image", entries[i].image}};
        item["metrics"] = report_json(reports[i]);
        doc["images"].push_back(std::move(item));
    }

    std::ofstream json_out(fs::path(a.out) / "report.json", std::ios::binary);
    if (!json_out) throw DataError("cannot write report.json under " + a.out);
    json_out << doc.dump(2) << "\n";
    const std::string table = report_table(overall);
    std::ofstream table_out(fs::path(a.out) / "table.txt", std::ios::binary);
    if (!table_out) throw DataError("cannot write table.txt under " + a.out);
    table_out << table;
    std::cout << table;
    return 0;
}

// ---- overlay ----

struct OverlayArgs {
    std::string image;
    std::string ellipses;
    std::string out;
    int value = 255;
};

// Accepts either CSV flavor; the header's last column decides.
std::vector<Ellipse> read_ellipses_any(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV: " + path);
    std::string header;
    std::getline(in, header);
    in.close();
    std::vector<Ellipse> out;
    if (header.find("score") != std::string::npos) {
        for (const DetectionRow& r : read_detection_csv(path)) out.push_back(r.ellipse);
    } else {
        for (const AnnotationRow& r : read_annotation_csv(path)) out.push_back(r.ellipse);
    }
    return out;
}

int run_overlay(const OverlayArgs& a) {
    if (a.value < 0 || a.value > 255) throw ConfigError("--value must lie in [0, 255]");
    GrayImage img = read_png_gray(a.image);
    for (const Ellipse& e : read_ellipses_any(a.ellipses))
        draw_ellipse_outline(img, e, static_cast<std::uint8_t>(a.value));
    write_png_gray(a.out, img);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Elliptical fiber detection toolkit"};
    app.require_subcommand(1);

    FitPriorsArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit-priors", "Fit Gaussian priors from an annotation CSV");
    fit->add_option("--annotations", fit_args.annotations, "Annotation CSV to fit")->required();
    fit->add_option("--out", fit_args.out, "Output priors JSON path")->required();

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate synthetic fiber images");
    synth->add_option("--priors", synth_args.priors, "Priors JSON path")->required();
    synth->add_option("--out", synth_args.out, "Output dataset directory")->required();
    synth->add_option("--seed", synth_args.seed, "Master RNG seed")->required();
    synth->add_option("--images", synth_args.images, "Number of images")
        ->capture_default_str();
    synth->add_option("--width", synth_args.cfg.width, "Image width, px")->capture_default_str();
    synth->add_option("--height", synth_args.cfg.height, "Image height, px")
        ->capture_default_str();
    synth->add_option("--count", synth_args.cfg.count, "Target ellipse count per image")
        ->capture_default_str();
    synth->add_option("--margin", synth_args.cfg.margin, "Minimum inter-ellipse margin, px")
        ->capture_default_str();
    synth->add_option("--background-level", synth_args.cfg.background_level,
                      "Flat background gray level")
        ->capture_default_str();
    synth->add_option("--background-noise", synth_args.cfg.background_noise_std,
                      "Background Gaussian noise std")
        ->capture_default_str();
    synth->add_option("--background-image", synth_args.cfg.background_image,
                      "Background PNG instead of flat fill");
    synth->add_flag("--no-background-resample",
                    [&](std::int64_t) { synth_args.cfg.background_resample = false; },
                    "Crop the background image instead of resampling it");
    synth->add_option("--degrade", synth_args.degrade_args,
                      "Degradation, stain:<factor> or blur:<radius>; repeatable");
    synth->add_option("--jobs", synth_args.jobs, "Worker threads")->capture_default_str();

    DetectArgs detect_args;
    CLI::App* detect = app.add_subcommand("detect", "Detect ellipses on a dataset");
    detect->add_option("--manifest", detect_args.manifest, "Dataset manifest JSON")->required();
    detect->add_option("--out", detect_args.out, "Output directory for detection CSVs")
        ->required();
    detect->add_option("--backend", detect_args.backend, "Detection backend")
        ->check(CLI::IsMember({"moments", "oracle"}))
        ->capture_default_str();
    detect->add_option("--lambda", detect_args.lambda, "Symmetry weight in the combined score")
        ->capture_default_str();
    detect->add_option("--nms-iou", detect_args.nms_iou, "NMS suppression IoU threshold")
        ->capture_default_str();
    detect->add_option("--dedup-dist", detect_args.dedup_dist,
                       "Final duplicate-removal center distance, px")
        ->capture_default_str();
    detect->add_flag("--drop-border", detect_args.drop_border,
                     "Drop components touching the image border");
    detect->add_option("--min-area", detect_args.moments.min_area,
                       "Moments backend: minimum component area, px")
        ->capture_default_str();
    detect->add_option("--fixed-threshold", detect_args.fixed_threshold,
                       "Moments backend: fixed gray threshold instead of Otsu");
    detect->add_flag("--dark-foreground", detect_args.moments.dark_foreground,
                     "Moments backend: foreground is darker than background");
    CLI::Option* seed_opt =
        detect->add_option("--seed", detect_args.seed, "Oracle backend: RNG seed");
    detect->add_option("--proposals-per-object", detect_args.oracle.proposals_per_object,
                       "Oracle backend: proposals per ground-truth object")
        ->capture_default_str();
    detect->add_option("--sigma-center", detect_args.oracle.sigma_center,
                       "Oracle backend: center jitter std, px")
        ->capture_default_str();
    detect->add_option("--sigma-scale", detect_args.oracle.sigma_scale,
                       "Oracle backend: log-space axis scale jitter std")
        ->capture_default_str();
    detect->add_option("--sigma-theta", detect_args.oracle.sigma_theta,
                       "Oracle backend: orientation jitter std, rad")
        ->capture_default_str();
    detect->add_option("--false-positives", detect_args.oracle.false_positives,
                       "Oracle backend: spurious proposals per image")
        ->capture_default_str();
    detect->add_option("--jobs", detect_args.jobs, "Worker threads")->capture_default_str();

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Score detections against ground truth");
    eval->add_option("--manifest", eval_args.manifest, "Dataset manifest JSON")->required();
    eval->add_option("--detections", eval_args.detections, "Directory of detection CSVs")
        ->required();
    eval->add_option("--out", eval_args.out, "Output directory for report.json and table.txt")
        ->required();
    eval->add_option("--mode", eval_args.mode, "Evaluation mode")
        ->check(CLI::IsMember({"ellipse", "box"}))
        ->capture_default_str();
    eval->add_option("--match-iou", eval_args.match_iou, "Match acceptance IoU threshold")
        ->capture_default_str();
    eval->add_option("--jobs", eval_args.jobs, "Worker threads")->capture_default_str();

    OverlayArgs overlay_args;
    CLI::App* overlay = app.add_subcommand("overlay", "Draw ellipse outlines onto an image");
    overlay->add_option("--image", overlay_args.image, "Input PNG")->required();
    overlay->add_option("--ellipses", overlay_args.ellipses,
                        "Annotation or detection CSV to draw")
        ->required();
    overlay->add_option("--out", overlay_args.out, "Output PNG")->required();
    overlay->add_option("--value", overlay_args.value, "Outline gray level")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        detect_args.seed_given = seed_opt->count() > 0;
        if (fit->parsed()) return run_fit_priors(fit_args);
        if (synth->parsed()) return run_synth(synth_args);
        if (detect->parsed()) return run_detect(detect_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (overlay->parsed()) return run_overlay(overlay_args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
