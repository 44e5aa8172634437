#pragma once

#include <string>
#include <vector>

#include "fiberdet/ellipse.hpp"

namespace fiberdet {

// One annotated fiber: header image,cx,cy,theta,semi_major,semi_minor,intensity
struct AnnotationRow {
    std::string image;
    Ellipse ellipse;
    double intensity;
};

// One detection: header image,cx,cy,theta,semi_major,semi_minor,score
// (score is the combined score downstream of ranking, so it may exceed 1).
struct DetectionRow {
    std::string image;
    Ellipse ellipse;
    double score;
};

struct ManifestEntry {
    std::string image;       // relative to the manifest's directory
    std::string annotations; // relative to the manifest's directory
    bool degraded = false;
};

void write_annotation_csv(const std::string& path, const std::vector<AnnotationRow>& rows);
std::vector<AnnotationRow> read_annotation_csv(const std::string& path);

void write_detection_csv(const std::string& path, const std::vector<DetectionRow>& rows);
std::vector<DetectionRow> read_detection_csv(const std::string& path);

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::string& path);

// "<dir of manifest_path>/<relative>".
std::string resolve_against(const std::string& manifest_path, const std::string& relative);

} // namespace fiberdet
