#include "fiberdet/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fiberdet/errors.hpp"

namespace fiberdet {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, const std::string& path, int line_no) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty())
        throw DataError(path + ":" + std::to_string(line_no) + ": not a number: '" + s + "'");
    return v;
}

std::string format_row(const std::string& image, const Ellipse& e, double last) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", image.c_str(), e.cx, e.cy,
                  e.theta, e.semi_major, e.semi_minor, last);
    return buf;
}

// Shared reader for both CSV flavors; they differ only in the last column.
template <typename Row>
std::vector<Row> read_rows(const std::string& path, const char* expected_header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV: " + path);
    std::string line;
    int line_no = 0;
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_fields(line);
        if (line_no == 1) {
            if (fields.size() != 7 || line.find(expected_header) != 0)
                throw DataError(path + ":1: expected header '" + expected_header + "'");
            continue;
        }
        if (fields.size() != 7)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected 7 fields, got " +
                            std::to_string(fields.size()));
        const double cx = parse_number(fields[1], path, line_no);
        const double cy = parse_number(fields[2], path, line_no);
        const double theta = parse_number(fields[3], path, line_no);
        const double a = parse_number(fields[4], path, line_no);
        const double b = parse_number(fields[5], path, line_no);
        const double last = parse_number(fields[6], path, line_no);
        try {
            rows.push_back(Row{fields[0], Ellipse(cx, cy, theta, a, b), last});
        } catch (const std::invalid_argument& err) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " + err.what());
        }
    }
    return rows;
}

template <typename Row>
void write_rows(const std::string& path, const std::vector<Row>& rows, const char* header,
                double Row::*last) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open CSV for writing: " + path);
    out << header << "\n";
    for (const Row& r : rows)
        out << format_row(r.image, r.ellipse, r.*last) << "\n";
    if (!out) throw DataError("write failed: " + path);
}

constexpr const char* kAnnotationHeader = "image,cx,cy,theta,semi_major,semi_minor,intensity";
constexpr const char* kDetectionHeader = "image,cx,cy,theta,semi_major,semi_minor,score";

} // namespace

void write_annotation_csv(const std::string& path, const std::vector<AnnotationRow>& rows) {
    write_rows(path, rows, kAnnotationHeader, &AnnotationRow::intensity);
}

std::vector<AnnotationRow> read_annotation_csv(const std::string& path) {
    return read_rows<AnnotationRow>(path, kAnnotationHeader);
}

void write_detection_csv(const std::string& path, const std::vector<DetectionRow>& rows) {
    write_rows(path, rows, kDetectionHeader, &DetectionRow::score);
}

std::vector<DetectionRow> read_detection_csv(const std::string& path) {
    return read_rows<DetectionRow>(path, kDetectionHeader);
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    nlohmann::ordered_json doc;
    doc["images"] = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        doc["images"].push_back(
            {{"image", e.image}, {"annotations", e.annotations}, {"degraded", e.degraded}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open manifest for writing: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw DataError("write failed: " + path);
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
        std::vector<ManifestEntry> entries;
        for (const auto& e : doc.at("images")) {
            entries.push_back({e.at("image").get<std::string>(),
                               e.at("annotations").get<std::string>(),
                               e.value("degraded", false)});
        }
        return entries;
    } catch (const nlohmann::json::exception& err) {
        throw DataError("malformed manifest " + path + ": " + err.what());
    }
}

std::string resolve_against(const std::string& manifest_path, const std::string& relative) {
    const std::filesystem::path rel(relative);
    if (rel.is_absolute()) return relative;
    return (std::filesystem::path(manifest_path).parent_path() / rel).string();
}

} // namespace fiberdet
