#include "fhiqa/dataset/manifest.hpp"

#include "fhiqa/errors.hpp"
#include "fhiqa/util/csv.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fhiqa::dataset {

namespace fs = std::filesystem;

bool is_face_attribute(const std::string& attr) {
    return attr == attribute::kExposure || attr == attribute::kDetails;
}

fs::path Manifest::resolve(const AnnotatedImage& image) const {
    if (image.image_path.is_absolute() || base_dir.empty()) {
        return image.image_path;
    }
    return base_dir / image.image_path;
}

namespace {

const std::vector<std::string> kColumns = {"image_path", "scene_id", "lighting", "attribute", "score",
                                           "face_x",     "face_y",   "face_w",   "face_h"};

int parse_face_field(const std::string& text, const char* name, std::size_t row) {
    auto v = util::parse_int(text);
    if (!v) {
        throw ParseError("manifest row " + std::to_string(row) + ": " + name + " '" + text + "' is not an integer",
                         row);
    }
    return static_cast<int>(*v);
}

}  // namespace

Manifest parse_manifest(const std::string& text, const fs::path& base_dir) {
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;

    Manifest manifest;
    manifest.base_dir = base_dir;

    // Skip a UTF-8 BOM and blank lines before the header.
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (row == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);
        }
        if (!util::trim(line).empty()) {
            header = util::split_csv_line(line);
            break;
        }
    }
    if (header.empty()) {
        throw ParseError("manifest: missing header row", row);
    }
    for (auto& h : header) {
        h = util::trim(h);
    }
    if (header.size() < 5) {
        throw ParseError("manifest: header must be '" + std::string(kManifestHeader) + "'", row);
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i >= kColumns.size() || header[i] != kColumns[i]) {
            throw ParseError("manifest: unexpected column '" + header[i] + "' at position " + std::to_string(i + 1) +
                                 "; header must be '" + std::string(kManifestHeader) + "'",
                             row);
        }
    }
    const bool has_face = header.size() == kColumns.size();
    if (!has_face && header.size() != 5) {
        throw ParseError("manifest: face columns must be given all together", row);
    }

    std::unordered_map<std::string, std::size_t> image_index;
    std::set<std::pair<std::string, std::string>> seen_pairs;

    while (std::getline(in, line)) {
        ++row;
        if (util::trim(line).empty()) {
            continue;
        }
        auto fields = util::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ParseError("manifest row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                                 " columns, found " + std::to_string(fields.size()),
                             row);
        }
        const std::string& path = fields[0];
        const std::string& scene = fields[1];
        const std::string& light = fields[2];
        const std::string& attr = fields[3];
        if (path.empty()) {
            throw ParseError("manifest row " + std::to_string(row) + ": empty image_path", row);
        }
        if (scene.empty()) {
            throw ParseError("manifest row " + std::to_string(row) + ": empty scene_id", row);
        }
        if (attr.empty()) {
            throw ParseError("manifest row " + std::to_string(row) + ": empty attribute", row);
        }
        auto score = util::parse_double(fields[4]);
        if (!score || !std::isfinite(*score)) {
            throw ParseError("manifest row " + std::to_string(row) + ": score '" + fields[4] + "' is not a number",
                             row);
        }
        if (!seen_pairs.emplace(path, attr).second) {
            throw ParseError("manifest row " + std::to_string(row) + ": duplicate (" + path + ", " + attr + ") pair",
                             row);
        }

        std::optional<Rect> face;
        if (has_face) {
            const bool any = !fields[5].empty() || !fields[6].empty() || !fields[7].empty() || !fields[8].empty();
            const bool all = !fields[5].empty() && !fields[6].empty() && !fields[7].empty() && !fields[8].empty();
            if (any && !all) {
                throw ParseError("manifest row " + std::to_string(row) + ": face region partially specified", row);
            }
            if (all) {
                Rect r{parse_face_field(fields[5], "face_x", row), parse_face_field(fields[6], "face_y", row),
                       parse_face_field(fields[7], "face_w", row), parse_face_field(fields[8], "face_h", row)};
                if (r.x < 0 || r.y < 0 || r.width <= 0 || r.height <= 0) {
                    throw ParseError("manifest row " + std::to_string(row) + ": invalid face region", row);
                }
                face = r;
            }
        }

        auto it = image_index.find(path);
        if (it == image_index.end()) {
            AnnotatedImage img;
            img.image_path = path;
            img.scene_id = scene;
            img.lighting = light;
            img.face_region = face;
            img.attribute_scores.emplace(attr, *score);
            image_index.emplace(path, manifest.images.size());
            manifest.images.push_back(std::move(img));
            manifest.registry.add(scene);
        } else {
            auto& img = manifest.images[it->second];
            if (img.scene_id != scene || img.lighting != light) {
                throw ParseError("manifest row " + std::to_string(row) + ": image '" + path +
                                     "' listed with conflicting scene or lighting",
                                 row);
            }
            if (face) {
                if (img.face_region && *img.face_region != *face) {
                    throw ParseError("manifest row " + std::to_string(row) + ": conflicting face region for '" +
                                         path + "'",
                                     row);
                }
                img.face_region = face;
            }
            img.attribute_scores.emplace(attr, *score);
        }
    }
    return manifest;
}

Manifest load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open manifest " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str(), path.parent_path());
}

std::string format_manifest(const std::vector<AnnotatedImage>& images) {
    std::ostringstream out;
    out << kManifestHeader << '\n';
    for (const auto& img : images) {
        for (const auto& [attr, score] : img.attribute_scores) {
            std::vector<std::string> row = {img.image_path.generic_string(), img.scene_id, img.lighting, attr,
                                            util::format_roundtrip(score)};
            if (img.face_region) {
                row.push_back(std::to_string(img.face_region->x));
                row.push_back(std::to_string(img.face_region->y));
                row.push_back(std::to_string(img.face_region->width));
                row.push_back(std::to_string(img.face_region->height));
            } else {
                row.insert(row.end(), 4, std::string());
            }
            util::write_csv_row(out, row);
        }
    }
    return out.str();
}

void save_manifest(const fs::path& path, const std::vector<AnnotatedImage>& images) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write manifest " + path.string());
    }
    out << format_manifest(images);
    if (!out) {
        throw IoError("failed writing manifest " + path.string());
    }
}

std::vector<AnnotatedImage> select_images(const Manifest& manifest, const std::string& attr,
                                          const std::vector<std::string>& scenes) {
    std::unordered_set<std::string> wanted(scenes.begin(), scenes.end());
    std::vector<AnnotatedImage> out;
    for (const auto& img : manifest.images) {
        if (!img.attribute_scores.contains(attr)) {
            continue;
        }
        if (!wanted.empty() && !wanted.contains(img.scene_id)) {
            continue;
        }
        out.push_back(img);
    }
    return out;
}

}  // namespace fhiqa::dataset
