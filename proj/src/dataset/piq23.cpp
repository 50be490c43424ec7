#include "fhiqa/dataset/piq23.hpp"

#include "fhiqa/errors.hpp"
#include "fhiqa/util/csv.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>

namespace fhiqa::dataset {

namespace fs = std::filesystem;

std::string normalize_lighting(const std::string& raw) {
    std::string out;
    for (char c : util::to_lower(util::trim(raw))) {
        if (c != ' ' && c != '-' && c != '_') {
            out.push_back(c);
        }
    }
    return out;
}

namespace {

std::optional<std::size_t> find_column(const std::vector<std::string>& header, std::initializer_list<const char*> names) {
    for (const char* name : names) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (util::to_lower(util::trim(header[i])) == name) {
                return i;
            }
        }
    }
    return std::nullopt;
}

std::string attribute_from_filename(const fs::path& path) {
    const std::string stem = util::to_lower(path.stem().string());
    for (const char* attr : {attribute::kOverall, attribute::kExposure, attribute::kDetails}) {
        if (stem.find(util::to_lower(attr)) != std::string::npos) {
            return attr;
        }
    }
    return {};
}

std::string canonical_attribute(const std::string& raw) {
    const std::string l = util::to_lower(util::trim(raw));
    for (const char* attr : {attribute::kOverall, attribute::kExposure, attribute::kDetails}) {
        if (l == util::to_lower(attr)) {
            return attr;
        }
    }
    return util::trim(raw);
}

}  // namespace

std::vector<AnnotatedImage> convert_piq23_tables(const std::vector<fs::path>& tables) {
    std::vector<AnnotatedImage> out;
    std::map<std::string, std::size_t> index;
    for (const auto& table : tables) {
        std::ifstream in(table);
        if (!in) {
            throw IoError("cannot open " + table.string());
        }
        std::string line;
        std::size_t row = 1;
        if (!std::getline(in, line)) {
            throw ParseError(table.string() + ": empty file", row);
        }
        if (line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);
        }
        const auto header = util::split_csv_line(line);
        const auto path_col = find_column(header, {"image path", "image_path", "path"});
        const auto scene_col = find_column(header, {"scene", "scene_id"});
        const auto score_col = find_column(header, {"jod", "score"});
        const auto light_col = find_column(header, {"condition", "lighting"});
        const auto attr_col = find_column(header, {"attribute"});
        if (!path_col || !scene_col || !score_col) {
            throw ParseError(table.string() + ": need image path, scene and JOD columns", row);
        }
        const std::string file_attr = attribute_from_filename(table);
        if (!attr_col && file_attr.empty()) {
            throw ParseError(table.string() + ": cannot infer the attribute (no ATTRIBUTE column, no name hint)", row);
        }

        while (std::getline(in, line)) {
            ++row;
            if (util::trim(line).empty()) {
                continue;
            }
            const auto f = util::split_csv_line(line);
            if (f.size() < header.size()) {
                throw ParseError(table.string() + " row " + std::to_string(row) + ": too few columns", row);
            }
            const std::string path = util::trim(f[*path_col]);
            const std::string scene = util::trim(f[*scene_col]);
            const auto score = util::parse_double(f[*score_col]);
            if (path.empty() || scene.empty()) {
                throw ParseError(table.string() + " row " + std::to_string(row) + ": empty path or scene", row);
            }
            if (!score || !std::isfinite(*score)) {
                throw ParseError(table.string() + " row " + std::to_string(row) + ": score is not a number", row);
            }
            const std::string attr = attr_col ? canonical_attribute(f[*attr_col]) : file_attr;
            const std::string light = light_col ? normalize_lighting(f[*light_col]) : std::string("unknown");

            auto [it, inserted] = index.emplace(path, out.size());
            if (inserted) {
                AnnotatedImage img;
                img.image_path = path;
                img.scene_id = scene;
                img.lighting = light;
                out.push_back(std::move(img));
            }
            auto& img = out[it->second];
            if (img.scene_id != scene) {
                throw ParseError(table.string() + " row " + std::to_string(row) + ": image '" + path +
                                     "' assigned to two scenes",
                                 row);
            }
            if (!img.attribute_scores.emplace(attr, *score).second) {
                throw ParseError(table.string() + " row " + std::to_string(row) + ": duplicate (" + path + ", " +
                                     attr + ") pair",
                                 row);
            }
        }
    }
    return out;
}

}  // namespace fhiqa::dataset
