#pragma once

#include "fhiqa/core/scene.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fhiqa::dataset {

namespace lighting {
inline constexpr const char* kOutdoor = "outdoor";
inline constexpr const char* kIndoor = "indoor";
inline constexpr const char* kLowlight = "lowlight";
inline constexpr const char* kNight = "night";
}  // namespace lighting

namespace attribute {
inline constexpr const char* kOverall = "Overall";
inline constexpr const char* kExposure = "Exposure";
inline constexpr const char* kDetails = "Details";
}  // namespace attribute

// Attributes judged on the face crop rather than the whole frame.
bool is_face_attribute(const std::string& attribute);

struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool inside(int image_width, int image_height) const {
        return x >= 0 && y >= 0 && width > 0 && height > 0 && x + width <= image_width && y + height <= image_height;
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct AnnotatedImage {
    std::filesystem::path image_path;  // as written in the manifest
    std::string scene_id;
    std::string lighting;
    std::map<std::string, double> attribute_scores;
    std::optional<Rect> face_region;

    friend bool operator==(const AnnotatedImage&, const AnnotatedImage&) = default;
};

struct Manifest {
    std::vector<AnnotatedImage> images;  // first-appearance order
    core::SceneRegistry registry;        // distinct scenes, first-appearance order
    std::filesystem::path base_dir;      // relative image paths resolve against this

    std::filesystem::path resolve(const AnnotatedImage& image) const;
};

inline constexpr const char* kManifestHeader = "image_path,scene_id,lighting,attribute,score,face_x,face_y,face_w,face_h";

// Long-format CSV, one row per (image, attribute).
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir = {});

void save_manifest(const std::filesystem::path& path, const std::vector<AnnotatedImage>& images);
std::string format_manifest(const std::vector<AnnotatedImage>& images);

// Images carrying a score for `attribute`, restricted to the given scenes
// (all scenes when `scenes` is empty).
std::vector<AnnotatedImage> select_images(const Manifest& manifest, const std::string& attribute,
                                          const std::vector<std::string>& scenes = {});

}  // namespace fhiqa::dataset
