#pragma once

#include "fhiqa/dataset/manifest.hpp"

#include <opencv2/core.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace fhiqa::dataset {

// Number of crops drawn per image for each supported patch side.
int default_patches_for_size(int patch_size);

struct PatchConfig {
    int patch_size = 224;
    int patches_per_image = 5;
    std::uint64_t seed = 0;
    // Allows a (size, count) pairing outside the default mapping.
    bool custom_pairing = false;

    static PatchConfig for_size(int patch_size, std::uint64_t seed = 0);
    void validate() const;
};

struct PatchSample {
    std::vector<cv::Mat> patches;   // CV_8UC3, patch_size x patch_size
    std::vector<Rect> crops;        // in the (possibly upscaled) sampling frame
    bool upscaled = false;
};

// Top-left corners drawn uniformly over every valid position of a
// `frame_w` x `frame_h` region; requires both sides >= patch size.
std::vector<Rect> sample_crop_rects(int frame_w, int frame_h, const PatchConfig& config, std::uint64_t stream_seed);

// Random square crops from `image` (restricted to `roi` when given). The
// random stream is derived from (config.seed, image_key). Regions smaller
// than the patch are bilinearly upscaled first and a warning is logged.
PatchSample sample_patches(const cv::Mat& image, const PatchConfig& config, const std::optional<Rect>& roi,
                           std::string_view image_key);

// Decodes an image file to 8-bit BGR.
cv::Mat load_image(const std::filesystem::path& path);

}  // namespace fhiqa::dataset
