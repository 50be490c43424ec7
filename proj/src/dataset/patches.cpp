#include "fhiqa/dataset/patches.hpp"

#include "fhiqa/errors.hpp"
#include "fhiqa/util/csv.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace fhiqa::dataset {

int default_patches_for_size(int patch_size) {
    switch (patch_size) {
        case 224:
            return 5;
        case 672:
            return 3;
        case 1344:
            return 1;
        default:
            throw RangeError("no default patch count for size " + std::to_string(patch_size) +
                             " (expected 224, 672 or 1344)");
    }
}

PatchConfig PatchConfig::for_size(int patch_size, std::uint64_t seed) {
    return PatchConfig{patch_size, default_patches_for_size(patch_size), seed, false};
}

void PatchConfig::validate() const {
    if (patch_size <= 0 || patches_per_image <= 0) {
        throw RangeError("patch config: size and count must be positive");
    }
    if (!custom_pairing && default_patches_for_size(patch_size) != patches_per_image) {
        throw RangeError("patch config: size " + std::to_string(patch_size) + " pairs with " +
                         std::to_string(default_patches_for_size(patch_size)) + " patches, got " +
                         std::to_string(patches_per_image));
    }
}

std::vector<Rect> sample_crop_rects(int frame_w, int frame_h, const PatchConfig& config, std::uint64_t stream_seed) {
    const int size = config.patch_size;
    if (frame_w < size || frame_h < size) {
        throw ShapeError("crop frame " + std::to_string(frame_w) + "x" + std::to_string(frame_h) +
                         " is smaller than the patch size " + std::to_string(size));
    }
    std::mt19937_64 rng(stream_seed);
    std::uniform_int_distribution<int> xs(0, frame_w - size);
    std::uniform_int_distribution<int> ys(0, frame_h - size);
    std::vector<Rect> rects;
    rects.reserve(static_cast<std::size_t>(config.patches_per_image));
    for (int i = 0; i < config.patches_per_image; ++i) {
        const int x = xs(rng);
        const int y = ys(rng);
        rects.push_back({x, y, size, size});
    }
    return rects;
}

PatchSample sample_patches(const cv::Mat& image, const PatchConfig& config, const std::optional<Rect>& roi,
                           std::string_view image_key) {
    config.validate();
    if (image.empty()) {
        throw ShapeError("sample_patches: empty image");
    }
    cv::Mat frame = image;
    if (roi) {
        if (!roi->inside(image.cols, image.rows)) {
            throw RangeError("sample_patches: region " + std::to_string(roi->x) + "," + std::to_string(roi->y) + " " +
                             std::to_string(roi->width) + "x" + std::to_string(roi->height) +
                             " lies outside the " + std::to_string(image.cols) + "x" + std::to_string(image.rows) +
                             " image");
        }
        frame = image(cv::Rect(roi->x, roi->y, roi->width, roi->height));
    }

    PatchSample sample;
    const int size = config.patch_size;
    if (frame.cols < size || frame.rows < size) {
        const double scale = std::max(static_cast<double>(size) / frame.cols, static_cast<double>(size) / frame.rows);
        const int w = std::max(size, static_cast<int>(std::ceil(frame.cols * scale)));
        const int h = std::max(size, static_cast<int>(std::ceil(frame.rows * scale)));
        cv::Mat up;
        cv::resize(frame, up, cv::Size(w, h), 0, 0, cv::INTER_LINEAR);
        spdlog::warn("image '{}' region {}x{} is smaller than patch size {}; upscaled to {}x{}", image_key,
                     frame.cols, frame.rows, size, w, h);
        frame = up;
        sample.upscaled = true;
    }

    const auto stream = util::mix_seed(config.seed, util::stable_hash(image_key));
    sample.crops = sample_crop_rects(frame.cols, frame.rows, config, stream);
    sample.patches.reserve(sample.crops.size());
    for (const auto& r : sample.crops) {
        sample.patches.push_back(frame(cv::Rect(r.x, r.y, r.width, r.height)).clone());
    }
    return sample;
}

cv::Mat load_image(const std::filesystem::path& path) {
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (img.empty()) {
        throw IoError("cannot decode image " + path.string());
    }
    return img;
}

}  // namespace fhiqa::dataset
