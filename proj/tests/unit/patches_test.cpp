#include "fhiqa/dataset/patches.hpp"
#include "fhiqa/errors.hpp"

#include <gtest/gtest.h>

#include <opencv2/core.hpp>

#include <random>

namespace fhiqa::dataset {
namespace {

cv::Mat noise_image(int w, int h, std::uint64_t seed) {
    cv::Mat img(h, w, CV_8UC3);
    cv::RNG rng(seed);
    rng.fill(img, cv::RNG::UNIFORM, 0, 256);
    return img;
}

bool same_pixels(const cv::Mat& a, const cv::Mat& b) { return cv::norm(a, b, cv::NORM_INF) == 0.0; }

TEST(Patches, DefaultCountsPerSize) {
    EXPECT_EQ(default_patches_for_size(224), 5);
    EXPECT_EQ(default_patches_for_size(672), 3);
    EXPECT_EQ(default_patches_for_size(1344), 1);
    EXPECT_THROW(default_patches_for_size(300), RangeError);
    EXPECT_THROW((PatchConfig{224, 3, 0, false}.validate()), RangeError);
    EXPECT_NO_THROW((PatchConfig{224, 3, 0, true}.validate()));
}

TEST(Patches, ExactSizeImageGivesIdenticalFullFrameCrops) {
    const auto img = noise_image(224, 224, 1);
    const auto s = sample_patches(img, PatchConfig::for_size(224, 3), std::nullopt, "x");
    ASSERT_EQ(s.patches.size(), 5u);
    for (const auto& p : s.patches) {
        EXPECT_TRUE(same_pixels(p, img));
    }
    for (const auto& r : s.crops) {
        EXPECT_EQ(r, (Rect{0, 0, 224, 224}));
    }
}

TEST(Patches, SameSeedSameCrops) {
    const auto img = noise_image(500, 400, 2);
    const auto cfg = PatchConfig::for_size(224, 17);
    const auto a = sample_patches(img, cfg, std::nullopt, "img.png");
    const auto b = sample_patches(img, cfg, std::nullopt, "img.png");
    EXPECT_EQ(a.crops, b.crops);
    const auto c = sample_patches(img, PatchConfig::for_size(224, 18), std::nullopt, "img.png");
    EXPECT_NE(a.crops, c.crops);
}

TEST(Patches, CropsStayInsideImageOrRegion) {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> side(224, 900);
    const cv::Mat big = noise_image(1000, 1000, 3);
    for (int trial = 0; trial < 1000; ++trial) {
        const int w = side(rng);
        const int h = side(rng);
        const cv::Mat img = big(cv::Rect(0, 0, w, h));
        std::optional<Rect> roi;
        if (trial % 2 == 1) {
            std::uniform_int_distribution<int> rw(224, w), rh(224, h);
            const int ww = rw(rng), hh = rh(rng);
            std::uniform_int_distribution<int> rx(0, w - ww), ry(0, h - hh);
            roi = Rect{rx(rng), ry(rng), ww, hh};
        }
        const auto s = sample_patches(img, PatchConfig::for_size(224, static_cast<std::uint64_t>(trial)), roi,
                                      "k" + std::to_string(trial));
        const int fw = roi ? roi->width : w;
        const int fh = roi ? roi->height : h;
        for (std::size_t i = 0; i < s.crops.size(); ++i) {
            EXPECT_TRUE(s.crops[i].inside(fw, fh));
            const int ox = roi ? roi->x : 0;
            const int oy = roi ? roi->y : 0;
            const cv::Mat expected = img(cv::Rect(ox + s.crops[i].x, oy + s.crops[i].y, 224, 224));
            EXPECT_TRUE(same_pixels(s.patches[i], expected));
        }
    }
}

TEST(Patches, SmallRegionIsUpscaled) {
    const auto img = noise_image(300, 120, 4);
    const auto s = sample_patches(img, PatchConfig::for_size(224, 0), std::nullopt, "small");
    EXPECT_TRUE(s.upscaled);
    for (const auto& p : s.patches) {
        EXPECT_EQ(p.rows, 224);
        EXPECT_EQ(p.cols, 224);
    }
}

TEST(Patches, RegionOutsideImageIsRejected) {
    const auto img = noise_image(300, 300, 5);
    EXPECT_THROW(sample_patches(img, PatchConfig::for_size(224, 0), Rect{100, 100, 224, 224}, "r"), RangeError);
}

}  // namespace
}  // namespace fhiqa::dataset
