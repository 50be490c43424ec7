#include "fhiqa/dataset/manifest.hpp"
#include "fhiqa/dataset/patches.hpp"
#include "fhiqa/dataset/synthetic.hpp"
#include "fhiqa/errors.hpp"
#include "fhiqa/util/csv.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace fhiqa::dataset {
namespace {

std::map<std::string, double> read_latents(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::map<std::string, double> out;
    while (std::getline(in, line)) {
        const auto f = util::split_csv_line(line);
        out[f[0]] = *util::parse_double(f[2]);
    }
    return out;
}

TEST(Synthetic, ScoreExamples) {
    EXPECT_DOUBLE_EQ(synthetic_score(4.0, 1.0, 0.25), 2.0);
    EXPECT_DOUBLE_EQ(synthetic_score(1.0, 0.0, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(latent_to_blur_sigma(1.0, 4.0), 0.0);
    EXPECT_DOUBLE_EQ(latent_to_blur_sigma(0.0, 4.0), 4.0);
    EXPECT_THROW(latent_to_blur_sigma(1.5, 4.0), RangeError);
    EXPECT_THROW(latent_to_contrast(-0.1), RangeError);
}

TEST(Synthetic, ScoreStrictlyIncreasesWithLatent) {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto truth = random_affine_truth(20, 3);
    for (std::size_t s = 0; s < truth.size(); ++s) {
        ASSERT_GT(truth.multiplier(s), 0.0);
        for (int trial = 0; trial < 100; ++trial) {
            double lo = u(rng), hi = u(rng);
            if (lo == hi) {
                continue;
            }
            if (lo > hi) {
                std::swap(lo, hi);
            }
            EXPECT_LT(synthetic_score(truth.multiplier(s), truth.offset(s), lo),
                      synthetic_score(truth.multiplier(s), truth.offset(s), hi));
            EXPECT_LT(latent_to_blur_sigma(hi, 4.0), latent_to_blur_sigma(lo, 4.0));
            EXPECT_LT(latent_to_contrast(lo), latent_to_contrast(hi));
        }
    }
}

TEST(Synthetic, AffineTruthRanges) {
    const auto t = random_affine_truth(50, 9);
    for (std::size_t s = 0; s < t.size(); ++s) {
        EXPECT_GE(t.multiplier(s), 1.0);
        EXPECT_LE(t.multiplier(s), 4.0);
        EXPECT_GE(t.offset(s), -1.0);
        EXPECT_LE(t.offset(s), 2.0);
    }
    EXPECT_EQ(random_affine_truth(5, 9), random_affine_truth(5, 9));
}

TEST(Synthetic, DatasetLayoutAndScores) {
    fhiqa::testing::TempDir dir("synth");
    SyntheticOptions opt;
    opt.n_scenes = 5;
    opt.images_per_scene = 20;
    opt.image_size = 64;
    opt.seed = 2;
    const auto truth = random_affine_truth(opt.n_scenes, opt.seed);
    const auto manifest_path = generate_synthetic_dataset(opt, truth, dir.path());
    const auto manifest = load_manifest(manifest_path);
    ASSERT_EQ(manifest.images.size(), 100u);
    EXPECT_EQ(manifest.registry.count(), 5u);

    core::SceneRegistry reg;
    const auto loaded_truth = load_affine_truth(dir / "affine_truth.csv", &reg);
    EXPECT_EQ(loaded_truth, truth);
    EXPECT_EQ(reg, manifest.registry);

    const auto latents = read_latents(dir / "latent.csv");
    for (const auto& img : manifest.images) {
        const auto s = *reg.index_of(img.scene_id);
        const double latent = latents.at(img.image_path.generic_string());
        EXPECT_DOUBLE_EQ(img.attribute_scores.at("Overall"), truth.multiplier(s) * latent + truth.offset(s));
        const auto pixels = load_image(manifest.resolve(img));
        EXPECT_EQ(pixels.rows, 64);
        EXPECT_EQ(pixels.cols, 64);
    }
}

TEST(Synthetic, IdentityTruthScoresEqualLatent) {
    fhiqa::testing::TempDir dir("synth-id");
    SyntheticOptions opt;
    opt.n_scenes = 2;
    opt.images_per_scene = 4;
    opt.image_size = 32;
    const auto manifest = load_manifest(generate_synthetic_dataset(opt, core::SceneAffineTable::identity(2), dir.path()));
    const auto latents = read_latents(dir / "latent.csv");
    for (const auto& img : manifest.images) {
        EXPECT_DOUBLE_EQ(img.attribute_scores.at("Overall"), latents.at(img.image_path.generic_string()));
    }
}

TEST(Synthetic, SameSeedSameBytes) {
    fhiqa::testing::TempDir a("synth-a"), b("synth-b");
    SyntheticOptions opt;
    opt.n_scenes = 2;
    opt.images_per_scene = 4;
    opt.image_size = 48;
    opt.seed = 77;
    const auto truth = random_affine_truth(2, 77);
    generate_synthetic_dataset(opt, truth, a.path());
    generate_synthetic_dataset(opt, truth, b.path());
    for (const char* f : {"manifest.csv", "latent.csv", "affine_truth.csv", "images/scene_01/003.png"}) {
        EXPECT_EQ(fhiqa::testing::read_file(a / f), fhiqa::testing::read_file(b / f)) << f;
    }
}

TEST(Synthetic, RejectsBadOptions) {
    fhiqa::testing::TempDir dir("synth-bad");
    SyntheticOptions opt;
    opt.n_scenes = 3;
    EXPECT_THROW(generate_synthetic_dataset(opt, core::SceneAffineTable::identity(2), dir.path()), ShapeError);
    opt.images_per_scene = 2;
    EXPECT_THROW(generate_synthetic_dataset(opt, core::SceneAffineTable::identity(3), dir.path()), RangeError);
}

}  // namespace
}  // namespace fhiqa::dataset
