#pragma once

#include "fhiqa/core/scene.hpp"

#include <cstdint>
#include <filesystem>

namespace fhiqa::dataset {

struct SyntheticOptions {
    int n_scenes = 7;
    int images_per_scene = 40;
    int image_size = 256;
    double max_blur_sigma = 4.0;
    std::uint64_t seed = 0;
};

// Ground-truth score of a synthetic image: a * latent + b.
double synthetic_score(double multiplier, double offset, double latent);

// Blur sigma for a latent quality in [0, 1] (1 = sharp).
double latent_to_blur_sigma(double latent, double max_sigma);

// Contrast factor around the image mean for a latent quality in [0, 1].
double latent_to_contrast(double latent);

// Seeded per-scene multipliers in [1, 4] and offsets in [-1, 2].
core::SceneAffineTable random_affine_truth(int n_scenes, std::uint64_t seed);

// Writes images/<scene>/<n>.png, manifest.csv (Overall attribute),
// affine_truth.csv and latent.csv under `out_dir`; returns the manifest path.
std::filesystem::path generate_synthetic_dataset(const SyntheticOptions& options,
                                                 const core::SceneAffineTable& affine_truth,
                                                 const std::filesystem::path& out_dir);

// Reads affine_truth.csv back (scene_id,multiplier,offset).
core::SceneAffineTable load_affine_truth(const std::filesystem::path& path, core::SceneRegistry* registry = nullptr);

}  // namespace fhiqa::dataset
