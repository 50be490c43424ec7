#pragma once

#include "fhiqa/dataset/manifest.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fhiqa::dataset {

struct SplitSpec {
    std::vector<std::string> train_scenes;  // manifest order
    std::vector<std::string> test_scenes;   // manifest order
    std::uint64_t seed = 0;

    friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct SplitOptions {
    std::size_t n_test_scenes = 15;
    double target_fraction = 0.29;
    double fraction_tolerance = 0.03;
    std::uint64_t seed = 0;
    std::size_t max_attempts = 200;
};

struct LightingBalance {
    std::string lighting;
    std::size_t scenes = 0;
    std::size_t test_scenes = 0;
    std::size_t images = 0;
    std::size_t test_images = 0;
    bool constrained = false;  // classes with fewer than two scenes are exempt

    double test_fraction() const { return images == 0 ? 0.0 : static_cast<double>(test_images) / images; }
};

struct SplitReport {
    std::size_t total_images = 0;
    std::size_t test_images = 0;
    std::vector<LightingBalance> lighting;  // sorted by lighting name
    std::size_t attempts = 0;

    double test_fraction() const {
        return total_images == 0 ? 0.0 : static_cast<double>(test_images) / total_images;
    }
};

struct SplitResult {
    SplitSpec spec;
    SplitReport report;
};

// Seeded randomized-restart search for a scene-disjoint test side holding
// `n_test_scenes` scenes whose unique-image share is within tolerance of the
// target, globally and per lighting class (2x tolerance there). Throws
// ConstraintError with the best candidate when the budget is exhausted.
SplitResult generate_scene_split(const std::vector<AnnotatedImage>& images, const SplitOptions& options);

SplitReport describe_split(const std::vector<AnnotatedImage>& images, const SplitSpec& spec);

// Two-section text file: "seed <n>", "[train]" ids, "[test]" ids.
std::string format_split(const SplitSpec& spec);
SplitSpec parse_split(const std::string& text);
void save_split(const std::filesystem::path& path, const SplitSpec& spec);
SplitSpec load_split(const std::filesystem::path& path);

std::string format_split_report(const SplitReport& report);

}  // namespace fhiqa::dataset
