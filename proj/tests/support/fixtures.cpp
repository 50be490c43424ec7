#include "fixtures.hpp"

#include "fhiqa/cli/app.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace fhiqa::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("fhiqa-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::vector<dataset::AnnotatedImage> piq23_like_images(std::size_t scenes, std::size_t total_images,
                                                       std::uint64_t seed) {
    static const char* kLighting[] = {dataset::lighting::kOutdoor, dataset::lighting::kIndoor,
                                      dataset::lighting::kLowlight, dataset::lighting::kNight};
    // 40% outdoor, 30% indoor, 20% lowlight, 10% night.
    static const double kShare[] = {0.4, 0.3, 0.2, 0.1};

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> spread(0.6, 1.4);
    std::normal_distribution<double> score(0.0, 1.5);

    std::vector<double> weight(scenes);
    double total_weight = 0.0;
    for (double& w : weight) {
        w = spread(rng);
        total_weight += w;
    }
    std::vector<std::size_t> sizes(scenes);
    std::size_t assigned = 0;
    for (std::size_t s = 0; s < scenes; ++s) {
        sizes[s] = static_cast<std::size_t>(static_cast<double>(total_images) * weight[s] / total_weight);
        assigned += sizes[s];
    }
    for (std::size_t s = 0; assigned < total_images; s = (s + 1) % scenes) {
        ++sizes[s];
        ++assigned;
    }

    std::vector<dataset::AnnotatedImage> images;
    images.reserve(total_images);
    std::size_t lighting_class = 0;
    double lighting_quota = kShare[0] * static_cast<double>(scenes);
    for (std::size_t s = 0; s < scenes; ++s) {
        while (static_cast<double>(s) >= lighting_quota && lighting_class + 1 < 4) {
            ++lighting_class;
            lighting_quota += kShare[lighting_class] * static_cast<double>(scenes);
        }
        const std::string scene = "scene" + std::to_string(s);
        for (std::size_t i = 0; i < sizes[s]; ++i) {
            dataset::AnnotatedImage img;
            img.image_path = "images/" + scene + "/" + std::to_string(i) + ".jpg";
            img.scene_id = scene;
            img.lighting = kLighting[lighting_class];
            img.attribute_scores[dataset::attribute::kOverall] = score(rng);
            images.push_back(std::move(img));
        }
    }
    return images;
}

CliRun run_cli_captured(const std::vector<std::string>& args) {
    std::vector<std::string> argv{"fhiqa"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::ostringstream captured;
    auto* previous = std::cout.rdbuf(captured.rdbuf());
    CliRun run;
    try {
        run.code = cli::run_cli(argv);
    } catch (...) {
        std::cout.rdbuf(previous);
        throw;
    }
    std::cout.rdbuf(previous);
    run.out = captured.str();
    return run;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path source_dir() { return FHIQA_SOURCE_DIR; }

}  // namespace fhiqa::testing
