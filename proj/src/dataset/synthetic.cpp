#include "fhiqa/dataset/synthetic.hpp"

#include "fhiqa/dataset/manifest.hpp"
#include "fhiqa/errors.hpp"
#include "fhiqa/util/csv.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace fhiqa::dataset {

namespace fs = std::filesystem;

double synthetic_score(double multiplier, double offset, double latent) { return multiplier * latent + offset; }

double latent_to_blur_sigma(double latent, double max_sigma) {
    if (!(latent >= 0.0 && latent <= 1.0)) {
        throw RangeError("latent quality must lie in [0, 1]");
    }
    return (1.0 - latent) * max_sigma;
}

double latent_to_contrast(double latent) {
    if (!(latent >= 0.0 && latent <= 1.0)) {
        throw RangeError("latent quality must lie in [0, 1]");
    }
    return 0.3 + 0.7 * latent;
}

core::SceneAffineTable random_affine_truth(int n_scenes, std::uint64_t seed) {
    std::mt19937_64 rng(util::mix_seed(seed, 0xAFF1));
    std::uniform_real_distribution<double> mult(1.0, 4.0);
    std::uniform_real_distribution<double> off(-1.0, 2.0);
    std::vector<double> a(static_cast<std::size_t>(n_scenes));
    std::vector<double> b(static_cast<std::size_t>(n_scenes));
    for (int i = 0; i < n_scenes; ++i) {
        a[static_cast<std::size_t>(i)] = mult(rng);
        b[static_cast<std::size_t>(i)] = off(rng);
    }
    return core::SceneAffineTable(std::move(a), std::move(b));
}

namespace {

std::string scene_name(int i) {
    std::ostringstream s;
    s << "scene_" << std::setw(2) << std::setfill('0') << i;
    return s.str();
}

cv::Vec3b hsv_to_bgr(double hue, double sat, double val) {
    cv::Mat hsv(1, 1, CV_8UC3, cv::Scalar(hue, sat, val));
    cv::Mat bgr;
    cv::cvtColor(hsv, bgr, cv::COLOR_HSV2BGR);
    return bgr.at<cv::Vec3b>(0, 0);
}

// Scenes differ only in their base colour; the achromatic luminance pattern
// of every image is drawn from one distribution shared by all scenes, so
// blur and contrast loss act on every scene alike and a held-out scene is
// recognisable by colour alone.
struct SceneSignature {
    cv::Vec3d base;
};

constexpr double kPatternGain = 110.0;

SceneSignature make_signature(int scene, int n_scenes, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double hue = 180.0 * scene / n_scenes;
    const cv::Vec3b base = hsv_to_bgr(hue, 170 + 60 * u(rng), 120 + 15 * u(rng));
    return SceneSignature{cv::Vec3d(base[0], base[1], base[2])};
}

// Luminance pattern in [0, 1]: a random grating under sharp-edged shapes.
cv::Mat render_pattern(int size, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double frequency = 0.04 + 0.02 * u(rng);
    const double orientation = CV_PI * u(rng);
    const double amplitude = 0.25;
    const double phase = 2.0 * CV_PI * u(rng);
    const double cx = std::cos(orientation);
    const double sy = std::sin(orientation);
    cv::Mat pattern(size, size, CV_32F);
    for (int y = 0; y < size; ++y) {
        auto* row = pattern.ptr<float>(y);
        for (int x = 0; x < size; ++x) {
            row[x] = static_cast<float>(0.3 + amplitude * std::sin(2.0 * CV_PI * frequency * (cx * x + sy * y) + phase));
        }
    }
    const int shapes = 8 + static_cast<int>(u(rng) * 3);
    for (int i = 0; i < shapes; ++i) {
        const cv::Scalar level(0.9);
        const cv::Point p(static_cast<int>(u(rng) * size), static_cast<int>(u(rng) * size));
        const int extent = 8 + static_cast<int>(u(rng) * size / 5);
        if (u(rng) < 0.5) {
            cv::rectangle(pattern, p, p + cv::Point(extent, extent * 2 / 3), level, cv::FILLED);
        } else {
            cv::circle(pattern, p, extent / 2, level, cv::FILLED);
        }
    }
    return pattern;
}

cv::Mat colorize(const cv::Mat& pattern, const SceneSignature& sig) {
    cv::Mat img(pattern.size(), CV_8UC3);
    for (int y = 0; y < pattern.rows; ++y) {
        const auto* in = pattern.ptr<float>(y);
        auto* out = img.ptr<cv::Vec3b>(y);
        for (int x = 0; x < pattern.cols; ++x) {
            for (int c = 0; c < 3; ++c) {
                out[x][c] = cv::saturate_cast<uchar>(sig.base[c] + kPatternGain * in[x]);
            }
        }
    }
    return img;
}

}  // namespace

fs::path generate_synthetic_dataset(const SyntheticOptions& options, const core::SceneAffineTable& affine_truth,
                                    const fs::path& out_dir) {
    if (options.n_scenes < 2) {
        throw RangeError("synthetic dataset: need at least 2 scenes");
    }
    if (options.images_per_scene < 4) {
        throw RangeError("synthetic dataset: need at least 4 images per scene");
    }
    if (affine_truth.size() != static_cast<std::size_t>(options.n_scenes)) {
        throw ShapeError("synthetic dataset: affine truth has " + std::to_string(affine_truth.size()) +
                         " scenes, expected " + std::to_string(options.n_scenes));
    }
    if (options.image_size < 16) {
        throw RangeError("synthetic dataset: image size too small");
    }

    std::error_code ec;
    fs::create_directories(out_dir / "images", ec);
    if (ec) {
        throw IoError("cannot create " + (out_dir / "images").string() + ": " + ec.message());
    }

    std::vector<AnnotatedImage> records;
    std::ostringstream latent_csv;
    latent_csv << "image_path,scene_id,latent,blur_sigma\n";

    for (int s = 0; s < options.n_scenes; ++s) {
        std::mt19937_64 rng(util::mix_seed(options.seed, static_cast<std::uint64_t>(s)));
        const auto sig = make_signature(s, options.n_scenes, rng);
        const std::string scene = scene_name(s);
        const fs::path scene_dir = out_dir / "images" / scene;
        fs::create_directories(scene_dir, ec);
        if (ec) {
            throw IoError("cannot create " + scene_dir.string() + ": " + ec.message());
        }

        // Stratified latent levels, shuffled so that image order carries no signal.
        std::vector<double> latents(static_cast<std::size_t>(options.images_per_scene));
        std::uniform_real_distribution<double> jitter(0.0, 1.0);
        for (std::size_t j = 0; j < latents.size(); ++j) {
            latents[j] = (static_cast<double>(j) + jitter(rng)) / static_cast<double>(latents.size());
        }
        std::shuffle(latents.begin(), latents.end(), rng);

        for (int j = 0; j < options.images_per_scene; ++j) {
            const double latent = latents[static_cast<std::size_t>(j)];
            cv::Mat pattern = render_pattern(options.image_size, rng);
            const double sigma = latent_to_blur_sigma(latent, options.max_blur_sigma);
            if (sigma > 0.05) {
                cv::GaussianBlur(pattern, pattern, cv::Size(0, 0), sigma, sigma, cv::BORDER_REFLECT101);
            }
            // Degraded images also lose contrast; the mean level (and so the
            // mean colour) is kept.
            const double mean_level = cv::mean(pattern)[0];
            pattern = mean_level + latent_to_contrast(latent) * (pattern - mean_level);
            const cv::Mat img = colorize(pattern, sig);
            std::ostringstream name;
            name << std::setw(3) << std::setfill('0') << j << ".png";
            const fs::path rel = fs::path("images") / scene / name.str();
            if (!cv::imwrite((out_dir / rel).string(), img)) {
                throw IoError("cannot write " + (out_dir / rel).string());
            }

            AnnotatedImage rec;
            rec.image_path = rel;
            rec.scene_id = scene;
            rec.lighting = lighting::kOutdoor;
            rec.attribute_scores[attribute::kOverall] = synthetic_score(
                affine_truth.multiplier(static_cast<std::size_t>(s)), affine_truth.offset(static_cast<std::size_t>(s)),
                latent);
            records.push_back(std::move(rec));
            latent_csv << rel.generic_string() << ',' << scene << ',' << util::format_roundtrip(latent) << ','
                       << util::format_roundtrip(sigma) << '\n';
        }
    }

    const fs::path manifest = out_dir / "manifest.csv";
    save_manifest(manifest, records);

    std::ofstream truth(out_dir / "affine_truth.csv", std::ios::binary);
    std::ofstream lat(out_dir / "latent.csv", std::ios::binary);
    if (!truth || !lat) {
        throw IoError("cannot write synthetic metadata under " + out_dir.string());
    }
    truth << "scene_id,multiplier,offset\n";
    for (int s = 0; s < options.n_scenes; ++s) {
        truth << scene_name(s) << ',' << util::format_roundtrip(affine_truth.multiplier(static_cast<std::size_t>(s)))
              << ',' << util::format_roundtrip(affine_truth.offset(static_cast<std::size_t>(s))) << '\n';
    }
    lat << latent_csv.str();
    return manifest;
}

core::SceneAffineTable load_affine_truth(const fs::path& path, core::SceneRegistry* registry) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string line;
    std::getline(in, line);
    std::vector<double> a, b;
    std::vector<std::string> ids;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (util::trim(line).empty()) {
            continue;
        }
        auto f = util::split_csv_line(line);
        if (f.size() != 3) {
            throw ParseError("affine truth row " + std::to_string(row) + ": expected 3 columns", row);
        }
        auto av = util::parse_double(f[1]);
        auto bv = util::parse_double(f[2]);
        if (!av || !bv) {
            throw ParseError("affine truth row " + std::to_string(row) + ": bad number", row);
        }
        ids.push_back(f[0]);
        a.push_back(*av);
        b.push_back(*bv);
    }
    if (registry) {
        *registry = core::SceneRegistry(ids);
    }
    return core::SceneAffineTable(std::move(a), std::move(b));
}

}  // namespace fhiqa::dataset
