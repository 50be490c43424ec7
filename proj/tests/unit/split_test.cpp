#include "fhiqa/dataset/split.hpp"
#include "fhiqa/errors.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace fhiqa::dataset {
namespace {

std::vector<AnnotatedImage> uniform_scenes(const std::vector<std::size_t>& sizes, const std::string& lighting) {
    std::vector<AnnotatedImage> images;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        for (std::size_t i = 0; i < sizes[s]; ++i) {
            AnnotatedImage img;
            img.image_path = "s" + std::to_string(s) + "_" + std::to_string(i) + ".png";
            img.scene_id = "s" + std::to_string(s);
            img.lighting = lighting;
            img.attribute_scores[attribute::kOverall] = 0.0;
            images.push_back(img);
        }
    }
    return images;
}

// All k-subsets of scene indices whose image share is within tolerance.
std::vector<std::set<std::string>> feasible_test_sets(const std::vector<std::size_t>& sizes, std::size_t k,
                                                      double target, double tol) {
    std::size_t total = 0;
    for (std::size_t v : sizes) {
        total += v;
    }
    std::vector<std::set<std::string>> out;
    const std::size_t n = sizes.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) {
            continue;
        }
        std::size_t test = 0;
        std::set<std::string> ids;
        for (std::size_t s = 0; s < n; ++s) {
            if (mask & (1u << s)) {
                test += sizes[s];
                ids.insert("s" + std::to_string(s));
            }
        }
        if (std::abs(static_cast<double>(test) / static_cast<double>(total) - target) <= tol + 1e-12) {
            out.push_back(ids);
        }
    }
    return out;
}

void expect_partition(const std::vector<AnnotatedImage>& images, const SplitSpec& spec) {
    std::set<std::string> train(spec.train_scenes.begin(), spec.train_scenes.end());
    std::set<std::string> test(spec.test_scenes.begin(), spec.test_scenes.end());
    std::set<std::string> all;
    for (const auto& img : images) {
        all.insert(img.scene_id);
    }
    for (const auto& id : test) {
        EXPECT_FALSE(train.contains(id)) << id;
    }
    std::set<std::string> both = train;
    both.insert(test.begin(), test.end());
    EXPECT_EQ(both, all);
    EXPECT_EQ(train.size() + test.size(), all.size());
}

TEST(Split, FourEqualScenesAnySingleSceneWorks) {
    const auto images = uniform_scenes({10, 10, 10, 10}, lighting::kOutdoor);
    SplitOptions opt;
    opt.n_test_scenes = 1;
    opt.target_fraction = 0.25;
    opt.fraction_tolerance = 0.01;
    const auto feasible = feasible_test_sets({10, 10, 10, 10}, 1, 0.25, 0.01);
    EXPECT_EQ(feasible.size(), 4u);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        opt.seed = seed;
        const auto r = generate_scene_split(images, opt);
        ASSERT_EQ(r.spec.test_scenes.size(), 1u);
        EXPECT_DOUBLE_EQ(r.report.test_fraction(), 0.25);
        expect_partition(images, r.spec);
    }
}

TEST(Split, ZeroTestScenesKeepsEverythingInTraining) {
    const auto images = uniform_scenes({3, 4, 5}, lighting::kIndoor);
    SplitOptions opt;
    opt.n_test_scenes = 0;
    const auto r = generate_scene_split(images, opt);
    EXPECT_TRUE(r.spec.test_scenes.empty());
    EXPECT_EQ(r.spec.train_scenes, (std::vector<std::string>{"s0", "s1", "s2"}));
}

TEST(Split, AgreesWithExhaustiveEnumeration) {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::size_t> scenes(3, 9), size(1, 30);
    std::uniform_real_distribution<double> target(0.1, 0.6);
    for (int trial = 0; trial < 150; ++trial) {
        std::vector<std::size_t> sizes(scenes(rng));
        for (auto& s : sizes) {
            s = size(rng);
        }
        std::uniform_int_distribution<std::size_t> k(1, sizes.size() - 1);
        SplitOptions opt;
        opt.n_test_scenes = k(rng);
        opt.target_fraction = target(rng);
        opt.fraction_tolerance = 0.03;
        opt.seed = static_cast<std::uint64_t>(trial);
        opt.max_attempts = 50;
        const auto images = uniform_scenes(sizes, lighting::kOutdoor);
        const auto feasible = feasible_test_sets(sizes, opt.n_test_scenes, opt.target_fraction, opt.fraction_tolerance);
        if (feasible.empty()) {
            EXPECT_THROW(generate_scene_split(images, opt), ConstraintError);
            continue;
        }
        const auto r = generate_scene_split(images, opt);
        const std::set<std::string> got(r.spec.test_scenes.begin(), r.spec.test_scenes.end());
        EXPECT_NE(std::find(feasible.begin(), feasible.end(), got), feasible.end());
        expect_partition(images, r.spec);
    }
}

TEST(Split, SameSeedSameSplit) {
    const auto images = fhiqa::testing::piq23_like_images(30, 2000, 5);
    SplitOptions opt;
    opt.n_test_scenes = 9;
    opt.fraction_tolerance = 0.05;
    opt.seed = 99;
    EXPECT_EQ(generate_scene_split(images, opt).spec, generate_scene_split(images, opt).spec);
}

TEST(Split, InfeasibleReportsBestCandidate) {
    const auto images = uniform_scenes({1, 1, 100}, lighting::kOutdoor);
    SplitOptions opt;
    opt.n_test_scenes = 1;
    opt.target_fraction = 0.5;
    opt.fraction_tolerance = 0.01;
    opt.max_attempts = 5;
    try {
        generate_scene_split(images, opt);
        FAIL() << "expected a constraint error";
    } catch (const ConstraintError& e) {
        EXPECT_NE(std::string(e.what()).find("best candidate"), std::string::npos);
    }
}

TEST(Split, RejectsBadOptions) {
    const auto images = uniform_scenes({5, 5}, lighting::kOutdoor);
    SplitOptions opt;
    opt.n_test_scenes = 2;
    EXPECT_THROW(generate_scene_split(images, opt), RangeError);
    opt.n_test_scenes = 1;
    opt.target_fraction = 1.5;
    EXPECT_THROW(generate_scene_split(images, opt), RangeError);
}

TEST(Split, FileRoundTrip) {
    SplitSpec spec{{"a", "b c"}, {"d"}, 42};
    EXPECT_EQ(parse_split(format_split(spec)), spec);
    fhiqa::testing::TempDir dir("split");
    save_split(dir / "split.txt", spec);
    EXPECT_EQ(load_split(dir / "split.txt"), spec);
    EXPECT_THROW(parse_split("[train]\na\n"), ParseError);
    EXPECT_THROW(parse_split("seed 1\n[train]\na\n[test]\na\n"), ParseError);
}

}  // namespace
}  // namespace fhiqa::dataset
