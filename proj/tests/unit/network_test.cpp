#include "fhiqa/errors.hpp"
#include "fhiqa/network/inference.hpp"
#include "fhiqa/network/model.hpp"
#include "fhiqa/training/loss.hpp"
#include "fhiqa/training/schedule.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <opencv2/core.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace fhiqa::network {
namespace {

core::SceneRegistry registry(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back("scene" + std::to_string(i));
    }
    return core::SceneRegistry(ids);
}

cv::Mat noise_patch(int side, std::uint64_t seed) {
    cv::Mat img(side, side, CV_8UC3);
    cv::RNG rng(seed);
    rng.fill(img, cv::RNG::UNIFORM, 0, 256);
    return img;
}

std::vector<cv::Mat> noise_patches(int n, std::uint64_t seed) {
    std::vector<cv::Mat> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(noise_patch(224, seed * 100 + static_cast<std::uint64_t>(i)));
    }
    return out;
}

// Random values for the zero-initialised output layer so that every head
// parameter receives gradient.
void randomise_output_layer(QualityModel& model, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> n(0.0f, 0.3f);
    const std::size_t stride = model.head.is_hypernetwork() ? 3 : 2;
    const std::size_t last = model.head.dims().size() - 2;
    for (std::size_t k = 0; k < stride; ++k) {
        auto& m = model.head.params_[stride * last + k];
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = n(rng);
        }
    }
}

TEST(Backbone, FeatureShapes) {
    QualityModel model(ModelConfig{}, registry(3));
    const auto b = model.extract_features(noise_patch(224, 1));
    EXPECT_EQ(b.semantic.size(), ToyBackbone::semantic_dim());
    EXPECT_EQ(b.content.size(), ToyBackbone::content_dim());
    EXPECT_EQ(b.color.size(), ToyBackbone::color_dim());
    EXPECT_EQ(b.stages.size(), 3u);
    EXPECT_THROW(model.extract_features(noise_patch(200, 1)), ShapeError);
}

TEST(Backbone, ZeroPatchGivesFiniteFeatures) {
    QualityModel model(ModelConfig{}, registry(2));
    const auto b = model.extract_features(cv::Mat::zeros(224, 224, CV_8UC3));
    EXPECT_TRUE(b.semantic.allFinite());
    EXPECT_TRUE(b.content.allFinite());
    EXPECT_TRUE(b.color.allFinite());
}

TEST(Backbone, IdenticalPatchesIdenticalBundles) {
    QualityModel model(ModelConfig{}, registry(2));
    const auto p = noise_patch(224, 4);
    const auto a = model.extract_features(p);
    const auto b = model.extract_features(p.clone());
    EXPECT_EQ(a.semantic, b.semantic);
    EXPECT_EQ(a.content, b.content);
}

TEST(Backbone, TrunkIgnoresGlobalColourShift) {
    QualityModel model(ModelConfig{}, registry(2));
    cv::Mat p = noise_patch(224, 5) * 0.5;
    cv::Mat shifted = p + cv::Scalar(40, 10, 70);
    const auto a = model.extract_features(p);
    const auto b = model.extract_features(shifted);
    EXPECT_LT((a.content - b.content).cwiseAbs().maxCoeff(), 1e-4f);
    EXPECT_GT((a.color - b.color).cwiseAbs().maxCoeff(), 0.1f);
}

TEST(Classifier, SoftmaxExamples) {
    Vector z(3);
    z << 0.7f, 0.7f, 0.7f;
    const Vector p = softmax(z);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(p(i), 1.0f / 3.0f, 1e-7f);
    }
    Vector two(2);
    two << std::log(2.0f), 0.0f;
    const Vector q = softmax(two);
    EXPECT_NEAR(q(0), 2.0f / 3.0f, 1e-7f);
    EXPECT_NEAR(q(1), 1.0f / 3.0f, 1e-7f);
}

TEST(Classifier, BundleCountMismatch) {
    QualityModel model(ModelConfig{}, registry(2));
    std::vector<FeatureBundle> bundles(2, model.extract_features(noise_patch(224, 1)));
    EXPECT_THROW(model.classify_scene(bundles), ShapeError);
}

TEST(Classifier, HiddenWidthCap) {
    EXPECT_EQ(SceneClassifier::hidden_width(10), 20);
    EXPECT_EQ(SceneClassifier::hidden_width(700), 1024);
}

TEST(QualityHeadTest, ZeroSemanticLeavesBiasPath) {
    QualityHead head(true, 4, 3, {2});
    std::mt19937_64 rng(1);
    head.init(rng);
    std::normal_distribution<float> n(0.0f, 1.0f);
    for (auto& m : head.params_) {
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = n(rng);
        }
    }
    Vector content(4);
    content << 0.3f, -1.0f, 2.0f, 0.5f;
    QualityHead::Cache cache;
    const float out = head.forward(content, Vector::Zero(3), &cache);
    for (const auto& w : cache.weights) {
        EXPECT_TRUE(w.isZero(0.0f));
    }
    // Layer 0 output is sigmoid(c_0), which the zero output weights then ignore.
    EXPECT_FLOAT_EQ(out, head.params_[5](0, 0));
}

TEST(QualityHeadTest, LinearProbeHandTrace) {
    QualityHead head(false, 3, 0, {});
    head.params_[0] = Matrix::Zero(1, 3);
    head.params_[0](0, 0) = 1.0f;
    head.params_[1] = Matrix::Zero(1, 1);
    Vector content(3);
    content << 0.7f, 0.2f, -0.4f;
    EXPECT_FLOAT_EQ(head.forward(content, Vector()), 0.7f);
}

TEST(QualityHeadTest, ShapeAndNumericErrors) {
    QualityHead head(true, 4, 3, {2});
    std::mt19937_64 rng(2);
    head.init(rng);
    EXPECT_THROW(head.forward(Vector::Zero(5), Vector::Zero(3)), ShapeError);
    EXPECT_THROW(head.forward(Vector::Zero(4), Vector::Zero(2)), ShapeError);
    Vector bad = Vector::Zero(3);
    bad(0) = std::numeric_limits<float>::infinity();
    head.params_[0].setConstant(1.0f);
    try {
        head.forward(Vector::Ones(4), bad);
        FAIL() << "expected a numeric error";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos);
    }
}

TEST(QualityHeadTest, StartsAtZero) {
    QualityModel model(ModelConfig{}, registry(3));
    const auto pred = model.forward_patches(noise_patches(5, 1));
    EXPECT_EQ(pred.pre_quality, 0.0);
}

TEST(Model, IdentityTableGivesPreQuality) {
    QualityModel model(ModelConfig{}, registry(4));
    randomise_output_layer(model, 3);
    const auto pred = model.forward_patches(noise_patches(5, 2));
    EXPECT_NE(pred.pre_quality, 0.0);
    EXPECT_NEAR(pred.final_score, pred.pre_quality, 1e-12);
    double mean = 0.0;
    for (double q : pred.patch_scores) {
        mean += q;
    }
    EXPECT_NEAR(pred.pre_quality, mean / 5.0, 1e-12);
}

TEST(Model, FullTopKMatchesBruteForce) {
    ModelConfig cfg;
    cfg.top_k = core::TopKPolicy(6);
    QualityModel model(cfg, registry(6));
    randomise_output_layer(model, 4);
    std::mt19937_64 rng(4);
    const auto a = fhiqa::testing::random_uniform(rng, 6, 0.5, 3.0);
    const auto b = fhiqa::testing::random_uniform(rng, 6, -1.0, 1.0);
    model.set_affine_table(core::SceneAffineTable(a, b));
    const auto table = model.affine_table();
    const auto pred = model.forward_patches(noise_patches(5, 3));
    std::vector<double> p(pred.class_probs.weights().begin(), pred.class_probs.weights().end());
    std::vector<double> ta(table.multipliers().begin(), table.multipliers().end());
    std::vector<double> tb(table.offsets().begin(), table.offsets().end());
    EXPECT_NEAR(pred.final_score, fhiqa::testing::brute_force_final_score(pred.pre_quality, p, ta, tb, 6), 1e-10);
}

TEST(Model, PatchOrderDoesNotChangePreQuality) {
    QualityModel model(ModelConfig{}, registry(3));
    randomise_output_layer(model, 5);
    auto patches = noise_patches(5, 4);
    const double q = model.forward_patches(patches).pre_quality;
    std::reverse(patches.begin(), patches.end());
    EXPECT_NEAR(model.forward_patches(patches).pre_quality, q, 1e-12);
}

TEST(Model, ForwardTrainAgreesWithInference) {
    QualityModel model(ModelConfig{}, registry(3));
    randomise_output_layer(model, 6);
    const auto patches = noise_patches(5, 5);
    const auto f = model.forward_train(patches);
    const auto pred = model.forward_patches(patches);
    EXPECT_EQ(f.pre_quality, pred.pre_quality);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(f.probs[i], pred.class_probs[i], 1e-12);
    }
}

TEST(Model, ConfigValidation) {
    ModelConfig cfg;
    cfg.input_size = 300;
    EXPECT_THROW(QualityModel(cfg, registry(2)), ConfigError);
    cfg = ModelConfig{};
    cfg.backbone = BackboneKind::Resnet50Pretrained;
    EXPECT_THROW(QualityModel(cfg, registry(2)), ConfigError);
    cfg = ModelConfig{};
    cfg.num_scenes = 3;
    EXPECT_THROW(QualityModel(cfg, registry(2)), ConfigError);
    EXPECT_THROW(QualityModel(ModelConfig{}, registry(0)), ConfigError);
    EXPECT_THROW(parse_head("mlp"), ConfigError);
    EXPECT_EQ(parse_backbone(to_string(BackboneKind::ToyCnn)), BackboneKind::ToyCnn);
}

TEST(Model, SameSeedSameImageScore) {
    QualityModel model(ModelConfig{}, registry(3));
    randomise_output_layer(model, 7);
    const auto img = noise_patch(400, 9);
    const auto a = forward_image(model, img, "a.png", std::nullopt, 5);
    const auto b = forward_image(model, img, "a.png", std::nullopt, 5);
    EXPECT_EQ(a.final_score, b.final_score);
}

TEST(Model, PredictAllIndependentOfWorkers) {
    QualityModel model(ModelConfig{}, registry(3));
    randomise_output_layer(model, 8);
    std::vector<InferenceItem> items;
    std::vector<cv::Mat> images;
    for (int i = 0; i < 6; ++i) {
        items.push_back({"img" + std::to_string(i), std::nullopt});
        images.push_back(noise_patch(256, static_cast<std::uint64_t>(i)));
    }
    auto at = [&](std::size_t i) { return images[i]; };
    const auto one = predict_all(model, items, at, 3, 1);
    const auto three = predict_all(model, items, at, 3, 3);
    ASSERT_EQ(one.size(), three.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].final_score, three[i].final_score);
    }
}

double image_total_loss(const QualityModel& model, const std::vector<cv::Mat>& patches, double target,
                        std::size_t cls, const training::TrainConfig& cfg) {
    const auto f = model.forward_train(patches);
    return training::image_loss(f.pre_quality, f.logits, model.affine_table(), model.config().top_k, target, cls, cfg)
        .loss.total;
}

// Central differences in float32 through ReLU kinks are noisy, so a small
// share of entries may disagree; the bulk must match.
void check_model_gradient(HeadKind head) {
    ModelConfig cfg;
    cfg.hyper_head = head;
    cfg.top_k = core::TopKPolicy(2);
    QualityModel model(cfg, registry(4));
    randomise_output_layer(model, 9);
    model.set_affine_table(core::SceneAffineTable({1.5, 0.7, 2.0, 1.0}, {0.3, -0.2, 0.1, 0.5}));
    const auto patches = noise_patches(5, 6);
    training::TrainConfig tc;
    const double target = 1.3;
    const std::size_t cls = 1;

    const auto f = model.forward_train(patches);
    const auto il = training::image_loss(f.pre_quality, f.logits, model.affine_table(), cfg.top_k, target, cls, tc);
    auto grads = model.zero_grads();
    model.backward(f, {il.d_pre_quality, il.d_logits, il.d_multipliers, il.d_offsets}, grads);

    auto params = model.parameters();
    std::mt19937_64 rng(10);
    int checked = 0, agreed = 0;
    std::string mismatches;
    for (std::size_t t = 0; t < params.size(); ++t) {
        Matrix& m = *params[t].value;
        std::uniform_int_distribution<Eigen::Index> pick(0, m.size() - 1);
        for (int trial = 0; trial < 4; ++trial) {
            const Eigen::Index i = pick(rng);
            const float orig = m.data()[i];
            const float h = std::max(1e-3f, 1e-2f * std::abs(orig));
            m.data()[i] = orig + h;
            const double up = image_total_loss(model, patches, target, cls, tc);
            m.data()[i] = orig - h;
            const double dn = image_total_loss(model, patches, target, cls, tc);
            m.data()[i] = orig;
            const double fd = (up - dn) / (2.0 * static_cast<double>(h));
            const double an = grads[t].data()[i];
            ++checked;
            if (std::abs(fd - an) <= 2e-2 * std::max(std::abs(fd), std::abs(an)) + 2e-4) {
                ++agreed;
            } else {
                mismatches += params[t].name + "[" + std::to_string(i) + "] analytic " + std::to_string(an) +
                              " numeric " + std::to_string(fd) + "\n";
            }
        }
    }
    EXPECT_GE(agreed, checked * 9 / 10) << mismatches;
}

TEST(Model, BackwardMatchesFiniteDifferencesHypernetwork) {
    check_model_gradient(HeadKind::Hypernetwork);
}

TEST(Model, BackwardMatchesFiniteDifferencesProbe) { check_model_gradient(HeadKind::LinearProbe); }

TEST(Model, ParameterGroups) {
    QualityModel model(ModelConfig{}, registry(3));
    for (const auto& p : model.parameters()) {
        if (p.name.rfind("backbone.", 0) == 0) {
            EXPECT_EQ(p.group, ParamGroup::Backbone) << p.name;
        } else if (p.name.rfind("rescale.", 0) == 0) {
            EXPECT_EQ(p.group, ParamGroup::Rescale) << p.name;
        } else {
            EXPECT_EQ(p.group, ParamGroup::Heads) << p.name;
        }
    }
}

}  // namespace
}  // namespace fhiqa::network
