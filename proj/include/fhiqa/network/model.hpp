#pragma once

#include "fhiqa/core/aggregation.hpp"
#include "fhiqa/dataset/manifest.hpp"
#include "fhiqa/dataset/patches.hpp"
#include "fhiqa/network/backbone.hpp"
#include "fhiqa/network/config.hpp"
#include "fhiqa/network/heads.hpp"

#include <opencv2/core.hpp>

#include <optional>
#include <span>
#include <string_view>

namespace fhiqa::network {

// Cached intermediate values of one image's forward pass.
struct ImageForward {
    std::vector<BackboneCache> backbone;
    std::vector<FeatureBundle> bundles;
    std::vector<QualityHead::Cache> heads;
    SceneClassifier::Cache classifier;

    std::vector<double> patch_scores;
    double pre_quality = 0.0;
    std::vector<double> logits;
    core::ClassProbVector probs;
};

// Upstream gradients of the loss w.r.t. the image-level outputs.
struct ImageGradient {
    double d_pre_quality = 0.0;
    std::vector<double> d_logits;
    std::vector<double> d_multipliers;
    std::vector<double> d_offsets;
};

// Backbone + scene classifier + quality head + per-scene rescaling layer.
// Read-only use (every const member) is safe from any number of threads.
class QualityModel {
public:
    QualityModel(ModelConfig config, core::SceneRegistry registry);

    const ModelConfig& config() const { return config_; }
    const core::SceneRegistry& registry() const { return registry_; }

    // The rescaling layer maps a one-hot scene code to (a, b); its weights
    // are exactly the affine table.
    core::SceneAffineTable affine_table() const;
    void set_affine_table(const core::SceneAffineTable& table);

    dataset::PatchConfig patch_config(std::uint64_t seed) const;

    FeatureBundle extract_features(const cv::Mat& patch) const;
    std::vector<double> classify_logits(std::span<const FeatureBundle> bundles) const;
    core::ClassProbVector classify_scene(std::span<const FeatureBundle> bundles) const;
    double predict_pre_quality(const FeatureBundle& bundle) const;

    core::QualityPrediction forward_patches(std::span<const cv::Mat> patches) const;
    core::QualityPrediction forward_patches(std::span<const cv::Mat> patches, const core::SceneAffineTable& table) const;

    ImageForward forward_train(std::span<const cv::Mat> patches) const;
    void backward(const ImageForward& fwd, const ImageGradient& upstream, GradBuffer& grads) const;

    std::vector<ParamRef> parameters();
    GradBuffer zero_grads() const;

    ToyBackbone backbone;
    SceneClassifier classifier;
    QualityHead head;
    Matrix rescale_multipliers;  // s x 1
    Matrix rescale_offsets;      // s x 1

private:
    void check_patch(const cv::Mat& patch) const;

    ModelConfig config_;
    core::SceneRegistry registry_;
};

// Samples the configured crops from `image` (inside `roi` when given, with
// a random stream keyed by `image_key`) and runs the full forward pass.
core::QualityPrediction forward_image(const QualityModel& model, const cv::Mat& image, std::string_view image_key,
                                      const std::optional<dataset::Rect>& roi, std::uint64_t seed);
core::QualityPrediction forward_image(const QualityModel& model, const cv::Mat& image, std::string_view image_key,
                                      const std::optional<dataset::Rect>& roi, std::uint64_t seed,
                                      const core::SceneAffineTable& table);

}  // namespace fhiqa::network
