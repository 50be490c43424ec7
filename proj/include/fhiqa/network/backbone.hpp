#pragma once

#include "fhiqa/network/layers.hpp"

#include <opencv2/core.hpp>

#include <array>
#include <span>

namespace fhiqa::network {

struct FeatureBundle {
    Vector semantic;                 // global pooled deep features
    Vector color;                    // per-channel patch means removed before the trunk
    Vector content;                  // pooled multi-scale local features
    std::vector<FeatureMap> stages;  // the local feature maps themselves
};

struct BackboneCache {
    FeatureMap input;
    std::array<Matrix, 3> cols;
};

FeatureMap to_feature_map(const cv::Mat& patch);

// Three-stage strided CNN: a 4x4/4 patchify stem then two 3x3/2 stages,
// each followed by ReLU. Spatial size must be divisible by 16; global
// average pooling lets one set of weights serve every input size. Each
// patch is centred per channel before the trunk, so the trunk features are
// blind to global colour; the removed means are reported separately.
class ToyBackbone {
public:
    static constexpr std::array<int, 3> kWidths{8, 16, 32};

    ToyBackbone();

    void init(std::mt19937_64& rng);

    static constexpr int semantic_dim() { return kWidths[2]; }
    static constexpr int content_dim() { return kWidths[0] + kWidths[1] + kWidths[2]; }
    static constexpr int color_dim() { return 3; }
    static constexpr std::size_t param_count() { return 6; }

    FeatureBundle forward(const FeatureMap& input, BackboneCache* cache = nullptr) const;

    // grad_content has content_dim() entries, grad_semantic semantic_dim().
    void backward(const BackboneCache& cache, const FeatureBundle& bundle, const Vector& grad_content,
                  const Vector& grad_semantic, std::span<Matrix> grads) const;

    void params(std::vector<ParamRef>& out, const std::string& prefix);

    std::array<Conv2d, 3> convs;
};

}  // namespace fhiqa::network
