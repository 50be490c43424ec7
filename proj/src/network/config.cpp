#include "fhiqa/network/config.hpp"

#include "fhiqa/errors.hpp"

namespace fhiqa::network {

std::string to_string(BackboneKind kind) {
    return kind == BackboneKind::ToyCnn ? "toy_cnn" : "resnet50_pretrained";
}

std::string to_string(HeadKind kind) { return kind == HeadKind::Hypernetwork ? "hypernetwork" : "linear_probe"; }

BackboneKind parse_backbone(const std::string& text) {
    if (text == "toy_cnn") {
        return BackboneKind::ToyCnn;
    }
    if (text == "resnet50_pretrained") {
        return BackboneKind::Resnet50Pretrained;
    }
    throw ConfigError("unknown backbone '" + text + "' (expected toy_cnn or resnet50_pretrained)");
}

HeadKind parse_head(const std::string& text) {
    if (text == "hypernetwork") {
        return HeadKind::Hypernetwork;
    }
    if (text == "linear_probe") {
        return HeadKind::LinearProbe;
    }
    throw ConfigError("unknown quality head '" + text + "' (expected hypernetwork or linear_probe)");
}

void ModelConfig::validate() const {
    if (input_size <= 0 || input_size % 224 != 0) {
        throw ConfigError("model.input_size must be a positive multiple of 224, got " + std::to_string(input_size));
    }
    if (patches_per_image <= 0) {
        throw ConfigError("model.patches_per_image must be positive");
    }
    if (num_scenes == 0) {
        throw ConfigError("model needs at least one training scene");
    }
    if (top_k.k == 0) {
        throw ConfigError("model.top_k must be at least 1");
    }
    for (int h : target_hidden) {
        if (h <= 0) {
            throw ConfigError("model.target_hidden widths must be positive");
        }
    }
    if (backbone == BackboneKind::Resnet50Pretrained) {
        throw ConfigError(
            "backbone resnet50_pretrained needs externally supplied ImageNet weights, which this build does not load; "
            "use toy_cnn");
    }
}

}  // namespace fhiqa::network
