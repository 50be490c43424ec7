#pragma once

#include "fhiqa/core/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fhiqa::network {

enum class BackboneKind { ToyCnn, Resnet50Pretrained };
enum class HeadKind { Hypernetwork, LinearProbe };

std::string to_string(BackboneKind kind);
std::string to_string(HeadKind kind);
BackboneKind parse_backbone(const std::string& text);
HeadKind parse_head(const std::string& text);

struct ModelConfig {
    BackboneKind backbone = BackboneKind::ToyCnn;
    int input_size = 224;        // patch side, a multiple of 224
    int patches_per_image = 5;
    std::size_t num_scenes = 0;  // size of the scene registry
    core::TopKPolicy top_k{5};
    HeadKind hyper_head = HeadKind::Hypernetwork;
    std::vector<int> target_hidden{16, 8};  // hidden widths of the quality MLP
    std::uint64_t init_seed = 0;

    void validate() const;
    friend bool operator==(const ModelConfig& a, const ModelConfig& b) {
        return a.backbone == b.backbone && a.input_size == b.input_size &&
               a.patches_per_image == b.patches_per_image && a.num_scenes == b.num_scenes &&
               a.top_k.k == b.top_k.k && a.hyper_head == b.hyper_head && a.target_hidden == b.target_hidden &&
               a.init_seed == b.init_seed;
    }
};

}  // namespace fhiqa::network
