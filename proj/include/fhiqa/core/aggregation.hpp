#pragma once

#include "fhiqa/core/scene.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace fhiqa::core {

struct TopKSelection {
    // Selected scene indices, by descending weight (ties: lower index first).
    std::vector<std::size_t> indices;
    // Selected raw weights divided by their sum, aligned with `indices`.
    std::vector<double> weights;
};

TopKSelection top_k_select(const ClassProbVector& probs, TopKPolicy policy);

double rescale_single_scene(double pre_quality, std::size_t scene_index, const SceneAffineTable& table);

// Renormalised top-k weighted average of the per-scene rescaled scores:
//   Q_f = sum_{i in topk} P_i (a_i Q_p + b_i) / sum_{j in topk} P_j
double aggregate_quality(double pre_quality, const ClassProbVector& probs, const SceneAffineTable& table,
                         TopKPolicy policy);

QualityPrediction aggregate_image_from_patches(std::span<const double> patch_scores, const ClassProbVector& probs,
                                               const SceneAffineTable& table, TopKPolicy policy);

// Partial derivatives of Q_f. The top-k set is treated as fixed (selection is
// piecewise constant in P).
struct AggregationGradient {
    double final_score = 0.0;
    double d_pre_quality = 0.0;
    std::vector<double> d_multipliers;  // size s
    std::vector<double> d_offsets;      // size s
    std::vector<double> d_probs;        // size s, w.r.t. the raw (unnormalised) weights
};

AggregationGradient aggregate_quality_gradient(double pre_quality, const ClassProbVector& probs,
                                               const SceneAffineTable& table, TopKPolicy policy);

}  // namespace fhiqa::core
