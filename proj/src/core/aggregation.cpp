#include "fhiqa/core/aggregation.hpp"

#include "fhiqa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fhiqa::core {

namespace {

void check_table(const ClassProbVector& probs, const SceneAffineTable& table) {
    if (probs.size() != table.size()) {
        throw ShapeError("probability vector has " + std::to_string(probs.size()) + " entries but the affine table has " +
                         std::to_string(table.size()));
    }
}

}  // namespace

TopKSelection top_k_select(const ClassProbVector& probs, TopKPolicy policy) {
    if (policy.k == 0) {
        throw RangeError("top-k policy: k must be at least 1");
    }
    const std::size_t s = probs.size();
    if (s == 0 || !(probs.sum() > 0.0)) {
        throw DegenerateInputError("top-k selection: probability vector is empty or all zero");
    }
    const std::size_t k = policy.effective(s);

    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (probs[a] != probs[b]) {
                              return probs[a] > probs[b];
                          }
                          return a < b;
                      });
    order.resize(k);

    double total = 0.0;
    for (auto i : order) {
        total += probs[i];
    }
    if (!(total > 0.0)) {
        throw DegenerateInputError("top-k selection: selected weights sum to zero");
    }

    TopKSelection out;
    out.indices = std::move(order);
    out.weights.reserve(k);
    for (auto i : out.indices) {
        out.weights.push_back(probs[i] / total);
    }
    return out;
}

double rescale_single_scene(double pre_quality, std::size_t scene_index, const SceneAffineTable& table) {
    if (scene_index >= table.size()) {
        throw RangeError("rescale: scene index " + std::to_string(scene_index) + " out of range (scenes " +
                         std::to_string(table.size()) + ")");
    }
    return table.multiplier(scene_index) * pre_quality + table.offset(scene_index);
}

double aggregate_quality(double pre_quality, const ClassProbVector& probs, const SceneAffineTable& table,
                         TopKPolicy policy) {
    check_table(probs, table);
    const auto selection = top_k_select(probs, policy);
    double q = 0.0;
    for (std::size_t j = 0; j < selection.indices.size(); ++j) {
        q += selection.weights[j] * rescale_single_scene(pre_quality, selection.indices[j], table);
    }
    return q;
}

QualityPrediction aggregate_image_from_patches(std::span<const double> patch_scores, const ClassProbVector& probs,
                                               const SceneAffineTable& table, TopKPolicy policy) {
    if (patch_scores.empty()) {
        throw DegenerateInputError("aggregate: no patch scores");
    }
    for (double q : patch_scores) {
        if (!std::isfinite(q)) {
            throw NumericError("aggregate: non-finite patch score");
        }
    }
    QualityPrediction out;
    out.patch_scores.assign(patch_scores.begin(), patch_scores.end());
    out.pre_quality = std::accumulate(patch_scores.begin(), patch_scores.end(), 0.0) /
                      static_cast<double>(patch_scores.size());
    out.final_score = aggregate_quality(out.pre_quality, probs, table, policy);
    out.class_probs = probs;
    return out;
}

AggregationGradient aggregate_quality_gradient(double pre_quality, const ClassProbVector& probs,
                                               const SceneAffineTable& table, TopKPolicy policy) {
    check_table(probs, table);
    const auto selection = top_k_select(probs, policy);
    const std::size_t s = probs.size();

    double total = 0.0;
    for (auto i : selection.indices) {
        total += probs[i];
    }

    AggregationGradient g;
    g.d_multipliers.assign(s, 0.0);
    g.d_offsets.assign(s, 0.0);
    g.d_probs.assign(s, 0.0);

    for (std::size_t j = 0; j < selection.indices.size(); ++j) {
        const auto i = selection.indices[j];
        const double w = selection.weights[j];
        g.final_score += w * rescale_single_scene(pre_quality, i, table);
        g.d_pre_quality += w * table.multiplier(i);
        g.d_multipliers[i] = w * pre_quality;
        g.d_offsets[i] = w;
    }
    // d/dP_i of sum_j P_j r_j / sum_j P_j  =  (r_i - Q_f) / sum_j P_j
    for (auto i : selection.indices) {
        g.d_probs[i] = (rescale_single_scene(pre_quality, i, table) - g.final_score) / total;
    }
    return g;
}

}  // namespace fhiqa::core
