#pragma once

#include "fhiqa/core/aggregation.hpp"

#include <span>
#include <vector>

namespace fhiqa::training {

struct TrainConfig;

// 0.5 r^2 for |r| <= delta, delta (|r| - delta / 2) otherwise; r = pred - target.
double huber_loss(double pred, double target, double delta);
double huber_derivative(double pred, double target, double delta);

// -log softmax(logits)[target]
double cross_entropy(std::span<const double> logits, std::size_t target);
std::vector<double> softmax(std::span<const double> logits);

struct LossComponents {
    double total = 0.0;
    double huber = 0.0;
    double ce = 0.0;
};

// total = w_q * huber(quality_pred, quality_target) + w_c * CE(logits, class_target)
LossComponents multitask_loss(double quality_pred, double quality_target, std::span<const double> class_logits,
                              std::size_t class_target, const TrainConfig& config);

// Loss of one image when the quality prediction is the top-k rescaled score
// computed from the classifier's own softmax, with all gradients needed by
// the network backward pass.
struct ImageLoss {
    LossComponents loss;
    double final_score = 0.0;
    double d_pre_quality = 0.0;
    std::vector<double> d_logits;
    std::vector<double> d_multipliers;
    std::vector<double> d_offsets;
};

// With teacher forcing the rescaling uses the ground-truth one-hot instead
// of the predicted class vector.
ImageLoss image_loss(double pre_quality, std::span<const double> class_logits, const core::SceneAffineTable& table,
                     core::TopKPolicy policy, double quality_target, std::size_t class_target,
                     const TrainConfig& config, bool teacher_forcing = false);

}  // namespace fhiqa::training
