#include "fhiqa/training/loss.hpp"

#include "fhiqa/errors.hpp"
#include "fhiqa/training/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace fhiqa::training {

double huber_loss(double pred, double target, double delta) {
    if (!(delta > 0.0)) {
        throw RangeError("huber delta must be positive");
    }
    const double r = std::abs(pred - target);
    return r <= delta ? 0.5 * r * r : delta * (r - 0.5 * delta);
}

double huber_derivative(double pred, double target, double delta) {
    if (!(delta > 0.0)) {
        throw RangeError("huber delta must be positive");
    }
    const double r = pred - target;
    return std::clamp(r, -delta, delta);
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw DegenerateInputError("softmax of an empty vector");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        total += p[i];
    }
    for (double& v : p) {
        v /= total;
    }
    return p;
}

double cross_entropy(std::span<const double> logits, std::size_t target) {
    if (target >= logits.size()) {
        throw RangeError("class target " + std::to_string(target) + " out of range (" +
                         std::to_string(logits.size()) + " classes)");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double z : logits) {
        total += std::exp(z - m);
    }
    return std::log(total) + m - logits[target];
}

LossComponents multitask_loss(double quality_pred, double quality_target, std::span<const double> class_logits,
                              std::size_t class_target, const TrainConfig& config) {
    LossComponents c;
    c.huber = huber_loss(quality_pred, quality_target, config.huber_delta);
    c.ce = cross_entropy(class_logits, class_target);
    c.total = config.loss_weight_quality * c.huber + config.loss_weight_class * c.ce;
    return c;
}

ImageLoss image_loss(double pre_quality, std::span<const double> class_logits, const core::SceneAffineTable& table,
                     core::TopKPolicy policy, double quality_target, std::size_t class_target,
                     const TrainConfig& config, bool teacher_forcing) {
    const std::size_t s = class_logits.size();
    if (class_target >= s) {
        throw RangeError("class target " + std::to_string(class_target) + " out of range (" + std::to_string(s) +
                         " classes)");
    }
    const auto probs = softmax(class_logits);
    const auto weights = teacher_forcing ? core::ClassProbVector::one_hot(s, class_target) : core::ClassProbVector(probs);
    const auto agg = core::aggregate_quality_gradient(pre_quality, weights, table, policy);

    ImageLoss out;
    out.final_score = agg.final_score;
    out.loss = multitask_loss(agg.final_score, quality_target, class_logits, class_target, config);

    const double dq = config.loss_weight_quality * huber_derivative(agg.final_score, quality_target, config.huber_delta);
    out.d_pre_quality = dq * agg.d_pre_quality;
    out.d_multipliers.resize(s);
    out.d_offsets.resize(s);
    for (std::size_t i = 0; i < s; ++i) {
        out.d_multipliers[i] = dq * agg.d_multipliers[i];
        out.d_offsets[i] = dq * agg.d_offsets[i];
    }

    // Softmax Jacobian applied to the quality path, plus the CE gradient.
    out.d_logits.assign(s, 0.0);
    if (!teacher_forcing) {
        double dot = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
            dot += probs[i] * dq * agg.d_probs[i];
        }
        for (std::size_t j = 0; j < s; ++j) {
            out.d_logits[j] = probs[j] * (dq * agg.d_probs[j] - dot);
        }
    }
    for (std::size_t j = 0; j < s; ++j) {
        out.d_logits[j] += config.loss_weight_class * (probs[j] - (j == class_target ? 1.0 : 0.0));
    }
    return out;
}

}  // namespace fhiqa::training
