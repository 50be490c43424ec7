#include "fhiqa/training/adam.hpp"

#include "fhiqa/errors.hpp"

#include <cmath>

namespace fhiqa::training {

Adam::Adam(const std::vector<network::ParamRef>& params, const TrainConfig& config)
    : beta1_(config.adam_beta1), beta2_(config.adam_beta2), epsilon_(config.adam_epsilon) {
    for (const auto& p : params) {
        state_.first_moment.push_back(network::Matrix::Zero(p.value->rows(), p.value->cols()));
        state_.second_moment.push_back(network::Matrix::Zero(p.value->rows(), p.value->cols()));
    }
}

void Adam::step(const std::vector<network::ParamRef>& params, const network::GradBuffer& grads, const Rates& rates) {
    if (params.size() != grads.size() || params.size() != state_.first_moment.size()) {
        throw ShapeError("optimizer step: parameter/gradient count mismatch");
    }
    ++state_.step;
    const double t = static_cast<double>(state_.step);
    const double c1 = 1.0 - std::pow(beta1_, t);
    const double c2 = 1.0 - std::pow(beta2_, t);
    const auto b1 = static_cast<float>(beta1_);
    const auto b2 = static_cast<float>(beta2_);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& g = grads[i];
        auto& m = state_.first_moment[i];
        auto& v = state_.second_moment[i];
        m = b1 * m + (1.0f - b1) * g;
        v.array() = b2 * v.array() + (1.0f - b2) * g.array().square();
        double lr = rates.heads;
        if (params[i].group == network::ParamGroup::Backbone) {
            lr = rates.backbone;
        } else if (params[i].group == network::ParamGroup::Rescale) {
            lr = rates.rescale;
        }
        const auto step_size = static_cast<float>(lr / c1);
        const auto denom_scale = static_cast<float>(1.0 / std::sqrt(c2));
        params[i].value->array() -=
            step_size * m.array() / (v.array().sqrt() * denom_scale + static_cast<float>(epsilon_));
    }
}

void Adam::restore(AdamState state) {
    if (state.first_moment.size() != state_.first_moment.size() ||
        state.second_moment.size() != state_.second_moment.size()) {
        throw CheckpointError("optimizer state does not match the model parameters");
    }
    for (std::size_t i = 0; i < state.first_moment.size(); ++i) {
        const auto& ref = state_.first_moment[i];
        if (state.first_moment[i].rows() != ref.rows() || state.first_moment[i].cols() != ref.cols() ||
            state.second_moment[i].rows() != ref.rows() || state.second_moment[i].cols() != ref.cols()) {
            throw CheckpointError("optimizer moment " + std::to_string(i) + " has the wrong shape");
        }
    }
    state_ = std::move(state);
}

}  // namespace fhiqa::training
