#pragma once

#include "fhiqa/network/tensor.hpp"
#include "fhiqa/training/schedule.hpp"
#include "fhiqa/training/state.hpp"

#include <vector>

namespace fhiqa::training {

// Adam with one learning rate per parameter group.
class Adam {
public:
    Adam(const std::vector<network::ParamRef>& params, const TrainConfig& config);

    struct Rates {
        double backbone = 0.0;
        double heads = 0.0;
        double rescale = 0.0;
    };

    void step(const std::vector<network::ParamRef>& params, const network::GradBuffer& grads, const Rates& rates);

    const AdamState& state() const noexcept { return state_; }
    // Throws CheckpointError when the moment shapes do not match.
    void restore(AdamState state);

private:
    double beta1_;
    double beta2_;
    double epsilon_;
    AdamState state_;
};

}  // namespace fhiqa::training
