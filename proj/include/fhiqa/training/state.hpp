#pragma once

#include "fhiqa/network/tensor.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace fhiqa::training {

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double huber = 0.0;
    double ce = 0.0;
    double val_median_srcc = 0.0;
    double lr_backbone = 0.0;
    double lr_heads = 0.0;
};

struct TrainState {
    int epoch = 0;  // completed epochs
    double best_val_srcc = -std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int epochs_since_best = 0;
    std::string rng_state;
    std::vector<EpochRecord> history;
};

struct AdamState {
    std::uint64_t step = 0;
    network::GradBuffer first_moment;
    network::GradBuffer second_moment;
};

}  // namespace fhiqa::training
