#pragma once

#include "fhiqa/training/state.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace fhiqa::training {

enum class DecayMode {
    Complement,  // multiply by (1 - decay_factor) every decay_every epochs
    Literal,     // multiply by decay_factor every decay_every epochs
};

std::string to_string(DecayMode mode);
DecayMode parse_decay_mode(const std::string& text);

struct TrainConfig {
    int max_epochs = 300;
    double lr_backbone = 1e-5;
    double lr_heads = 1e-4;
    // Rescaling layer; follows lr_heads when unset.
    std::optional<double> lr_rescale;
    int decay_every = 10;
    double decay_factor = 0.05;
    DecayMode decay_mode = DecayMode::Complement;
    int patience = 40;
    double huber_delta = 1.0;
    double loss_weight_quality = 1.0;
    double loss_weight_class = 0.5;
    int batch_size = 8;
    std::uint64_t seed = 0;
    double val_fraction = 0.15;
    bool teacher_forcing = false;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    void validate() const;
};

double lr_at_epoch(double base_lr, int epoch, const TrainConfig& config);

struct EarlyStopDecision {
    TrainState state;
    bool stop = false;
    bool improved = false;
};

// Records the validation SRCC of epoch `state.epoch` and advances the epoch
// counter. The best score moves only on strict improvement; stop is raised
// once epochs_since_best reaches `patience`.
EarlyStopDecision early_stop_update(TrainState state, double val_srcc, int patience);

}  // namespace fhiqa::training
