#include "fhiqa/training/schedule.hpp"

#include "fhiqa/errors.hpp"

#include <cmath>

namespace fhiqa::training {

std::string to_string(DecayMode mode) { return mode == DecayMode::Complement ? "complement" : "literal"; }

DecayMode parse_decay_mode(const std::string& text) {
    if (text == "complement") {
        return DecayMode::Complement;
    }
    if (text == "literal") {
        return DecayMode::Literal;
    }
    throw ConfigError("unknown decay mode '" + text + "' (expected complement or literal)");
}

void TrainConfig::validate() const {
    if (max_epochs <= 0) {
        throw ConfigError("train.max_epochs must be positive");
    }
    if (!(lr_backbone > 0.0) || !(lr_heads > 0.0)) {
        throw ConfigError("learning rates must be positive");
    }
    if (lr_rescale && !(*lr_rescale > 0.0)) {
        throw ConfigError("train.lr_rescale must be positive");
    }
    if (decay_every <= 0) {
        throw ConfigError("train.decay_every must be positive");
    }
    if (!(decay_factor >= 0.0 && decay_factor <= 1.0)) {
        throw ConfigError("train.decay_factor must lie in [0, 1]");
    }
    if (patience <= 0 || patience > max_epochs) {
        throw ConfigError("train.patience must lie in [1, max_epochs]");
    }
    if (!(huber_delta > 0.0)) {
        throw ConfigError("train.huber_delta must be positive");
    }
    if (loss_weight_quality < 0.0 || loss_weight_class < 0.0) {
        throw ConfigError("loss weights must be non-negative");
    }
    if (batch_size <= 0) {
        throw ConfigError("train.batch_size must be positive");
    }
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
        throw ConfigError("train.val_fraction must lie in [0, 1)");
    }
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
        !(adam_epsilon > 0.0)) {
        throw ConfigError("invalid Adam coefficients");
    }
}

double lr_at_epoch(double base_lr, int epoch, const TrainConfig& config) {
    if (epoch < 0) {
        throw RangeError("epoch must be non-negative");
    }
    const int steps = epoch / config.decay_every;
    const double factor = config.decay_mode == DecayMode::Complement ? 1.0 - config.decay_factor : config.decay_factor;
    return base_lr * std::pow(factor, steps);
}

EarlyStopDecision early_stop_update(TrainState state, double val_srcc, int patience) {
    if (!std::isfinite(val_srcc)) {
        throw NumericError("validation SRCC is not finite");
    }
    EarlyStopDecision d;
    const int e = state.epoch;
    if (val_srcc > state.best_val_srcc) {
        state.best_val_srcc = val_srcc;
        state.best_epoch = e;
        state.epochs_since_best = 0;
        d.improved = true;
    } else {
        state.epochs_since_best = e - state.best_epoch;
    }
    state.epoch = e + 1;
    d.stop = state.epochs_since_best >= patience;
    d.state = std::move(state);
    return d;
}

}  // namespace fhiqa::training
