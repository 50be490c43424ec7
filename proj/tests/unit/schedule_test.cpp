#include "fhiqa/errors.hpp"
#include "fhiqa/training/schedule.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace fhiqa::training {
namespace {

TEST(LearningRate, Examples) {
    TrainConfig cfg;
    EXPECT_DOUBLE_EQ(lr_at_epoch(1e-4, 0, cfg), 1e-4);
    EXPECT_NEAR(lr_at_epoch(1e-4, 25, cfg), 9.025e-5, 1e-18);
    EXPECT_DOUBLE_EQ(lr_at_epoch(1e-4, 9, cfg), 1e-4);
    EXPECT_NEAR(lr_at_epoch(1e-4, 10, cfg), 9.5e-5, 1e-18);
    EXPECT_THROW(lr_at_epoch(1e-4, -1, cfg), RangeError);
}

TEST(LearningRate, TableForFirstThirtyEpochs) {
    TrainConfig cfg;
    for (int e = 0; e <= 30; ++e) {
        double expected = 1e-5;
        for (int k = 0; k < e / 10; ++k) {
            expected *= 0.95;
        }
        EXPECT_NEAR(lr_at_epoch(1e-5, e, cfg), expected, 1e-20) << e;
    }
}

TEST(LearningRate, LiteralMode) {
    TrainConfig cfg;
    cfg.decay_mode = DecayMode::Literal;
    EXPECT_NEAR(lr_at_epoch(1e-4, 25, cfg), 1e-4 * 0.05 * 0.05, 1e-20);
    EXPECT_EQ(parse_decay_mode("literal"), DecayMode::Literal);
    EXPECT_THROW(parse_decay_mode("cosine"), ConfigError);
}

// Feeds the sequence and returns the number of updates before stop (or -1).
int stop_after(const std::vector<double>& srcc, int patience) {
    TrainState state;
    for (std::size_t i = 0; i < srcc.size(); ++i) {
        const auto d = early_stop_update(state, srcc[i], patience);
        state = d.state;
        if (d.stop) {
            return static_cast<int>(i) + 1;
        }
    }
    return -1;
}

TEST(EarlyStop, ImprovingNeverStops) {
    std::vector<double> srcc;
    for (int i = 0; i < 100; ++i) {
        srcc.push_back(0.001 * i);
    }
    EXPECT_EQ(stop_after(srcc, 3), -1);
}

TEST(EarlyStop, ConstantStopsExactlyAtPatience) {
    for (int patience : {1, 3, 40}) {
        const std::vector<double> srcc(static_cast<std::size_t>(patience) + 5, 0.5);
        EXPECT_EQ(stop_after(srcc, patience), patience + 1);
    }
}

TEST(EarlyStop, LateImprovementResets) {
    const int patience = 4;
    std::vector<double> srcc{0.5, 0.4, 0.4, 0.6, 0.1, 0.1, 0.1, 0.1, 0.1};
    // Best at epoch 3; stop once epoch 7 has been recorded.
    EXPECT_EQ(stop_after(srcc, patience), 8);
    TrainState state;
    for (int i = 0; i < patience - 1; ++i) {
        state = early_stop_update(state, 0.2, patience).state;
    }
    const auto d = early_stop_update(state, 0.9, patience);
    EXPECT_TRUE(d.improved);
    EXPECT_FALSE(d.stop);
    EXPECT_EQ(d.state.epochs_since_best, 0);
    EXPECT_EQ(d.state.best_epoch, patience - 1);
}

TEST(EarlyStop, EqualScoreIsNotImprovement) {
    TrainState state;
    state = early_stop_update(state, 0.5, 10).state;
    const auto d = early_stop_update(state, 0.5, 10);
    EXPECT_FALSE(d.improved);
    EXPECT_EQ(d.state.best_epoch, 0);
    EXPECT_EQ(d.state.epochs_since_best, 1);
    EXPECT_EQ(d.state.epoch, 2);
}

TEST(EarlyStop, NonFiniteScoreIsRejected) {
    EXPECT_THROW(early_stop_update(TrainState{}, std::numeric_limits<double>::quiet_NaN(), 3), NumericError);
}

TEST(TrainConfigTest, Validation) {
    TrainConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.lr_heads = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.patience = cfg.max_epochs + 1;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.lr_rescale = -1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace fhiqa::training
