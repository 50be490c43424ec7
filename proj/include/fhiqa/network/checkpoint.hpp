#pragma once

#include "fhiqa/network/model.hpp"
#include "fhiqa/training/state.hpp"

#include <filesystem>
#include <optional>

namespace fhiqa::network {

inline constexpr const char* kCheckpointTag = "fhiqa-checkpoint";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct LoadedCheckpoint {
    QualityModel model;
    training::TrainState state;
    std::optional<training::AdamState> optimizer;
};

// Single portable-binary archive: format tag and version, model config,
// scene registry, every named parameter tensor, the affine table, the
// training state and optionally the optimizer moments.
void save_checkpoint(const std::filesystem::path& path, QualityModel& model, const training::TrainState& state,
                     const training::AdamState* optimizer = nullptr);

// Throws CheckpointError on a wrong tag/version, truncation or any shape
// inconsistency.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fhiqa::network
