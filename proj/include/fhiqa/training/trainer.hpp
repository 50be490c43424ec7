#pragma once

#include "fhiqa/dataset/manifest.hpp"
#include "fhiqa/dataset/split.hpp"
#include "fhiqa/network/config.hpp"
#include "fhiqa/training/schedule.hpp"
#include "fhiqa/training/state.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fhiqa::training {

struct TrainOptions {
    std::string attribute = "Overall";
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> resume_from;
    std::size_t workers = 1;
    std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
    std::filesystem::path best_checkpoint;
    std::filesystem::path last_checkpoint;
    std::filesystem::path metrics_csv;
    std::filesystem::path split_file;
    TrainState state;
    std::size_t n_train_images = 0;
    std::size_t n_val_images = 0;
};

inline constexpr const char* kTrainMetricsHeader = "epoch,train_loss,huber,ce,val_median_srcc,lr_backbone,lr_heads";

std::string format_train_metrics(const std::vector<EpochRecord>& history);

// Per-scene validation hold-out: `fraction` of each scene's images (at least
// two when the scene has four or more images, none otherwise), chosen by a
// seeded shuffle. Returns one flag per entry of `scene_of_image`.
std::vector<bool> validation_mask(const std::vector<std::size_t>& scene_of_image, double fraction,
                                  std::uint64_t seed);

// Trains on the train side of `split`. The split's train scenes, in order,
// define the scene registry. Writes best.ckpt, last.ckpt, train_metrics.csv
// and split.txt under options.output_dir. A non-finite loss aborts with a
// NumericError after dumping the state to failure_state.json.
TrainResult run_training(const dataset::Manifest& manifest, const dataset::SplitSpec& split,
                         network::ModelConfig model_config, const TrainConfig& config, const TrainOptions& options);

}  // namespace fhiqa::training
