#pragma once

#include "fhiqa/dataset/split.hpp"
#include "fhiqa/dataset/synthetic.hpp"
#include "fhiqa/evaluation/metrics.hpp"
#include "fhiqa/network/config.hpp"
#include "fhiqa/training/schedule.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fhiqa::cli {

struct DatasetSection {
    std::string manifest;
    std::string split_file;
    std::string attribute = "Overall";
    std::size_t n_test_scenes = 15;
    double target_fraction = 0.29;
    double fraction_tolerance = 0.03;
    std::optional<std::uint64_t> split_seed;
    std::size_t max_attempts = 200;
};

struct SynthSection {
    int n_scenes = 7;
    int images_per_scene = 40;
    int image_size = 256;
    double max_blur_sigma = 4.0;
    std::optional<std::uint64_t> seed;
};

struct EvalSection {
    std::string model_name = "FHIQA";
    evaluation::MedianMode median_mode = evaluation::MedianMode::Standard;
    std::optional<std::uint64_t> seed;
};

// Seeds left unset in a section fall back to run_seed.
struct RunConfig {
    std::uint64_t run_seed = 0;
    std::string output_dir = "runs/default";
    std::size_t workers = 1;
    DatasetSection dataset;
    SynthSection synth;
    network::ModelConfig model;
    std::optional<std::uint64_t> model_init_seed;
    training::TrainConfig train;
    std::optional<std::uint64_t> train_seed;
    EvalSection eval;

    dataset::SplitOptions split_options() const;
    dataset::SyntheticOptions synthetic_options() const;
    network::ModelConfig model_config() const;
    training::TrainConfig train_config() const;
    std::uint64_t eval_seed() const { return eval.seed.value_or(run_seed); }

    // output_dir, resolved against $FHIQA_OUTPUT_ROOT when relative.
    std::filesystem::path output_path() const;
};

inline constexpr const char* kOutputRootEnv = "FHIQA_OUTPUT_ROOT";

struct ConfigKey {
    std::string key;
    std::string default_value;
    std::string help;
};

// Every accepted key, in documentation order, with its default.
const std::vector<ConfigKey>& config_keys();
std::string describe_config_keys();

// Accepts a JSON object with the sections as nested objects (or dotted
// keys). Unknown keys and ill-typed values throw ConfigError naming the key.
// An empty document yields the defaults.
void apply_config_text(RunConfig& config, const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

// "key=value"; value is read as JSON when it parses, else as a string.
void apply_override(RunConfig& config, const std::string& assignment);
void set_config_value(RunConfig& config, const std::string& key, const std::string& json_value);

std::string dump_run_config(const RunConfig& config);

}  // namespace fhiqa::cli
