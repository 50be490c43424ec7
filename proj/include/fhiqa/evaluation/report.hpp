#pragma once

#include "fhiqa/core/scene.hpp"
#include "fhiqa/evaluation/metrics.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fhiqa::evaluation {

struct BenchmarkCell {
    double srcc = 0.0;
    double plcc = 0.0;
    double krcc = 0.0;
    double mae = 0.0;
    std::size_t scenes = 0;
};

struct BenchmarkTable {
    std::vector<std::string> models;
    std::vector<std::string> attributes;
    // (model, attribute) -> medians; absent keys are gaps.
    std::map<std::pair<std::string, std::string>, BenchmarkCell> cells;
    // Records left out of the medians because a metric was undefined.
    std::vector<MetricRecord> excluded;

    const BenchmarkCell* cell(const std::string& model, const std::string& attribute) const;
};

inline const std::vector<std::string> kDefaultAttributes = {"Overall", "Exposure", "Details"};

// Each cell is the median across scenes of the records of that
// (model, attribute). Missing combinations render as the gap marker.
BenchmarkTable build_benchmark_table(const std::vector<MetricRecord>& records, const std::vector<std::string>& models,
                                     const std::vector<std::string>& attributes = kDefaultAttributes,
                                     MedianMode mode = MedianMode::Standard);

inline constexpr const char* kGapMarker = "--";

std::string format_benchmark_csv(const BenchmarkTable& table);
// Aligned text: one row per model, SRCC/PLCC/KRCC/MAE per attribute, two decimals.
std::string format_benchmark_text(const BenchmarkTable& table);

// Tally of argmax scene assignments; ties go to the lower index.
std::vector<std::size_t> class_distribution_histogram(const std::vector<core::ClassProbVector>& predictions,
                                                      const core::SceneRegistry& registry);

inline constexpr const char* kMetricsHeader = "model,scene,attribute,n,srcc,plcc,krcc,mae";
inline constexpr const char* kHistogramHeader = "test_scene,train_scene,count";
inline constexpr const char* kAveragedHeader = "model,attribute,scene,averaged_correlation";
inline constexpr const char* kPredictionsHeader = "image,scene,target,q_p,q_f";

std::string format_metric_records(const std::vector<MetricRecord>& records);
std::vector<MetricRecord> parse_metric_records(const std::string& text);

std::string format_averaged_correlations(const std::vector<MetricRecord>& records);

struct SceneHistogram {
    std::string test_scene;
    std::vector<std::size_t> counts;
};
std::string format_histograms(const std::vector<SceneHistogram>& histograms, const core::SceneRegistry& registry);

struct PredictionRow {
    std::string image;
    std::string scene_id;
    double target = 0.0;
    double pre_quality = 0.0;
    double final_score = 0.0;
};
std::string format_predictions(const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> parse_predictions(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fhiqa::evaluation
