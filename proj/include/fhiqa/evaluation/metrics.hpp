#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fhiqa::evaluation {

struct SceneMetrics {
    double srcc = 0.0;
    double plcc = 0.0;
    double krcc = 0.0;
    double mae = 0.0;
};

// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);
// Kendall tau-b in O(n log n) (merge-sort discordance count).
double kendall_tau_b(std::span<const double> x, std::span<const double> y);
double mean_absolute_error(std::span<const double> x, std::span<const double> y);

// Throws DegenerateInputError on length mismatch, fewer than two samples or
// constant targets/predictions (the correlations are undefined there).
SceneMetrics compute_scene_metrics(std::span<const double> preds, std::span<const double> targets);

enum class MedianMode { Standard, Lower };

// Standard median; Lower picks element (n/2) of the 1-based sorted values
// for even n, i.e. the lower of the two middle values.
double median_across_scenes(std::span<const double> values, MedianMode mode = MedianMode::Standard);

struct MetricRecord {
    std::string model;
    std::string scene_id;
    std::string attribute;
    std::size_t n_images = 0;
    std::optional<double> srcc;
    std::optional<double> plcc;
    std::optional<double> krcc;
    std::optional<double> mae;

    bool defined() const { return srcc && plcc && krcc && mae; }
};

// Mean of the three correlations; nullopt when any is undefined.
std::optional<double> averaged_correlation(const MetricRecord& record);

struct Prediction {
    std::string image;
    std::string scene_id;
    double target = 0.0;
    double predicted = 0.0;
};

// Groups predictions by scene (first-appearance order) and computes one
// record per scene. Degenerate scenes yield a record with no metrics.
std::vector<MetricRecord> evaluate_predictions(const std::vector<Prediction>& predictions, const std::string& model,
                                               const std::string& attribute);

}  // namespace fhiqa::evaluation
