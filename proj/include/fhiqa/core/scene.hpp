#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fhiqa::core {

// Ordered set of training-scene identifiers. The position of a scene in the
// registry is its index in every classification and rescaling vector.
class SceneRegistry {
public:
    SceneRegistry() = default;
    explicit SceneRegistry(std::vector<std::string> scene_ids);

    std::size_t count() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::string& id(std::size_t index) const;

    std::optional<std::size_t> index_of(const std::string& scene_id) const;
    bool contains(const std::string& scene_id) const { return index_of(scene_id).has_value(); }

    // Appends a scene if not yet registered and returns its index.
    std::size_t add(const std::string& scene_id);

    friend bool operator==(const SceneRegistry& a, const SceneRegistry& b) { return a.ids_ == b.ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Scene-membership weights over the registry (softmax output of the scene
// classifier). Entries are non-negative with a positive sum.
class ClassProbVector {
public:
    ClassProbVector() = default;
    explicit ClassProbVector(std::vector<double> weights);

    static ClassProbVector one_hot(std::size_t size, std::size_t hot);

    std::size_t size() const noexcept { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::span<const double> weights() const noexcept { return weights_; }
    double sum() const noexcept;

    // Index of the largest weight; ties go to the lower index.
    std::size_t argmax() const;

private:
    std::vector<double> weights_;
};

// Per-scene multiplier/offset pairs of the rescaling layer.
class SceneAffineTable {
public:
    SceneAffineTable() = default;
    SceneAffineTable(std::vector<double> multipliers, std::vector<double> offsets);

    // a = 1, b = 0 for every scene.
    static SceneAffineTable identity(std::size_t scenes);

    std::size_t size() const noexcept { return multipliers_.size(); }
    double multiplier(std::size_t i) const { return multipliers_.at(i); }
    double offset(std::size_t i) const { return offsets_.at(i); }
    std::span<const double> multipliers() const noexcept { return multipliers_; }
    std::span<const double> offsets() const noexcept { return offsets_; }

    void set(std::size_t i, double multiplier, double offset);

    friend bool operator==(const SceneAffineTable&, const SceneAffineTable&) = default;

private:
    std::vector<double> multipliers_;
    std::vector<double> offsets_;
};

// Number of most probable scenes entering the weighted rescaling. Values
// larger than the registry size are truncated at the use site.
struct TopKPolicy {
    std::size_t k = 5;

    explicit TopKPolicy(std::size_t k_value = 5);
    std::size_t effective(std::size_t scenes) const noexcept { return k < scenes ? k : scenes; }
};

struct QualityPrediction {
    std::vector<double> patch_scores;
    double pre_quality = 0.0;
    double final_score = 0.0;
    ClassProbVector class_probs;
};

}  // namespace fhiqa::core
