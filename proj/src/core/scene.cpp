#include "fhiqa/core/scene.hpp"

#include "fhiqa/errors.hpp"

#include <cmath>
#include <numeric>

namespace fhiqa::core {

SceneRegistry::SceneRegistry(std::vector<std::string> scene_ids) {
    ids_.reserve(scene_ids.size());
    for (auto& id : scene_ids) {
        if (id.empty()) {
            throw RangeError("scene registry: empty scene id");
        }
        if (index_.contains(id)) {
            throw RangeError("scene registry: duplicate scene id '" + id + "'");
        }
        index_.emplace(id, ids_.size());
        ids_.push_back(std::move(id));
    }
}

const std::string& SceneRegistry::id(std::size_t index) const {
    if (index >= ids_.size()) {
        throw RangeError("scene registry: index " + std::to_string(index) + " out of range (count " +
                         std::to_string(ids_.size()) + ")");
    }
    return ids_[index];
}

std::optional<std::size_t> SceneRegistry::index_of(const std::string& scene_id) const {
    auto it = index_.find(scene_id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t SceneRegistry::add(const std::string& scene_id) {
    if (scene_id.empty()) {
        throw RangeError("scene registry: empty scene id");
    }
    auto [it, inserted] = index_.emplace(scene_id, ids_.size());
    if (inserted) {
        ids_.push_back(scene_id);
    }
    return it->second;
}

ClassProbVector::ClassProbVector(std::vector<double> weights) : weights_(std::move(weights)) {
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) {
            throw RangeError("class probability vector: entries must be finite and non-negative");
        }
    }
}

ClassProbVector ClassProbVector::one_hot(std::size_t size, std::size_t hot) {
    if (hot >= size) {
        throw RangeError("one-hot index out of range");
    }
    std::vector<double> w(size, 0.0);
    w[hot] = 1.0;
    return ClassProbVector(std::move(w));
}

double ClassProbVector::sum() const noexcept {
    return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

std::size_t ClassProbVector::argmax() const {
    if (weights_.empty()) {
        throw DegenerateInputError("argmax of an empty probability vector");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < weights_.size(); ++i) {
        if (weights_[i] > weights_[best]) {
            best = i;
        }
    }
    return best;
}

SceneAffineTable::SceneAffineTable(std::vector<double> multipliers, std::vector<double> offsets)
    : multipliers_(std::move(multipliers)), offsets_(std::move(offsets)) {
    if (multipliers_.size() != offsets_.size()) {
        throw ShapeError("affine table: multiplier and offset counts differ");
    }
    for (std::size_t i = 0; i < multipliers_.size(); ++i) {
        if (!std::isfinite(multipliers_[i]) || !std::isfinite(offsets_[i])) {
            throw NumericError("affine table: non-finite entry at scene " + std::to_string(i));
        }
    }
}

SceneAffineTable SceneAffineTable::identity(std::size_t scenes) {
    return SceneAffineTable(std::vector<double>(scenes, 1.0), std::vector<double>(scenes, 0.0));
}

void SceneAffineTable::set(std::size_t i, double multiplier, double offset) {
    if (i >= multipliers_.size()) {
        throw RangeError("affine table: scene index out of range");
    }
    if (!std::isfinite(multiplier) || !std::isfinite(offset)) {
        throw NumericError("affine table: non-finite entry at scene " + std::to_string(i));
    }
    multipliers_[i] = multiplier;
    offsets_[i] = offset;
}

TopKPolicy::TopKPolicy(std::size_t k_value) : k(k_value) {
    if (k == 0) {
        throw RangeError("top-k policy: k must be at least 1");
    }
}

}  // namespace fhiqa::core
