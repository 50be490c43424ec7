#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace fhiqa::network {

using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXf;

// Spatial activation stored as (height * width) x channels, row-major.
struct FeatureMap {
    int height = 0;
    int width = 0;
    Matrix data;

    int channels() const { return static_cast<int>(data.cols()); }
};

enum class ParamGroup { Backbone, Heads, Rescale };

struct ParamRef {
    std::string name;
    ParamGroup group;
    Matrix* value;
};

// Gradient storage aligned with a model's parameter list.
using GradBuffer = std::vector<Matrix>;

}  // namespace fhiqa::network
