#pragma once

#include "fhiqa/network/tensor.hpp"

#include <random>
#include <span>

namespace fhiqa::network {

// Square-kernel convolution over FeatureMaps via im2col.
// Weights are (k * k * in) x out; bias is 1 x out.
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding);

    void init(std::mt19937_64& rng);

    int out_size(int in_size) const { return (in_size + 2 * padding_ - kernel_) / stride_ + 1; }
    int in_channels() const { return in_; }
    int out_channels() const { return out_; }

    // `col` receives the im2col matrix for the backward pass.
    FeatureMap forward(const FeatureMap& input, Matrix& col) const;

    // Accumulates into grad_w / grad_b; writes the input gradient when
    // `grad_input` is non-null.
    void backward(const FeatureMap& input, const Matrix& col, const Matrix& grad_output, Matrix& grad_w,
                  Matrix& grad_b, Matrix* grad_input) const;

    Matrix weight;
    Matrix bias;

private:
    int in_ = 0;
    int out_ = 0;
    int kernel_ = 1;
    int stride_ = 1;
    int padding_ = 0;
};

// y = W x + b with W (out x in) and b stored as (out x 1).
class Linear {
public:
    Linear() = default;
    Linear(int in_features, int out_features);

    void init(std::mt19937_64& rng, float gain = 2.0f);

    int in_features() const { return static_cast<int>(weight.cols()); }
    int out_features() const { return static_cast<int>(weight.rows()); }

    Vector forward(const Vector& x) const;
    // Accumulates parameter gradients and returns dL/dx.
    Vector backward(const Vector& x, const Vector& grad_y, Matrix& grad_w, Matrix& grad_b) const;

    Matrix weight;
    Matrix bias;
};

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

}  // namespace fhiqa::network
