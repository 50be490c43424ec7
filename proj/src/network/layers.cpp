#include "fhiqa/network/layers.hpp"

#include "fhiqa/errors.hpp"

#include <cmath>

namespace fhiqa::network {

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding)
    : weight(Matrix::Zero(kernel * kernel * in_channels, out_channels)),
      bias(Matrix::Zero(1, out_channels)),
      in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding) {}

void Conv2d::init(std::mt19937_64& rng) {
    const float fan_in = static_cast<float>(kernel_ * kernel_ * in_);
    std::normal_distribution<float> dist(0.0f, std::sqrt(2.0f / fan_in));
    for (Eigen::Index i = 0; i < weight.size(); ++i) {
        weight.data()[i] = dist(rng);
    }
    bias.setZero();
}

FeatureMap Conv2d::forward(const FeatureMap& input, Matrix& col) const {
    if (input.channels() != in_) {
        throw ShapeError("conv: expected " + std::to_string(in_) + " input channels, got " +
                         std::to_string(input.channels()));
    }
    const int oh = out_size(input.height);
    const int ow = out_size(input.width);
    if (oh <= 0 || ow <= 0) {
        throw ShapeError("conv: input too small");
    }
    const int k = kernel_;
    col.setZero(static_cast<Eigen::Index>(oh) * ow, static_cast<Eigen::Index>(k) * k * in_);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            float* dst = col.row(static_cast<Eigen::Index>(oy) * ow + ox).data();
            for (int ky = 0; ky < k; ++ky) {
                const int iy = oy * stride_ - padding_ + ky;
                if (iy < 0 || iy >= input.height) {
                    continue;
                }
                for (int kx = 0; kx < k; ++kx) {
                    const int ix = ox * stride_ - padding_ + kx;
                    if (ix < 0 || ix >= input.width) {
                        continue;
                    }
                    const float* src = input.data.row(static_cast<Eigen::Index>(iy) * input.width + ix).data();
                    float* d = dst + (ky * k + kx) * in_;
                    for (int c = 0; c < in_; ++c) {
                        d[c] = src[c];
                    }
                }
            }
        }
    }
    FeatureMap out;
    out.height = oh;
    out.width = ow;
    out.data.noalias() = col * weight;
    out.data.rowwise() += bias.row(0);
    return out;
}

void Conv2d::backward(const FeatureMap& input, const Matrix& col, const Matrix& grad_output, Matrix& grad_w,
                      Matrix& grad_b, Matrix* grad_input) const {
    grad_w.noalias() += col.transpose() * grad_output;
    grad_b += grad_output.colwise().sum();
    if (grad_input == nullptr) {
        return;
    }
    const Matrix grad_col = grad_output * weight.transpose();
    grad_input->setZero(static_cast<Eigen::Index>(input.height) * input.width, in_);
    const int oh = out_size(input.height);
    const int ow = out_size(input.width);
    const int k = kernel_;
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const float* src = grad_col.row(static_cast<Eigen::Index>(oy) * ow + ox).data();
            for (int ky = 0; ky < k; ++ky) {
                const int iy = oy * stride_ - padding_ + ky;
                if (iy < 0 || iy >= input.height) {
                    continue;
                }
                for (int kx = 0; kx < k; ++kx) {
                    const int ix = ox * stride_ - padding_ + kx;
                    if (ix < 0 || ix >= input.width) {
                        continue;
                    }
                    float* d = grad_input->row(static_cast<Eigen::Index>(iy) * input.width + ix).data();
                    const float* s = src + (ky * k + kx) * in_;
                    for (int c = 0; c < in_; ++c) {
                        d[c] += s[c];
                    }
                }
            }
        }
    }
}

Linear::Linear(int in_features, int out_features)
    : weight(Matrix::Zero(out_features, in_features)), bias(Matrix::Zero(out_features, 1)) {}

void Linear::init(std::mt19937_64& rng, float gain) {
    std::normal_distribution<float> dist(0.0f, std::sqrt(gain / static_cast<float>(weight.cols())));
    for (Eigen::Index i = 0; i < weight.size(); ++i) {
        weight.data()[i] = dist(rng);
    }
    bias.setZero();
}

Vector Linear::forward(const Vector& x) const {
    if (x.size() != weight.cols()) {
        throw ShapeError("linear: expected " + std::to_string(weight.cols()) + " inputs, got " +
                         std::to_string(x.size()));
    }
    Vector y = weight * x;
    y += bias.col(0);
    return y;
}

Vector Linear::backward(const Vector& x, const Vector& grad_y, Matrix& grad_w, Matrix& grad_b) const {
    grad_w.noalias() += grad_y * x.transpose();
    grad_b.col(0) += grad_y;
    return weight.transpose() * grad_y;
}

}  // namespace fhiqa::network
