#include "fhiqa/network/heads.hpp"

#include "fhiqa/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fhiqa::network {

SceneClassifier::SceneClassifier(int input_dim, int num_scenes)
    : fc1(input_dim, hidden_width(input_dim)), fc2(hidden_width(input_dim), num_scenes) {}

int SceneClassifier::hidden_width(int input_dim) { return std::min(2 * input_dim, 1024); }

void SceneClassifier::init(std::mt19937_64& rng) {
    fc1.init(rng);
    fc2.init(rng, 1.0f);
}

Vector SceneClassifier::logits(const Vector& input, Cache* cache) const {
    Vector h = fc1.forward(input).cwiseMax(0.0f);
    Vector z = fc2.forward(h);
    if (cache) {
        cache->input = input;
        cache->hidden = std::move(h);
    }
    return z;
}

Vector SceneClassifier::backward(const Cache& cache, const Vector& grad_logits, std::span<Matrix> grads) const {
    Vector gh = fc2.backward(cache.hidden, grad_logits, grads[2], grads[3]);
    gh = (cache.hidden.array() > 0.0f).select(gh, 0.0f);
    return fc1.backward(cache.input, gh, grads[0], grads[1]);
}

void SceneClassifier::params(std::vector<ParamRef>& out, const std::string& prefix) {
    out.push_back({prefix + "fc1.weight", ParamGroup::Heads, &fc1.weight});
    out.push_back({prefix + "fc1.bias", ParamGroup::Heads, &fc1.bias});
    out.push_back({prefix + "fc2.weight", ParamGroup::Heads, &fc2.weight});
    out.push_back({prefix + "fc2.bias", ParamGroup::Heads, &fc2.bias});
}

Vector softmax(const Vector& logits) {
    const float m = logits.maxCoeff();
    Vector e = (logits.array() - m).exp();
    return e / e.sum();
}

QualityHead::QualityHead(bool hypernetwork, int content_dim, int semantic_dim, std::vector<int> hidden)
    : hyper_(hypernetwork), semantic_dim_(semantic_dim) {
    dims_.push_back(content_dim);
    dims_.insert(dims_.end(), hidden.begin(), hidden.end());
    dims_.push_back(1);
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        const int in = dims_[l];
        const int out = dims_[l + 1];
        if (hyper_) {
            params_.push_back(Matrix::Zero(static_cast<Eigen::Index>(out) * in, semantic_dim));
            params_.push_back(Matrix::Zero(out, semantic_dim));
            params_.push_back(Matrix::Zero(out, 1));
        } else {
            params_.push_back(Matrix::Zero(out, in));
            params_.push_back(Matrix::Zero(out, 1));
        }
    }
}

void QualityHead::init(std::mt19937_64& rng) {
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        const float in = static_cast<float>(dims_[l]);
        if (hyper_) {
            const float d = static_cast<float>(semantic_dim_);
            std::normal_distribution<float> gw(0.0f, std::sqrt(2.0f / (in * d)));
            std::normal_distribution<float> gb(0.0f, std::sqrt(0.1f / d));
            auto& G = params_[3 * l];
            auto& H = params_[3 * l + 1];
            for (Eigen::Index i = 0; i < G.size(); ++i) {
                G.data()[i] = gw(rng);
            }
            for (Eigen::Index i = 0; i < H.size(); ++i) {
                H.data()[i] = gb(rng);
            }
            params_[3 * l + 2].setZero();
        } else {
            std::normal_distribution<float> w(0.0f, std::sqrt(2.0f / in));
            auto& W = params_[2 * l];
            for (Eigen::Index i = 0; i < W.size(); ++i) {
                W.data()[i] = w(rng);
            }
            params_[2 * l + 1].setZero();
        }
    }
    // Zero output layer: the head starts at Q_p = 0, so the rescaling offsets
    // take up the per-scene score levels and the multipliers only see scale.
    const std::size_t last = dims_.size() - 2;
    const std::size_t stride = hyper_ ? 3 : 2;
    for (std::size_t k = 0; k < stride; ++k) {
        params_[stride * last + k].setZero();
    }
}

void QualityHead::generate(const Vector& semantic, std::size_t l, Matrix& w, Vector& b) const {
    const int in = dims_[l];
    const int out = dims_[l + 1];
    if (hyper_) {
        const Vector flat = params_[3 * l] * semantic;
        w = Eigen::Map<const Matrix>(flat.data(), out, in);
        b = params_[3 * l + 1] * semantic + params_[3 * l + 2].col(0);
    } else {
        w = params_[2 * l];
        b = params_[2 * l + 1].col(0);
    }
}

float QualityHead::forward(const Vector& content, const Vector& semantic, Cache* cache) const {
    if (content.size() != dims_.front()) {
        throw ShapeError("quality head: expected " + std::to_string(dims_.front()) + " content features, got " +
                         std::to_string(content.size()));
    }
    if (hyper_ && semantic.size() != semantic_dim_) {
        throw ShapeError("quality head: expected a " + std::to_string(semantic_dim_) + "-d semantic vector, got " +
                         std::to_string(semantic.size()));
    }
    Cache local;
    Cache& c = cache ? *cache : local;
    const std::size_t layers = dims_.size() - 1;
    c.weights.resize(layers);
    c.biases.resize(layers);
    c.acts.resize(layers);
    Vector x = content;
    for (std::size_t l = 0; l < layers; ++l) {
        generate(semantic, l, c.weights[l], c.biases[l]);
        if (!c.weights[l].allFinite() || !c.biases[l].allFinite()) {
            throw NumericError("quality head: non-finite generated parameters in target layer " + std::to_string(l));
        }
        c.acts[l] = x;
        Vector z = c.weights[l] * x + c.biases[l];
        if (!z.allFinite()) {
            throw NumericError("quality head: non-finite activation in target layer " + std::to_string(l));
        }
        if (l + 1 < layers) {
            x = z.unaryExpr([](float v) { return sigmoid(v); });
        } else {
            x = std::move(z);
        }
    }
    return x(0);
}

void QualityHead::backward(const Cache& cache, const Vector& semantic, float grad_out, std::span<Matrix> grads,
                           Vector& grad_content, Vector& grad_semantic) const {
    const std::size_t layers = dims_.size() - 1;
    grad_semantic = Vector::Zero(hyper_ ? semantic_dim_ : semantic.size());
    Vector gz = Vector::Constant(1, grad_out);
    for (std::size_t l = layers; l-- > 0;) {
        const Vector& x = cache.acts[l];
        const Matrix gw = gz * x.transpose();  // out x in
        if (hyper_) {
            const Eigen::Map<const Vector> gw_flat(gw.data(), gw.size());
            grads[3 * l].noalias() += gw_flat * semantic.transpose();
            grads[3 * l + 1].noalias() += gz * semantic.transpose();
            grads[3 * l + 2].col(0) += gz;
            grad_semantic.noalias() += params_[3 * l].transpose() * gw_flat;
            grad_semantic.noalias() += params_[3 * l + 1].transpose() * gz;
        } else {
            grads[2 * l] += gw;
            grads[2 * l + 1].col(0) += gz;
        }
        Vector gx = cache.weights[l].transpose() * gz;
        if (l > 0) {
            // x = sigmoid(z_{l-1})
            gx = gx.cwiseProduct(x.cwiseProduct((1.0f - x.array()).matrix()));
            gz = std::move(gx);
        } else {
            grad_content = std::move(gx);
        }
    }
}

void QualityHead::params(std::vector<ParamRef>& out, const std::string& prefix) {
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        const std::string p = prefix + "layer" + std::to_string(l) + ".";
        if (hyper_) {
            out.push_back({p + "weight_generator", ParamGroup::Heads, &params_[3 * l]});
            out.push_back({p + "bias_generator", ParamGroup::Heads, &params_[3 * l + 1]});
            out.push_back({p + "bias", ParamGroup::Heads, &params_[3 * l + 2]});
        } else {
            out.push_back({p + "weight", ParamGroup::Heads, &params_[2 * l]});
            out.push_back({p + "bias", ParamGroup::Heads, &params_[2 * l + 1]});
        }
    }
}

}  // namespace fhiqa::network
