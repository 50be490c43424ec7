#pragma once

#include "fhiqa/network/layers.hpp"

#include <span>
#include <vector>

namespace fhiqa::network {

// Scene classifier over the concatenated semantic vectors of all crops of an
// image: Linear -> ReLU -> Linear, softmax applied by the caller.
class SceneClassifier {
public:
    SceneClassifier() = default;
    SceneClassifier(int input_dim, int num_scenes);

    // One hidden layer of width 2 * input_dim, capped at 1024.
    static int hidden_width(int input_dim);

    void init(std::mt19937_64& rng);

    struct Cache {
        Vector input;
        Vector hidden;  // post-ReLU
    };

    Vector logits(const Vector& input, Cache* cache = nullptr) const;
    Vector backward(const Cache& cache, const Vector& grad_logits, std::span<Matrix> grads) const;

    static constexpr std::size_t param_count() { return 4; }
    void params(std::vector<ParamRef>& out, const std::string& prefix);

    Linear fc1;
    Linear fc2;
};

Vector softmax(const Vector& logits);

// Target MLP on the pooled content features. Hidden layers use sigmoid, the
// output layer is linear. In hypernetwork mode every weight of the target
// network is a linear function of the semantic vector,
//   W_l = reshape(G_l s),  b_l = H_l s + c_l,
// so a zero semantic vector leaves only the constant bias path. In probe
// mode the target network has its own fixed parameters.
class QualityHead {
public:
    QualityHead() = default;
    QualityHead(bool hypernetwork, int content_dim, int semantic_dim, std::vector<int> hidden);

    void init(std::mt19937_64& rng);

    bool is_hypernetwork() const { return hyper_; }
    const std::vector<int>& dims() const { return dims_; }

    struct Cache {
        std::vector<Matrix> weights;   // generated W_l (out x in)
        std::vector<Vector> biases;    // generated b_l
        std::vector<Vector> acts;      // layer inputs; acts[0] = content
    };

    // Throws NumericError naming the layer when a value is not finite.
    float forward(const Vector& content, const Vector& semantic, Cache* cache = nullptr) const;

    // Accumulates parameter gradients; writes dL/dcontent and dL/dsemantic.
    void backward(const Cache& cache, const Vector& semantic, float grad_out, std::span<Matrix> grads,
                  Vector& grad_content, Vector& grad_semantic) const;

    std::size_t param_count() const { return params_.size(); }
    void params(std::vector<ParamRef>& out, const std::string& prefix);

    // Per layer: hypernetwork -> {G_l, H_l, c_l}; probe -> {W_l, b_l}.
    std::vector<Matrix> params_;

private:
    std::size_t per_layer() const { return hyper_ ? 3 : 2; }
    void generate(const Vector& semantic, std::size_t layer, Matrix& w, Vector& b) const;

    bool hyper_ = true;
    int semantic_dim_ = 0;
    std::vector<int> dims_;  // content_dim, hidden..., 1
};

}  // namespace fhiqa::network
