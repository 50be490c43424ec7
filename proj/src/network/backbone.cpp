#include "fhiqa/network/backbone.hpp"

#include "fhiqa/errors.hpp"

namespace fhiqa::network {

FeatureMap to_feature_map(const cv::Mat& patch) {
    if (patch.empty() || patch.type() != CV_8UC3) {
        throw ShapeError("patch must be a non-empty 8-bit 3-channel raster");
    }
    FeatureMap map;
    map.height = patch.rows;
    map.width = patch.cols;
    map.data.resize(static_cast<Eigen::Index>(patch.rows) * patch.cols, 3);
    for (int y = 0; y < patch.rows; ++y) {
        const auto* row = patch.ptr<cv::Vec3b>(y);
        for (int x = 0; x < patch.cols; ++x) {
            float* d = map.data.row(static_cast<Eigen::Index>(y) * patch.cols + x).data();
            for (int c = 0; c < 3; ++c) {
                d[c] = static_cast<float>(row[x][c]) / 255.0f - 0.5f;
            }
        }
    }
    return map;
}

ToyBackbone::ToyBackbone()
    : convs{Conv2d(3, kWidths[0], 4, 4, 0), Conv2d(kWidths[0], kWidths[1], 3, 2, 1),
            Conv2d(kWidths[1], kWidths[2], 3, 2, 1)} {}

void ToyBackbone::init(std::mt19937_64& rng) {
    for (auto& c : convs) {
        c.init(rng);
    }
}

FeatureBundle ToyBackbone::forward(const FeatureMap& input, BackboneCache* cache) const {
    if (input.height % 16 != 0 || input.width % 16 != 0) {
        throw ShapeError("backbone input sides must be multiples of 16");
    }
    FeatureBundle bundle;
    FeatureMap centred = input;
    bundle.color = (input.data.colwise().sum() / static_cast<float>(input.data.rows())).transpose();
    centred.data.rowwise() -= bundle.color.transpose();
    bundle.content.resize(content_dim());
    Matrix local_col;
    const FeatureMap* x = &centred;
    int offset = 0;
    for (std::size_t s = 0; s < convs.size(); ++s) {
        Matrix& col = cache ? cache->cols[s] : local_col;
        FeatureMap y = convs[s].forward(*x, col);
        y.data = y.data.cwiseMax(0.0f);
        const Eigen::Index positions = y.data.rows();
        bundle.content.segment(offset, y.channels()) =
            (y.data.colwise().sum() / static_cast<float>(positions)).transpose();
        offset += y.channels();
        bundle.stages.push_back(std::move(y));
        x = &bundle.stages.back();
    }
    bundle.semantic = bundle.content.tail(kWidths[2]);
    if (cache) {
        cache->input = std::move(centred);
    }
    return bundle;
}

void ToyBackbone::backward(const BackboneCache& cache, const FeatureBundle& bundle, const Vector& grad_content,
                           const Vector& grad_semantic, std::span<Matrix> grads) const {
    Vector pooled_grad = grad_content;
    pooled_grad.tail(kWidths[2]) += grad_semantic;

    Matrix upstream;  // gradient arriving from the next stage, w.r.t. this stage's output
    int offset = content_dim();
    for (int s = static_cast<int>(convs.size()) - 1; s >= 0; --s) {
        const auto& out = bundle.stages[static_cast<std::size_t>(s)];
        const int ch = out.channels();
        offset -= ch;
        const Eigen::Index positions = out.data.rows();
        Matrix g(positions, ch);
        g.rowwise() = pooled_grad.segment(offset, ch).transpose() / static_cast<float>(positions);
        if (upstream.size() > 0) {
            g += upstream;
        }
        // ReLU mask
        g = (out.data.array() > 0.0f).select(g, 0.0f);

        const FeatureMap& in = s == 0 ? cache.input : bundle.stages[static_cast<std::size_t>(s - 1)];
        Matrix next;
        convs[static_cast<std::size_t>(s)].backward(in, cache.cols[static_cast<std::size_t>(s)], g,
                                                    grads[static_cast<std::size_t>(2 * s)],
                                                    grads[static_cast<std::size_t>(2 * s + 1)], s > 0 ? &next : nullptr);
        upstream = std::move(next);
    }
}

void ToyBackbone::params(std::vector<ParamRef>& out, const std::string& prefix) {
    for (std::size_t s = 0; s < convs.size(); ++s) {
        out.push_back({prefix + "conv" + std::to_string(s + 1) + ".weight", ParamGroup::Backbone, &convs[s].weight});
        out.push_back({prefix + "conv" + std::to_string(s + 1) + ".bias", ParamGroup::Backbone, &convs[s].bias});
    }
}

}  // namespace fhiqa::network
