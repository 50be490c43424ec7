#include "fhiqa/network/model.hpp"

#include "fhiqa/errors.hpp"

#include <cmath>
#include <random>

namespace fhiqa::network {

namespace {

// Per patch: the semantic features followed by the colour means.
constexpr int kClassifierFeatures = ToyBackbone::semantic_dim() + ToyBackbone::color_dim();

Vector classifier_input(std::span<const FeatureBundle> bundles) {
    Vector input(kClassifierFeatures * static_cast<Eigen::Index>(bundles.size()));
    for (std::size_t p = 0; p < bundles.size(); ++p) {
        const Eigen::Index at = static_cast<Eigen::Index>(p) * kClassifierFeatures;
        input.segment(at, ToyBackbone::semantic_dim()) = bundles[p].semantic;
        input.segment(at + ToyBackbone::semantic_dim(), ToyBackbone::color_dim()) = bundles[p].color;
    }
    return input;
}

}  // namespace

QualityModel::QualityModel(ModelConfig config, core::SceneRegistry registry)
    : config_(std::move(config)), registry_(std::move(registry)) {
    if (config_.num_scenes == 0) {
        config_.num_scenes = registry_.count();
    }
    config_.validate();
    if (config_.num_scenes != registry_.count()) {
        throw ConfigError("model config declares " + std::to_string(config_.num_scenes) +
                          " scenes but the registry holds " + std::to_string(registry_.count()));
    }
    const int scenes = static_cast<int>(registry_.count());
    classifier = SceneClassifier(kClassifierFeatures * config_.patches_per_image, scenes);
    head = QualityHead(config_.hyper_head == HeadKind::Hypernetwork, ToyBackbone::content_dim(),
                       ToyBackbone::semantic_dim(), config_.target_hidden);
    rescale_multipliers = Matrix::Ones(scenes, 1);
    rescale_offsets = Matrix::Zero(scenes, 1);

    std::mt19937_64 rng(config_.init_seed);
    backbone.init(rng);
    classifier.init(rng);
    head.init(rng);
}

core::SceneAffineTable QualityModel::affine_table() const {
    const auto s = static_cast<std::size_t>(rescale_multipliers.rows());
    std::vector<double> a(s), b(s);
    for (std::size_t i = 0; i < s; ++i) {
        a[i] = rescale_multipliers(static_cast<Eigen::Index>(i), 0);
        b[i] = rescale_offsets(static_cast<Eigen::Index>(i), 0);
    }
    return core::SceneAffineTable(std::move(a), std::move(b));
}

void QualityModel::set_affine_table(const core::SceneAffineTable& table) {
    if (table.size() != registry_.count()) {
        throw ShapeError("affine table size does not match the scene registry");
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
        rescale_multipliers(static_cast<Eigen::Index>(i), 0) = static_cast<float>(table.multiplier(i));
        rescale_offsets(static_cast<Eigen::Index>(i), 0) = static_cast<float>(table.offset(i));
    }
}

dataset::PatchConfig QualityModel::patch_config(std::uint64_t seed) const {
    dataset::PatchConfig pc;
    pc.patch_size = config_.input_size;
    pc.patches_per_image = config_.patches_per_image;
    pc.seed = seed;
    pc.custom_pairing = true;
    return pc;
}

void QualityModel::check_patch(const cv::Mat& patch) const {
    if (patch.rows != config_.input_size || patch.cols != config_.input_size) {
        throw ShapeError("patch is " + std::to_string(patch.cols) + "x" + std::to_string(patch.rows) + ", expected " +
                         std::to_string(config_.input_size) + "x" + std::to_string(config_.input_size));
    }
}

FeatureBundle QualityModel::extract_features(const cv::Mat& patch) const {
    check_patch(patch);
    return backbone.forward(to_feature_map(patch));
}

std::vector<double> QualityModel::classify_logits(std::span<const FeatureBundle> bundles) const {
    if (static_cast<int>(bundles.size()) != config_.patches_per_image) {
        throw ShapeError("classifier expects " + std::to_string(config_.patches_per_image) + " crops, got " +
                         std::to_string(bundles.size()));
    }
    const Vector z = classifier.logits(classifier_input(bundles));
    return std::vector<double>(z.data(), z.data() + z.size());
}

namespace {

core::ClassProbVector softmax_probs(const std::vector<double>& logits) {
    double m = logits.front();
    for (double v : logits) {
        m = std::max(m, v);
    }
    std::vector<double> p(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        total += p[i];
    }
    for (double& v : p) {
        v /= total;
    }
    return core::ClassProbVector(std::move(p));
}

}  // namespace

core::ClassProbVector QualityModel::classify_scene(std::span<const FeatureBundle> bundles) const {
    return softmax_probs(classify_logits(bundles));
}

double QualityModel::predict_pre_quality(const FeatureBundle& bundle) const {
    return static_cast<double>(head.forward(bundle.content, bundle.semantic));
}

core::QualityPrediction QualityModel::forward_patches(std::span<const cv::Mat> patches) const {
    return forward_patches(patches, affine_table());
}

core::QualityPrediction QualityModel::forward_patches(std::span<const cv::Mat> patches,
                                                      const core::SceneAffineTable& table) const {
    std::vector<FeatureBundle> bundles;
    std::vector<double> scores;
    bundles.reserve(patches.size());
    for (const auto& p : patches) {
        bundles.push_back(extract_features(p));
        scores.push_back(predict_pre_quality(bundles.back()));
    }
    const auto probs = classify_scene(bundles);
    return core::aggregate_image_from_patches(scores, probs, table, config_.top_k);
}

ImageForward QualityModel::forward_train(std::span<const cv::Mat> patches) const {
    if (static_cast<int>(patches.size()) != config_.patches_per_image) {
        throw ShapeError("expected " + std::to_string(config_.patches_per_image) + " patches, got " +
                         std::to_string(patches.size()));
    }
    ImageForward f;
    f.backbone.resize(patches.size());
    f.heads.resize(patches.size());
    for (std::size_t p = 0; p < patches.size(); ++p) {
        check_patch(patches[p]);
        f.bundles.push_back(backbone.forward(to_feature_map(patches[p]), &f.backbone[p]));
        f.patch_scores.push_back(
            static_cast<double>(head.forward(f.bundles[p].content, f.bundles[p].semantic, &f.heads[p])));
    }
    double sum = 0.0;
    for (double q : f.patch_scores) {
        sum += q;
    }
    f.pre_quality = sum / static_cast<double>(f.patch_scores.size());

    const Vector z = classifier.logits(classifier_input(f.bundles), &f.classifier);
    f.logits.assign(z.data(), z.data() + z.size());
    for (double v : f.logits) {
        if (!std::isfinite(v)) {
            throw NumericError("scene classifier produced a non-finite logit");
        }
    }
    f.probs = softmax_probs(f.logits);
    return f;
}

void QualityModel::backward(const ImageForward& f, const ImageGradient& up, GradBuffer& grads) const {
    const std::size_t bb = ToyBackbone::param_count();
    const std::size_t cl = SceneClassifier::param_count();
    const std::size_t hd = head.param_count();
    std::span<Matrix> all(grads);
    auto g_backbone = all.subspan(0, bb);
    auto g_classifier = all.subspan(bb, cl);
    auto g_head = all.subspan(bb + cl, hd);
    Matrix& g_a = grads[bb + cl + hd];
    Matrix& g_b = grads[bb + cl + hd + 1];

    for (std::size_t i = 0; i < up.d_multipliers.size(); ++i) {
        g_a(static_cast<Eigen::Index>(i), 0) += static_cast<float>(up.d_multipliers[i]);
        g_b(static_cast<Eigen::Index>(i), 0) += static_cast<float>(up.d_offsets[i]);
    }

    Vector gz(static_cast<Eigen::Index>(up.d_logits.size()));
    for (std::size_t i = 0; i < up.d_logits.size(); ++i) {
        gz(static_cast<Eigen::Index>(i)) = static_cast<float>(up.d_logits[i]);
    }
    const Vector g_input = classifier.backward(f.classifier, gz, g_classifier);

    const int d = ToyBackbone::semantic_dim();
    const float g_patch = static_cast<float>(up.d_pre_quality / static_cast<double>(f.patch_scores.size()));
    for (std::size_t p = 0; p < f.bundles.size(); ++p) {
        Vector g_content, g_semantic;
        head.backward(f.heads[p], f.bundles[p].semantic, g_patch, g_head, g_content, g_semantic);
        if (!head.is_hypernetwork()) {
            g_semantic = Vector::Zero(d);
        }
        g_semantic += g_input.segment(static_cast<Eigen::Index>(p) * kClassifierFeatures, d);
        backbone.backward(f.backbone[p], f.bundles[p], g_content, g_semantic, g_backbone);
    }
}

std::vector<ParamRef> QualityModel::parameters() {
    std::vector<ParamRef> out;
    backbone.params(out, "backbone.");
    classifier.params(out, "classifier.");
    head.params(out, "head.");
    out.push_back({"rescale.multipliers", ParamGroup::Rescale, &rescale_multipliers});
    out.push_back({"rescale.offsets", ParamGroup::Rescale, &rescale_offsets});
    return out;
}

GradBuffer QualityModel::zero_grads() const {
    auto& self = const_cast<QualityModel&>(*this);
    GradBuffer g;
    for (const auto& p : self.parameters()) {
        g.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
    return g;
}

core::QualityPrediction forward_image(const QualityModel& model, const cv::Mat& image, std::string_view image_key,
                                      const std::optional<dataset::Rect>& roi, std::uint64_t seed) {
    return forward_image(model, image, image_key, roi, seed, model.affine_table());
}

core::QualityPrediction forward_image(const QualityModel& model, const cv::Mat& image, std::string_view image_key,
                                      const std::optional<dataset::Rect>& roi, std::uint64_t seed,
                                      const core::SceneAffineTable& table) {
    const auto sample = dataset::sample_patches(image, model.patch_config(seed), roi, image_key);
    return model.forward_patches(sample.patches, table);
}

}  // namespace fhiqa::network
