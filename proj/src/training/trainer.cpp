#include "fhiqa/training/trainer.hpp"

#include "fhiqa/core/aggregation.hpp"
#include "fhiqa/errors.hpp"
#include "fhiqa/evaluation/metrics.hpp"
#include "fhiqa/network/checkpoint.hpp"
#include "fhiqa/network/inference.hpp"
#include "fhiqa/network/model.hpp"
#include "fhiqa/training/adam.hpp"
#include "fhiqa/training/loss.hpp"
#include "fhiqa/util/csv.hpp"
#include "fhiqa/util/parallel.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

namespace fhiqa::training {

namespace {

struct Sample {
    std::string key;
    std::filesystem::path path;
    cv::Mat image;
    std::size_t scene = 0;
    double target = 0.0;
    std::optional<dataset::Rect> roi;
};

void dump_failure(const std::filesystem::path& dir, const TrainState& state, int epoch, std::size_t batch,
                  const std::string& message) {
    nlohmann::json j;
    j["error"] = message;
    j["epoch"] = epoch;
    j["batch"] = batch;
    j["completed_epochs"] = state.epoch;
    j["best_epoch"] = state.best_epoch;
    j["best_val_srcc"] = std::isfinite(state.best_val_srcc) ? nlohmann::json(state.best_val_srcc) : nlohmann::json();
    j["epochs_since_best"] = state.epochs_since_best;
    std::ofstream out(dir / "failure_state.json");
    out << j.dump(2) << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

double validation_srcc(const network::QualityModel& model, const std::vector<Sample>& val, std::uint64_t seed,
                       std::size_t workers) {
    std::vector<network::InferenceItem> items;
    for (const auto& s : val) {
        items.push_back({s.key, s.roi});
    }
    const auto preds = network::predict_all(model, items, [&](std::size_t i) { return val[i].image; }, seed, workers);
    std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> by_scene;
    for (std::size_t i = 0; i < val.size(); ++i) {
        auto& [p, t] = by_scene[val[i].scene];
        p.push_back(preds[i].final_score);
        t.push_back(val[i].target);
    }
    std::vector<double> srcc;
    for (const auto& [scene, pt] : by_scene) {
        try {
            srcc.push_back(evaluation::spearman(pt.first, pt.second));
        } catch (const DegenerateInputError&) {
            // constant predictions carry no ranking information
        }
    }
    if (srcc.empty()) {
        spdlog::warn("no validation scene has a defined SRCC; recording 0");
        return 0.0;
    }
    return evaluation::median_across_scenes(srcc);
}

}  // namespace

std::string format_train_metrics(const std::vector<EpochRecord>& history) {
    std::string out = std::string(kTrainMetricsHeader) + "\n";
    for (const auto& r : history) {
        out += std::to_string(r.epoch) + "," + util::format_fixed(r.train_loss, 6) + "," +
               util::format_fixed(r.huber, 6) + "," + util::format_fixed(r.ce, 6) + "," +
               util::format_fixed(r.val_median_srcc, 6) + "," + util::format_roundtrip(r.lr_backbone) + "," +
               util::format_roundtrip(r.lr_heads) + "\n";
    }
    return out;
}

std::vector<bool> validation_mask(const std::vector<std::size_t>& scene_of_image, double fraction,
                                  std::uint64_t seed) {
    std::map<std::size_t, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < scene_of_image.size(); ++i) {
        members[scene_of_image[i]].push_back(i);
    }
    std::vector<bool> mask(scene_of_image.size(), false);
    for (auto& [scene, idx] : members) {
        if (idx.size() < 4 || fraction <= 0.0) {
            continue;
        }
        std::mt19937_64 rng(util::mix_seed(seed, scene));
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
        n = std::clamp<std::size_t>(n, 2, idx.size() - 2);
        for (std::size_t j = 0; j < n; ++j) {
            mask[idx[j]] = true;
        }
    }
    return mask;
}

TrainResult run_training(const dataset::Manifest& manifest, const dataset::SplitSpec& split,
                         network::ModelConfig model_config, const TrainConfig& config, const TrainOptions& options) {
    config.validate();
    if (split.train_scenes.empty()) {
        throw ConstraintError("split has no training scenes");
    }
    for (const auto& s : split.train_scenes) {
        if (!manifest.registry.contains(s)) {
            throw ConstraintError("training scene '" + s + "' is not in the manifest");
        }
    }
    for (const auto& s : split.test_scenes) {
        if (!manifest.registry.contains(s)) {
            throw ConstraintError("test scene '" + s + "' is not in the manifest");
        }
    }
    for (const auto& s : split.test_scenes) {
        if (std::find(split.train_scenes.begin(), split.train_scenes.end(), s) != split.train_scenes.end()) {
            throw ConstraintError("scene '" + s + "' is on both sides of the split");
        }
    }
    std::filesystem::create_directories(options.output_dir);

    const core::SceneRegistry registry(split.train_scenes);
    const bool face = dataset::is_face_attribute(options.attribute);
    std::vector<Sample> samples;
    std::vector<std::size_t> scene_of;
    for (const auto& img : manifest.images) {
        const auto idx = registry.index_of(img.scene_id);
        const auto score = img.attribute_scores.find(options.attribute);
        if (!idx || score == img.attribute_scores.end()) {
            continue;
        }
        Sample s;
        s.key = img.image_path;
        s.path = manifest.resolve(img);
        s.scene = *idx;
        s.target = score->second;
        if (face) {
            s.roi = img.face_region;
        }
        samples.push_back(std::move(s));
        scene_of.push_back(*idx);
    }
    if (samples.empty()) {
        throw ConstraintError("no training images carry attribute '" + options.attribute + "'");
    }
    util::parallel_for(samples.size(), options.workers, [&](std::size_t i) {
        samples[i].image = dataset::load_image(samples[i].path);
    });

    const auto mask = validation_mask(scene_of, config.val_fraction, config.seed);
    std::vector<Sample> train, val;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (mask[i] ? val : train).push_back(std::move(samples[i]));
    }
    if (val.empty()) {
        throw ConstraintError("validation slice is empty (scenes need at least four images)");
    }
    spdlog::info("training on {} images, validating on {} images across {} scenes", train.size(), val.size(),
                 registry.count());

    model_config.num_scenes = registry.count();
    std::optional<network::QualityModel> model;
    TrainState state;
    std::optional<AdamState> adam_state;
    if (options.resume_from) {
        auto loaded = network::load_checkpoint(*options.resume_from);
        if (!(loaded.model.registry() == registry)) {
            throw CheckpointError("checkpoint scene registry does not match the split's training scenes");
        }
        model.emplace(std::move(loaded.model));
        state = std::move(loaded.state);
        adam_state = std::move(loaded.optimizer);
        spdlog::info("resuming after epoch {}", state.epoch);
    } else {
        model.emplace(model_config, registry);
    }

    auto params = model->parameters();
    Adam adam(params, config);
    if (adam_state) {
        adam.restore(std::move(*adam_state));
    }

    TrainResult result;
    result.best_checkpoint = options.output_dir / "best.ckpt";
    result.last_checkpoint = options.output_dir / "last.ckpt";
    result.metrics_csv = options.output_dir / "train_metrics.csv";
    result.split_file = options.output_dir / "split.txt";
    result.n_train_images = train.size();
    result.n_val_images = val.size();
    dataset::save_split(result.split_file, split);

    const core::TopKPolicy policy = model->config().top_k;
    const auto batch_size = static_cast<std::size_t>(config.batch_size);
    std::vector<std::size_t> order(train.size());

    while (state.epoch < config.max_epochs) {
        const int epoch = state.epoch;
        const double lr_b = lr_at_epoch(config.lr_backbone, epoch, config);
        const double lr_h = lr_at_epoch(config.lr_heads, epoch, config);
        const double lr_r = lr_at_epoch(config.lr_rescale.value_or(config.lr_heads), epoch, config);
        const std::uint64_t epoch_seed = util::mix_seed(config.seed, static_cast<std::uint64_t>(epoch) + 1);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(epoch_seed);
        std::shuffle(order.begin(), order.end(), rng);
        const auto patch_cfg = model->patch_config(epoch_seed);

        double sum_total = 0.0, sum_huber = 0.0, sum_ce = 0.0;
        for (std::size_t start = 0, batch = 0; start < order.size(); start += batch_size, ++batch) {
            const std::size_t n = std::min(batch_size, order.size() - start);
            const auto table = model->affine_table();
            std::vector<network::GradBuffer> grads(n);
            std::vector<LossComponents> losses(n);
            util::parallel_for(n, options.workers, [&](std::size_t j) {
                const auto& s = train[order[start + j]];
                const auto sample = dataset::sample_patches(s.image, patch_cfg, s.roi, s.key);
                const auto fwd = model->forward_train(sample.patches);
                const auto loss = image_loss(fwd.pre_quality, fwd.logits, table, policy, s.target, s.scene, config,
                                             config.teacher_forcing);
                losses[j] = loss.loss;
                grads[j] = model->zero_grads();
                if (!std::isfinite(loss.loss.total)) {
                    return;
                }
                network::ImageGradient up;
                up.d_pre_quality = loss.d_pre_quality;
                up.d_logits = loss.d_logits;
                up.d_multipliers = loss.d_multipliers;
                up.d_offsets = loss.d_offsets;
                model->backward(fwd, up, grads[j]);
            });
            for (std::size_t j = 0; j < n; ++j) {
                if (!std::isfinite(losses[j].total)) {
                    const std::string msg = "non-finite loss at epoch " + std::to_string(epoch) + " on image " +
                                            train[order[start + j]].key;
                    dump_failure(options.output_dir, state, epoch, batch, msg);
                    throw NumericError(msg);
                }
                sum_total += losses[j].total;
                sum_huber += losses[j].huber;
                sum_ce += losses[j].ce;
            }
            auto& acc = grads[0];
            for (std::size_t j = 1; j < n; ++j) {
                for (std::size_t p = 0; p < acc.size(); ++p) {
                    acc[p] += grads[j][p];
                }
            }
            const float scale = 1.0f / static_cast<float>(n);
            for (auto& g : acc) {
                g *= scale;
            }
            adam.step(params, acc, {lr_b, lr_h, lr_r});
        }

        const double val_srcc = validation_srcc(*model, val, config.seed, options.workers);
        const double count = static_cast<double>(train.size());
        EpochRecord rec{epoch, sum_total / count, sum_huber / count, sum_ce / count, val_srcc, lr_b, lr_h};
        if (!std::isfinite(val_srcc)) {
            const std::string msg = "non-finite validation SRCC at epoch " + std::to_string(epoch);
            dump_failure(options.output_dir, state, epoch, 0, msg);
            throw NumericError(msg);
        }
        auto decision = early_stop_update(std::move(state), val_srcc, config.patience);
        state = std::move(decision.state);
        state.rng_state = "seed=" + std::to_string(config.seed);
        state.history.push_back(rec);
        if (decision.improved) {
            network::save_checkpoint(result.best_checkpoint, *model, state);
        }
        auto snapshot = adam.state();
        network::save_checkpoint(result.last_checkpoint, *model, state, &snapshot);
        write_file(result.metrics_csv, format_train_metrics(state.history));
        spdlog::info("epoch {} loss {:.4f} (huber {:.4f}, ce {:.4f}) val median SRCC {:.4f}", epoch, rec.train_loss,
                     rec.huber, rec.ce, val_srcc);
        if (options.on_epoch) {
            options.on_epoch(rec);
        }
        if (decision.stop) {
            spdlog::info("early stop after epoch {} (best epoch {})", epoch, state.best_epoch);
            break;
        }
    }
    result.state = state;
    return result;
}

}  // namespace fhiqa::training
