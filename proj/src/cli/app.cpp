#include "fhiqa/cli/app.hpp"

#include "fhiqa/cli/config.hpp"
#include "fhiqa/dataset/manifest.hpp"
#include "fhiqa/dataset/piq23.hpp"
#include "fhiqa/dataset/split.hpp"
#include "fhiqa/dataset/synthetic.hpp"
#include "fhiqa/errors.hpp"
#include "fhiqa/evaluation/report.hpp"
#include "fhiqa/network/checkpoint.hpp"
#include "fhiqa/network/inference.hpp"
#include "fhiqa/training/trainer.hpp"
#include "fhiqa/util/csv.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <iostream>
#include <optional>
#include <set>

namespace fhiqa::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::size_t> workers;
    std::optional<std::string> output_dir;
    std::string log_level = "info";
};

RunConfig resolve_config(const Options& opt) {
    RunConfig config = opt.config_path.empty() ? RunConfig{} : load_run_config(opt.config_path);
    for (const auto& o : opt.overrides) {
        apply_override(config, o);
    }
    if (opt.workers) {
        set_config_value(config, "workers", std::to_string(*opt.workers));
    }
    if (opt.output_dir) {
        config.output_dir = *opt.output_dir;
    }
    return config;
}

fs::path require_path(const std::string& value, const std::string& key) {
    if (value.empty()) {
        throw ConfigError("no " + key + " given (set it in the config or on the command line)");
    }
    return value;
}

bool is_image_file(const fs::path& p) {
    static const std::set<std::string> exts = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp"};
    return exts.contains(util::to_lower(p.extension().string()));
}

int cmd_synth(const RunConfig& config, const std::string& out) {
    const auto opts = config.synthetic_options();
    const fs::path dir = out.empty() ? config.output_path() / "data" : fs::path(out);
    const auto truth = dataset::random_affine_truth(opts.n_scenes, opts.seed);
    const auto manifest = dataset::generate_synthetic_dataset(opts, truth, dir);
    std::cout << "wrote " << opts.n_scenes * opts.images_per_scene << " images, manifest " << manifest.string()
              << '\n';
    return kExitOk;
}

int cmd_split(const RunConfig& config, const std::string& out) {
    const auto manifest = dataset::load_manifest(require_path(config.dataset.manifest, "dataset.manifest"));
    const auto options = config.split_options();
    if (options.n_test_scenes == 0) {
        spdlog::warn("n_test_scenes is 0: the test side is empty");
    }
    const fs::path path = out.empty() ? config.output_path() / "split.txt" : fs::path(out);
    try {
        const auto result = dataset::generate_scene_split(manifest.images, options);
        if (path.has_parent_path()) {
            fs::create_directories(path.parent_path());
        }
        dataset::save_split(path, result.spec);
        std::cout << dataset::format_split_report(result.report);
        std::cout << "split written to " << path.string() << '\n';
    } catch (const ConstraintError& e) {
        std::cerr << e.what() << '\n';
        return kExitSplit;
    }
    return kExitOk;
}

int cmd_train(const RunConfig& config, const std::optional<std::string>& resume) {
    const auto manifest = dataset::load_manifest(require_path(config.dataset.manifest, "dataset.manifest"));
    const auto split = dataset::load_split(require_path(config.dataset.split_file, "dataset.split_file"));
    training::TrainOptions options;
    options.attribute = config.dataset.attribute;
    options.output_dir = config.output_path();
    options.workers = config.workers;
    if (resume) {
        options.resume_from = *resume;
    }
    fs::create_directories(options.output_dir);
    evaluation::write_text_file(options.output_dir / "config.json", dump_run_config(config));
    const auto result =
        training::run_training(manifest, split, config.model_config(), config.train_config(), options);
    std::cout << "best epoch " << result.state.best_epoch << ", validation median SRCC "
              << util::format_fixed(result.state.best_val_srcc, 4) << '\n';
    std::cout << "checkpoint " << result.best_checkpoint.string() << '\n';
    return kExitOk;
}

int cmd_eval(const RunConfig& config, const std::string& checkpoint, const std::string& out) {
    auto loaded = network::load_checkpoint(checkpoint);
    const auto& model = loaded.model;
    const auto manifest = dataset::load_manifest(require_path(config.dataset.manifest, "dataset.manifest"));
    const auto split = dataset::load_split(require_path(config.dataset.split_file, "dataset.split_file"));
    if (model.registry().ids() != split.train_scenes) {
        throw CheckpointError("checkpoint scene registry does not match the training side of " +
                              config.dataset.split_file);
    }
    if (split.test_scenes.empty()) {
        throw ConfigError("the split has no test scenes to evaluate");
    }
    const std::string& attribute = config.dataset.attribute;
    const bool face = dataset::is_face_attribute(attribute);

    std::vector<const dataset::AnnotatedImage*> images;
    for (const auto& img : manifest.images) {
        const bool test = std::find(split.test_scenes.begin(), split.test_scenes.end(), img.scene_id) !=
                          split.test_scenes.end();
        if (test && img.attribute_scores.contains(attribute)) {
            images.push_back(&img);
        }
    }
    if (images.empty()) {
        throw ConfigError("no test images carry attribute '" + attribute + "'");
    }
    std::vector<network::InferenceItem> items;
    for (const auto* img : images) {
        items.push_back({img->image_path, face ? img->face_region : std::nullopt});
    }
    const auto preds = network::predict_all(
        model, items, [&](std::size_t i) { return dataset::load_image(manifest.resolve(*images[i])); },
        config.eval_seed(), config.workers);

    std::vector<evaluation::Prediction> flat;
    std::vector<evaluation::PredictionRow> rows;
    std::vector<evaluation::SceneHistogram> histograms;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const double target = images[i]->attribute_scores.at(attribute);
        flat.push_back({images[i]->image_path, images[i]->scene_id, target, preds[i].final_score});
        rows.push_back({images[i]->image_path, images[i]->scene_id, target, preds[i].pre_quality,
                        preds[i].final_score});
    }
    for (const auto& scene : split.test_scenes) {
        std::vector<core::ClassProbVector> probs;
        for (std::size_t i = 0; i < images.size(); ++i) {
            if (images[i]->scene_id == scene) {
                probs.push_back(preds[i].class_probs);
            }
        }
        if (!probs.empty()) {
            histograms.push_back({scene, evaluation::class_distribution_histogram(probs, model.registry())});
        }
    }
    const auto records = evaluation::evaluate_predictions(flat, config.eval.model_name, attribute);
    const auto table = evaluation::build_benchmark_table(records, {config.eval.model_name}, {attribute},
                                                         config.eval.median_mode);

    const fs::path dir = out.empty() ? config.output_path() / "eval" : fs::path(out);
    fs::create_directories(dir);
    evaluation::write_text_file(dir / "predictions.csv", evaluation::format_predictions(rows));
    evaluation::write_text_file(dir / "metrics.csv", evaluation::format_metric_records(records));
    evaluation::write_text_file(dir / "averaged_correlation.csv", evaluation::format_averaged_correlations(records));
    evaluation::write_text_file(dir / "class_histogram.csv",
                                evaluation::format_histograms(histograms, model.registry()));
    evaluation::write_text_file(dir / "benchmark.csv", evaluation::format_benchmark_csv(table));
    const auto text = evaluation::format_benchmark_text(table);
    evaluation::write_text_file(dir / "benchmark.txt", text);
    for (const auto& r : table.excluded) {
        spdlog::warn("scene {} excluded from the medians (undefined metrics)", r.scene_id);
    }
    std::cout << text;
    return kExitOk;
}

int cmd_infer(const RunConfig& config, const std::string& checkpoint, const std::string& target,
              const std::string& out) {
    const auto loaded = network::load_checkpoint(checkpoint);
    std::vector<fs::path> paths;
    if (fs::is_directory(target)) {
        for (const auto& entry : fs::recursive_directory_iterator(target)) {
            if (entry.is_regular_file() && is_image_file(entry.path())) {
                paths.push_back(entry.path());
            }
        }
        std::sort(paths.begin(), paths.end());
    } else if (fs::exists(target)) {
        paths.emplace_back(target);
    } else {
        throw IoError("no such file or directory: " + target);
    }
    std::vector<network::InferenceItem> items;
    for (const auto& p : paths) {
        items.push_back({p.generic_string(), std::nullopt});
    }
    const auto preds = network::predict_all(
        loaded.model, items, [&](std::size_t i) { return dataset::load_image(paths[i]); }, config.eval_seed(),
        config.workers);

    const auto& registry = loaded.model.registry();
    std::string lines;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto sel = core::top_k_select(preds[i].class_probs, loaded.model.config().top_k);
        nlohmann::json j;
        j["image"] = paths[i].generic_string();
        j["q_p"] = preds[i].pre_quality;
        j["q_f"] = preds[i].final_score;
        j["top_k"] = nlohmann::json::array();
        for (std::size_t r = 0; r < sel.indices.size(); ++r) {
            j["top_k"].push_back({{"scene", registry.id(sel.indices[r])}, {"weight", sel.weights[r]}});
        }
        lines += j.dump() + "\n";
    }
    if (out.empty()) {
        std::cout << lines;
    } else {
        evaluation::write_text_file(out, lines);
    }
    return kExitOk;
}

int cmd_report(const RunConfig& config, const std::vector<std::string>& inputs, const std::string& out) {
    std::vector<evaluation::MetricRecord> records;
    std::vector<std::string> models;
    std::vector<std::string> attributes = evaluation::kDefaultAttributes;
    for (const auto& in : inputs) {
        for (auto& r : evaluation::parse_metric_records(evaluation::read_text_file(in))) {
            if (std::find(models.begin(), models.end(), r.model) == models.end()) {
                models.push_back(r.model);
            }
            if (std::find(attributes.begin(), attributes.end(), r.attribute) == attributes.end()) {
                attributes.push_back(r.attribute);
            }
            records.push_back(std::move(r));
        }
    }
    const auto table = evaluation::build_benchmark_table(records, models, attributes, config.eval.median_mode);
    const auto text = evaluation::format_benchmark_text(table);
    if (!out.empty()) {
        fs::create_directories(out);
        evaluation::write_text_file(fs::path(out) / "benchmark.csv", evaluation::format_benchmark_csv(table));
        evaluation::write_text_file(fs::path(out) / "benchmark.txt", text);
        evaluation::write_text_file(fs::path(out) / "averaged_correlation.csv",
                                    evaluation::format_averaged_correlations(records));
    }
    std::cout << text;
    return kExitOk;
}

int cmd_convert(const std::vector<std::string>& tables, const std::string& out) {
    std::vector<fs::path> paths(tables.begin(), tables.end());
    const auto images = dataset::convert_piq23_tables(paths);
    dataset::save_manifest(out, images);
    std::cout << "wrote " << images.size() << " images to " << out << '\n';
    return kExitOk;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConstraintError& e) {
        std::cerr << "constraint error: " << e.what() << '\n';
        return kExitSplit;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << '\n';
        return kExitCheckpoint;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Scene-aware blind portrait quality assessment"};
    app.require_subcommand(1);
    app.footer("\n" + describe_config_keys() + "\nEnvironment: $" + kOutputRootEnv +
               " is the root for relative output directories.\n"
               "Exit codes: 0 ok, 1 config error, 2 split constraint failure, 3 numeric failure, "
               "4 checkpoint mismatch.");

    Options opt;
    app.add_option("-c,--config", opt.config_path, "JSON run configuration");
    app.add_option("--set", opt.overrides, "override a config key: key=value (repeatable)");
    app.add_option("--workers", opt.workers, "worker threads");
    app.add_option("--output-dir", opt.output_dir, "output directory");
    app.add_option("--log-level", opt.log_level, "trace, debug, info, warn, error or off");

    std::function<int()> action;
    std::vector<std::string> key_flags;  // (key, value) pairs from subcommand flags
    auto flag_to_key = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        sub->add_option_function<std::string>(
            flag, [&key_flags, key](const std::string& v) { key_flags.push_back(key + "=" + v); }, help);
    };

    std::string out;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with known per-scene affines");
    synth->add_option("--out", out, "dataset directory (default <output_dir>/data)");
    flag_to_key(synth, "--n-scenes", "synth.n_scenes", "number of scenes");
    flag_to_key(synth, "--images-per-scene", "synth.images_per_scene", "images per scene");
    flag_to_key(synth, "--seed", "synth.seed", "generator seed");

    auto* split = app.add_subcommand("split", "generate a scene-disjoint train/test split");
    split->add_option("--out", out, "split file (default <output_dir>/split.txt)");
    flag_to_key(split, "--manifest", "dataset.manifest", "manifest CSV");
    flag_to_key(split, "--n-test", "dataset.n_test_scenes", "test scenes");
    flag_to_key(split, "--fraction", "dataset.target_fraction", "target test share");
    flag_to_key(split, "--tolerance", "dataset.fraction_tolerance", "allowed deviation");
    flag_to_key(split, "--seed", "dataset.split_seed", "search seed");

    std::optional<std::string> resume;
    auto* train = app.add_subcommand("train", "train a model on the training side of a split");
    train->add_option("--resume", resume, "continue from a last.ckpt");
    flag_to_key(train, "--manifest", "dataset.manifest", "manifest CSV");
    flag_to_key(train, "--split", "dataset.split_file", "split file");
    flag_to_key(train, "--attribute", "dataset.attribute", "attribute");

    std::string checkpoint;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test side of a split");
    eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval->add_option("--out", out, "output directory (default <output_dir>/eval)");
    flag_to_key(eval, "--manifest", "dataset.manifest", "manifest CSV");
    flag_to_key(eval, "--split", "dataset.split_file", "split file");
    flag_to_key(eval, "--attribute", "dataset.attribute", "attribute");
    flag_to_key(eval, "--model-name", "eval.model_name", "model label");

    std::string target;
    auto* infer = app.add_subcommand("infer", "score an image or every image under a directory (JSON lines)");
    infer->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    infer->add_option("path", target, "image file or directory")->required();
    infer->add_option("--out", out, "output file (default stdout)");

    std::vector<std::string> inputs;
    auto* report = app.add_subcommand("report", "build the benchmark table from metric CSVs");
    report->add_option("metrics", inputs, "metrics.csv files")->required();
    report->add_option("--out", out, "directory for benchmark.csv/.txt");

    auto* convert = app.add_subcommand("convert-piq23", "convert PIQ23 score tables to a manifest");
    convert->add_option("tables", inputs, "score CSVs")->required();
    convert->add_option("--out", out, "manifest path")->required();

    auto* show = app.add_subcommand("config", "print the resolved configuration");

    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    spdlog::set_level(spdlog::level::from_str(opt.log_level));
    return guarded([&]() -> int {
        RunConfig config = resolve_config(opt);
        for (const auto& kv : key_flags) {
            apply_override(config, kv);
        }
        if (synth->parsed()) {
            return cmd_synth(config, out);
        }
        if (split->parsed()) {
            return cmd_split(config, out);
        }
        if (train->parsed()) {
            return cmd_train(config, resume);
        }
        if (eval->parsed()) {
            return cmd_eval(config, checkpoint, out);
        }
        if (infer->parsed()) {
            return cmd_infer(config, checkpoint, target, out);
        }
        if (report->parsed()) {
            return cmd_report(config, inputs, out);
        }
        if (convert->parsed()) {
            return cmd_convert(inputs, out);
        }
        if (show->parsed()) {
            std::cout << dump_run_config(config);
            return kExitOk;
        }
        return kExitConfig;
    });
}

}  // namespace fhiqa::cli
