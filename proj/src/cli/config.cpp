#include "fhiqa/cli/config.hpp"

#include "fhiqa/errors.hpp"
#include "fhiqa/evaluation/report.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace fhiqa::cli {

namespace {

using json = nlohmann::json;

struct Entry {
    ConfigKey doc;
    std::function<void(RunConfig&, const json&)> set;
    std::function<json(const RunConfig&)> get;
};

template <typename T>
T as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has a value of the wrong type: " + v.dump());
    }
}

std::uint64_t as_seed(const json& v, const std::string& key) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ConfigError("config key '" + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

double as_real(const json& v, const std::string& key) {
    if (!v.is_number()) {
        throw ConfigError("config key '" + key + "' must be a number");
    }
    return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError("config key '" + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

int as_int(const json& v, const std::string& key) {
    if (!v.is_number_integer()) {
        throw ConfigError("config key '" + key + "' must be an integer");
    }
    return v.get<int>();
}

json seed_json(const std::optional<std::uint64_t>& s) { return s ? json(*s) : json("run_seed"); }

std::optional<std::uint64_t> seed_value(const json& v, const std::string& key) {
    if (v.is_string() && v.get<std::string>() == "run_seed") {
        return std::nullopt;
    }
    return as_seed(v, key);
}

#define FHIQA_REAL(KEY, FIELD, HELP)                                                                     \
    Entry {                                                                                              \
        {KEY, "", HELP}, [](RunConfig& c, const json& v) { c.FIELD = as_real(v, KEY); },                 \
            [](const RunConfig& c) { return json(c.FIELD); }                                             \
    }
#define FHIQA_INT(KEY, FIELD, HELP)                                                                      \
    Entry {                                                                                              \
        {KEY, "", HELP}, [](RunConfig& c, const json& v) { c.FIELD = as_int(v, KEY); },                  \
            [](const RunConfig& c) { return json(c.FIELD); }                                             \
    }
#define FHIQA_COUNT(KEY, FIELD, HELP)                                                                    \
    Entry {                                                                                              \
        {KEY, "", HELP}, [](RunConfig& c, const json& v) { c.FIELD = as_count(v, KEY); },                \
            [](const RunConfig& c) { return json(c.FIELD); }                                             \
    }
#define FHIQA_STRING(KEY, FIELD, HELP)                                                                   \
    Entry {                                                                                              \
        {KEY, "", HELP}, [](RunConfig& c, const json& v) { c.FIELD = as<std::string>(v, KEY); },         \
            [](const RunConfig& c) { return json(c.FIELD); }                                             \
    }
#define FHIQA_BOOL(KEY, FIELD, HELP)                                                                     \
    Entry {                                                                                              \
        {KEY, "", HELP}, [](RunConfig& c, const json& v) {                                               \
            if (!v.is_boolean()) {                                                                       \
                throw ConfigError("config key '" KEY "' must be true or false");                         \
            }                                                                                            \
            c.FIELD = v.get<bool>();                                                                     \
        },                                                                                               \
            [](const RunConfig& c) { return json(c.FIELD); }                                             \
    }
#define FHIQA_SEED(KEY, FIELD, HELP)                                                                     \
    Entry {                                                                                              \
        {KEY, "", HELP}, [](RunConfig& c, const json& v) { c.FIELD = seed_value(v, KEY); },              \
            [](const RunConfig& c) { return seed_json(c.FIELD); }                                        \
    }

std::vector<Entry> make_entries() {
    std::vector<Entry> e = {
        Entry{{"run_seed", "", "master seed; section seeds set to \"run_seed\" follow it"},
              [](RunConfig& c, const json& v) { c.run_seed = as_seed(v, "run_seed"); },
              [](const RunConfig& c) { return json(c.run_seed); }},
        FHIQA_STRING("output_dir", output_dir, "output directory (relative paths resolve against $FHIQA_OUTPUT_ROOT)"),
        Entry{{"workers", "", "worker threads for decoding and per-image passes"},
              [](RunConfig& c, const json& v) {
                  c.workers = as_count(v, "workers");
                  if (c.workers == 0) {
                      throw ConfigError("config key 'workers' must be at least 1");
                  }
              },
              [](const RunConfig& c) { return json(c.workers); }},

        FHIQA_STRING("dataset.manifest", dataset.manifest, "manifest CSV"),
        FHIQA_STRING("dataset.split_file", dataset.split_file, "split file used by train/eval"),
        FHIQA_STRING("dataset.attribute", dataset.attribute, "attribute to train/evaluate (Overall, Exposure, Details)"),
        FHIQA_COUNT("dataset.n_test_scenes", dataset.n_test_scenes, "scenes on the test side"),
        FHIQA_REAL("dataset.target_fraction", dataset.target_fraction, "target share of images on the test side"),
        FHIQA_REAL("dataset.fraction_tolerance", dataset.fraction_tolerance, "allowed deviation from the target share"),
        FHIQA_SEED("dataset.split_seed", dataset.split_seed, "split search seed"),
        FHIQA_COUNT("dataset.max_attempts", dataset.max_attempts, "randomized restarts of the split search"),

        FHIQA_INT("synth.n_scenes", synth.n_scenes, "synthetic scenes"),
        FHIQA_INT("synth.images_per_scene", synth.images_per_scene, "synthetic images per scene"),
        FHIQA_INT("synth.image_size", synth.image_size, "synthetic image side in pixels"),
        FHIQA_REAL("synth.max_blur_sigma", synth.max_blur_sigma, "blur sigma of the worst synthetic image"),
        FHIQA_SEED("synth.seed", synth.seed, "synthetic generator seed"),

        Entry{{"model.backbone", "", "toy_cnn (resnet50_pretrained is rejected: no pretrained weights)"},
              [](RunConfig& c, const json& v) {
                  c.model.backbone = network::parse_backbone(as<std::string>(v, "model.backbone"));
              },
              [](const RunConfig& c) { return json(network::to_string(c.model.backbone)); }},
        FHIQA_INT("model.input_size", model.input_size, "patch side, a multiple of 224"),
        FHIQA_INT("model.patches_per_image", model.patches_per_image, "crops per image"),
        Entry{{"model.top_k", "", "scenes entering the weighted rescaling"},
              [](RunConfig& c, const json& v) { c.model.top_k = core::TopKPolicy(as_count(v, "model.top_k")); },
              [](const RunConfig& c) { return json(c.model.top_k.k); }},
        Entry{{"model.hyper_head", "", "hypernetwork or linear_probe"},
              [](RunConfig& c, const json& v) {
                  c.model.hyper_head = network::parse_head(as<std::string>(v, "model.hyper_head"));
              },
              [](const RunConfig& c) { return json(network::to_string(c.model.hyper_head)); }},
        Entry{{"model.target_hidden", "", "hidden widths of the quality MLP"},
              [](RunConfig& c, const json& v) {
                  if (!v.is_array()) {
                      throw ConfigError("config key 'model.target_hidden' must be a list of integers");
                  }
                  std::vector<int> widths;
                  for (const auto& w : v) {
                      widths.push_back(as_int(w, "model.target_hidden"));
                  }
                  c.model.target_hidden = widths;
              },
              [](const RunConfig& c) { return json(c.model.target_hidden); }},
        FHIQA_SEED("model.init_seed", model_init_seed, "weight initialisation seed"),

        FHIQA_INT("train.max_epochs", train.max_epochs, "epoch budget"),
        FHIQA_REAL("train.lr_backbone", train.lr_backbone, "backbone learning rate"),
        FHIQA_REAL("train.lr_heads", train.lr_heads, "classifier and quality head learning rate"),
        Entry{{"train.lr_rescale", "", "rescaling layer learning rate (\"lr_heads\" follows train.lr_heads)"},
              [](RunConfig& c, const json& v) {
                  if (v.is_string() && v.get<std::string>() == "lr_heads") {
                      c.train.lr_rescale.reset();
                  } else {
                      c.train.lr_rescale = as_real(v, "train.lr_rescale");
                  }
              },
              [](const RunConfig& c) { return c.train.lr_rescale ? json(*c.train.lr_rescale) : json("lr_heads"); }},
        FHIQA_INT("train.decay_every", train.decay_every, "epochs between learning-rate decays"),
        FHIQA_REAL("train.decay_factor", train.decay_factor, "learning-rate decay factor"),
        Entry{{"train.decay_mode", "", "complement (x(1-f)) or literal (xf)"},
              [](RunConfig& c, const json& v) {
                  c.train.decay_mode = training::parse_decay_mode(as<std::string>(v, "train.decay_mode"));
              },
              [](const RunConfig& c) { return json(training::to_string(c.train.decay_mode)); }},
        FHIQA_INT("train.patience", train.patience, "early-stopping patience in epochs"),
        FHIQA_REAL("train.huber_delta", train.huber_delta, "Huber loss threshold"),
        FHIQA_REAL("train.loss_weight_quality", train.loss_weight_quality, "weight of the quality loss"),
        FHIQA_REAL("train.loss_weight_class", train.loss_weight_class, "weight of the scene cross-entropy"),
        FHIQA_INT("train.batch_size", train.batch_size, "images per optimizer step"),
        FHIQA_SEED("train.seed", train_seed, "shuffling, crop and validation-slice seed"),
        FHIQA_REAL("train.val_fraction", train.val_fraction, "share of each training scene held out for validation"),
        FHIQA_BOOL("train.teacher_forcing", train.teacher_forcing, "rescale with the true scene during training"),
        FHIQA_REAL("train.adam_beta1", train.adam_beta1, "Adam first-moment decay"),
        FHIQA_REAL("train.adam_beta2", train.adam_beta2, "Adam second-moment decay"),
        FHIQA_REAL("train.adam_epsilon", train.adam_epsilon, "Adam epsilon"),

        FHIQA_STRING("eval.model_name", eval.model_name, "model label in metric files"),
        Entry{{"eval.median_mode", "", "standard or lower (even scene counts)"},
              [](RunConfig& c, const json& v) {
                  const auto s = as<std::string>(v, "eval.median_mode");
                  if (s == "standard") {
                      c.eval.median_mode = evaluation::MedianMode::Standard;
                  } else if (s == "lower") {
                      c.eval.median_mode = evaluation::MedianMode::Lower;
                  } else {
                      throw ConfigError("config key 'eval.median_mode' must be standard or lower");
                  }
              },
              [](const RunConfig& c) {
                  return json(c.eval.median_mode == evaluation::MedianMode::Standard ? "standard" : "lower");
              }},
        FHIQA_SEED("eval.seed", eval.seed, "crop seed at evaluation and inference"),
    };
    const RunConfig defaults;
    for (auto& entry : e) {
        entry.doc.default_value = entry.get(defaults).dump();
    }
    return e;
}

#undef FHIQA_REAL
#undef FHIQA_INT
#undef FHIQA_COUNT
#undef FHIQA_STRING
#undef FHIQA_BOOL
#undef FHIQA_SEED

const std::vector<Entry>& entries() {
    static const std::vector<Entry> e = make_entries();
    return e;
}

const Entry& find_entry(const std::string& key) {
    for (const auto& e : entries()) {
        if (e.doc.key == key) {
            return e;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

void flatten(const json& node, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
    for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it.value().is_object()) {
            flatten(it.value(), key, out);
        } else {
            out.emplace_back(key, it.value());
        }
    }
}

}  // namespace

dataset::SplitOptions RunConfig::split_options() const {
    dataset::SplitOptions o;
    o.n_test_scenes = dataset.n_test_scenes;
    o.target_fraction = dataset.target_fraction;
    o.fraction_tolerance = dataset.fraction_tolerance;
    o.seed = dataset.split_seed.value_or(run_seed);
    o.max_attempts = dataset.max_attempts;
    return o;
}

dataset::SyntheticOptions RunConfig::synthetic_options() const {
    dataset::SyntheticOptions o;
    o.n_scenes = synth.n_scenes;
    o.images_per_scene = synth.images_per_scene;
    o.image_size = synth.image_size;
    o.max_blur_sigma = synth.max_blur_sigma;
    o.seed = synth.seed.value_or(run_seed);
    return o;
}

network::ModelConfig RunConfig::model_config() const {
    auto m = model;
    m.init_seed = model_init_seed.value_or(run_seed);
    return m;
}

training::TrainConfig RunConfig::train_config() const {
    auto t = train;
    t.seed = train_seed.value_or(run_seed);
    return t;
}

std::filesystem::path RunConfig::output_path() const {
    std::filesystem::path p(output_dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
            return std::filesystem::path(root) / p;
        }
    }
    return p;
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        for (const auto& e : entries()) {
            k.push_back(e.doc);
        }
        return k;
    }();
    return keys;
}

std::string describe_config_keys() {
    std::size_t width = 0;
    for (const auto& k : config_keys()) {
        width = std::max(width, k.key.size() + k.default_value.size() + 3);
    }
    std::ostringstream out;
    out << "Config keys (default in brackets):\n";
    for (const auto& k : config_keys()) {
        std::string head = k.key + " [" + k.default_value + "]";
        head.resize(width, ' ');
        out << "  " << head << "  " << k.help << '\n';
    }
    return out.str();
}

void apply_config_text(RunConfig& config, const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return;
    }
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    std::vector<std::pair<std::string, json>> flat;
    flatten(doc, "", flat);
    for (const auto& [key, value] : flat) {
        find_entry(key).set(config, value);
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    RunConfig config;
    apply_config_text(config, text.str());
    return config;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& json_value) {
    const auto& entry = find_entry(key);
    json v;
    try {
        v = json::parse(json_value);
    } catch (const json::parse_error&) {
        v = json_value;
    }
    entry.set(config, v);
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    }
    set_config_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::string dump_run_config(const RunConfig& config) {
    json doc = json::object();
    for (const auto& e : entries()) {
        const auto& key = e.doc.key;
        json* node = &doc;
        std::size_t start = 0;
        for (std::size_t dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start)) {
            node = &(*node)[key.substr(start, dot - start)];
            start = dot + 1;
        }
        (*node)[key.substr(start)] = e.get(config);
    }
    return doc.dump(2) + "\n";
}

}  // namespace fhiqa::cli
