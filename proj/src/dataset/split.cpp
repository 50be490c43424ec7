#include "fhiqa/dataset/split.hpp"

#include "fhiqa/errors.hpp"
#include "fhiqa/util/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fhiqa::dataset {

namespace fs = std::filesystem;

namespace {

struct SceneInfo {
    std::string id;
    std::size_t lighting_class = 0;
    std::size_t images = 0;
};

struct SceneTable {
    std::vector<SceneInfo> scenes;
    std::vector<std::string> lighting_names;  // sorted
    std::vector<std::size_t> class_images;
    std::vector<std::size_t> class_scenes;
    std::size_t total_images = 0;
};

SceneTable build_scene_table(const std::vector<AnnotatedImage>& images) {
    SceneTable table;
    std::unordered_map<std::string, std::size_t> scene_index;
    std::unordered_set<std::string> seen_paths;
    std::vector<std::string> scene_lighting;
    for (const auto& img : images) {
        if (!seen_paths.insert(img.image_path.generic_string()).second) {
            continue;
        }
        auto [it, inserted] = scene_index.emplace(img.scene_id, table.scenes.size());
        if (inserted) {
            table.scenes.push_back({img.scene_id, 0, 0});
            scene_lighting.push_back(img.lighting);
        }
        ++table.scenes[it->second].images;
        ++table.total_images;
    }
    std::set<std::string> names(scene_lighting.begin(), scene_lighting.end());
    table.lighting_names.assign(names.begin(), names.end());
    table.class_images.assign(names.size(), 0);
    table.class_scenes.assign(names.size(), 0);
    for (std::size_t i = 0; i < table.scenes.size(); ++i) {
        const auto c = static_cast<std::size_t>(
            std::lower_bound(table.lighting_names.begin(), table.lighting_names.end(), scene_lighting[i]) -
            table.lighting_names.begin());
        table.scenes[i].lighting_class = c;
        table.class_images[c] += table.scenes[i].images;
        ++table.class_scenes[c];
    }
    return table;
}

// Constraint violation and distance to target for one candidate.
struct Score {
    double violation = 0.0;
    double distance = 0.0;

    bool better_than(const Score& other) const {
        constexpr double eps = 1e-15;
        if (violation < other.violation - eps) {
            return true;
        }
        if (violation > other.violation + eps) {
            return false;
        }
        return distance < other.distance - eps;
    }
};

class Evaluator {
public:
    Evaluator(const SceneTable& table, const SplitOptions& options) : table_(table), options_(options) {}

    Score score(std::size_t test_images, const std::vector<std::size_t>& class_test_images) const {
        Score s;
        const double t = options_.target_fraction;
        const double f = static_cast<double>(test_images) / static_cast<double>(table_.total_images);
        s.distance = std::abs(f - t);
        s.violation = std::max(0.0, s.distance - options_.fraction_tolerance);
        for (std::size_t c = 0; c < class_test_images.size(); ++c) {
            if (table_.class_scenes[c] < 2 || table_.class_images[c] == 0) {
                continue;
            }
            const double fc = static_cast<double>(class_test_images[c]) / table_.class_images[c];
            s.violation += std::max(0.0, std::abs(fc - t) - 2.0 * options_.fraction_tolerance);
        }
        return s;
    }

private:
    const SceneTable& table_;
    const SplitOptions& options_;
};

SplitSpec make_spec(const SceneTable& table, const std::vector<char>& in_test, std::uint64_t seed) {
    SplitSpec spec;
    spec.seed = seed;
    for (std::size_t i = 0; i < table.scenes.size(); ++i) {
        (in_test[i] ? spec.test_scenes : spec.train_scenes).push_back(table.scenes[i].id);
    }
    return spec;
}

}  // namespace

SplitReport describe_split(const std::vector<AnnotatedImage>& images, const SplitSpec& spec) {
    const auto table = build_scene_table(images);
    std::unordered_set<std::string> test(spec.test_scenes.begin(), spec.test_scenes.end());
    SplitReport report;
    report.total_images = table.total_images;
    report.lighting.resize(table.lighting_names.size());
    for (std::size_t c = 0; c < table.lighting_names.size(); ++c) {
        auto& lb = report.lighting[c];
        lb.lighting = table.lighting_names[c];
        lb.scenes = table.class_scenes[c];
        lb.images = table.class_images[c];
        lb.constrained = lb.scenes >= 2;
    }
    for (const auto& scene : table.scenes) {
        if (test.contains(scene.id)) {
            report.test_images += scene.images;
            report.lighting[scene.lighting_class].test_images += scene.images;
            ++report.lighting[scene.lighting_class].test_scenes;
        }
    }
    return report;
}

SplitResult generate_scene_split(const std::vector<AnnotatedImage>& images, const SplitOptions& options) {
    const auto table = build_scene_table(images);
    const std::size_t n = table.scenes.size();

    if (options.n_test_scenes == 0) {
        SplitResult result{make_spec(table, std::vector<char>(n, 0), options.seed), {}};
        result.report = describe_split(images, result.spec);
        return result;
    }
    if (options.n_test_scenes >= n) {
        throw RangeError("split: n_test_scenes (" + std::to_string(options.n_test_scenes) +
                         ") must be smaller than the number of scenes (" + std::to_string(n) + ")");
    }
    if (!(options.target_fraction > 0.0 && options.target_fraction < 1.0)) {
        throw RangeError("split: target fraction must lie in (0, 1)");
    }
    if (!(options.fraction_tolerance >= 0.0)) {
        throw RangeError("split: fraction tolerance must be non-negative");
    }

    const Evaluator eval(table, options);
    std::mt19937_64 rng(options.seed);

    std::vector<char> best_assignment;
    Score best_score{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};

    std::vector<std::size_t> order(n);
    const std::size_t classes = table.lighting_names.size();
    const std::size_t attempts = std::max<std::size_t>(1, options.max_attempts);

    for (std::size_t attempt = 1; attempt <= attempts; ++attempt) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);

        std::vector<char> in_test(n, 0);
        std::size_t test_images = 0;
        std::vector<std::size_t> class_test(classes, 0);
        for (std::size_t j = 0; j < options.n_test_scenes; ++j) {
            const auto& s = table.scenes[order[j]];
            in_test[order[j]] = 1;
            test_images += s.images;
            class_test[s.lighting_class] += s.images;
        }
        Score current = eval.score(test_images, class_test);

        // Steepest-descent over single test<->train swaps.
        for (;;) {
            Score best_swap = current;
            std::size_t swap_out = n, swap_in = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (!in_test[i]) {
                    continue;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    if (in_test[j]) {
                        continue;
                    }
                    const auto& out_scene = table.scenes[i];
                    const auto& in_scene = table.scenes[j];
                    class_test[out_scene.lighting_class] -= out_scene.images;
                    class_test[in_scene.lighting_class] += in_scene.images;
                    const Score cand = eval.score(test_images - out_scene.images + in_scene.images, class_test);
                    class_test[in_scene.lighting_class] -= in_scene.images;
                    class_test[out_scene.lighting_class] += out_scene.images;
                    if (cand.better_than(best_swap)) {
                        best_swap = cand;
                        swap_out = i;
                        swap_in = j;
                    }
                }
            }
            if (swap_out == n) {
                break;
            }
            const auto& out_scene = table.scenes[swap_out];
            const auto& in_scene = table.scenes[swap_in];
            in_test[swap_out] = 0;
            in_test[swap_in] = 1;
            test_images = test_images - out_scene.images + in_scene.images;
            class_test[out_scene.lighting_class] -= out_scene.images;
            class_test[in_scene.lighting_class] += in_scene.images;
            current = best_swap;
        }

        if (current.better_than(best_score)) {
            best_score = current;
            best_assignment = in_test;
        }
        if (current.violation == 0.0) {
            SplitResult result{make_spec(table, in_test, options.seed), {}};
            result.report = describe_split(images, result.spec);
            result.report.attempts = attempt;
            return result;
        }
    }

    const auto best_spec = make_spec(table, best_assignment, options.seed);
    auto report = describe_split(images, best_spec);
    report.attempts = attempts;
    std::ostringstream msg;
    msg << "split: no split satisfies the constraints after " << attempts << " attempts; best candidate:\n"
        << format_split_report(report) << "test scenes:";
    for (const auto& id : best_spec.test_scenes) {
        msg << ' ' << id;
    }
    throw ConstraintError(msg.str());
}

std::string format_split(const SplitSpec& spec) {
    std::ostringstream out;
    out << "seed " << spec.seed << "\n[train]\n";
    for (const auto& id : spec.train_scenes) {
        out << id << '\n';
    }
    out << "[test]\n";
    for (const auto& id : spec.test_scenes) {
        out << id << '\n';
    }
    return out.str();
}

SplitSpec parse_split(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    SplitSpec spec;
    enum class Section { None, Train, Test } section = Section::None;
    bool have_seed = false;
    std::size_t row = 0;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        ++row;
        const std::string t = util::trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        if (t == "[train]") {
            section = Section::Train;
        } else if (t == "[test]") {
            section = Section::Test;
        } else if (section == Section::None && t.rfind("seed", 0) == 0) {
            auto v = util::parse_int(t.substr(4));
            if (!v || *v < 0) {
                throw ParseError("split file line " + std::to_string(row) + ": bad seed", row);
            }
            spec.seed = static_cast<std::uint64_t>(*v);
            have_seed = true;
        } else if (section == Section::None) {
            throw ParseError("split file line " + std::to_string(row) + ": scene id outside a section", row);
        } else {
            if (!seen.insert(t).second) {
                throw ParseError("split file line " + std::to_string(row) + ": scene '" + t + "' listed twice", row);
            }
            (section == Section::Train ? spec.train_scenes : spec.test_scenes).push_back(t);
        }
    }
    if (!have_seed) {
        throw ParseError("split file: missing seed line");
    }
    return spec;
}

void save_split(const fs::path& path, const SplitSpec& spec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write split file " + path.string());
    }
    out << format_split(spec);
}

SplitSpec load_split(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open split file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_split(buf.str());
}

std::string format_split_report(const SplitReport& report) {
    std::ostringstream out;
    out << "test images " << report.test_images << " / " << report.total_images << " (fraction "
        << util::format_fixed(report.test_fraction(), 4) << ")\n";
    out << std::left << std::setw(12) << "lighting" << std::right << std::setw(8) << "scenes" << std::setw(8)
        << "test" << std::setw(8) << "images" << std::setw(8) << "test" << std::setw(10) << "fraction" << '\n';
    for (const auto& lb : report.lighting) {
        out << std::left << std::setw(12) << lb.lighting << std::right << std::setw(8) << lb.scenes << std::setw(8)
            << lb.test_scenes << std::setw(8) << lb.images << std::setw(8) << lb.test_images << std::setw(10)
            << util::format_fixed(lb.test_fraction(), 4) << (lb.constrained ? "" : "  (unconstrained)") << '\n';
    }
    return out.str();
}

}  // namespace fhiqa::dataset
