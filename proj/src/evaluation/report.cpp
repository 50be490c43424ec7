#include "fhiqa/evaluation/report.hpp"

#include "fhiqa/errors.hpp"
#include "fhiqa/util/csv.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fhiqa::evaluation {

namespace fs = std::filesystem;

const BenchmarkCell* BenchmarkTable::cell(const std::string& model, const std::string& attribute) const {
    auto it = cells.find({model, attribute});
    return it == cells.end() ? nullptr : &it->second;
}

BenchmarkTable build_benchmark_table(const std::vector<MetricRecord>& records, const std::vector<std::string>& models,
                                     const std::vector<std::string>& attributes, MedianMode mode) {
    BenchmarkTable table;
    table.models = models;
    table.attributes = attributes;
    for (const auto& model : models) {
        for (const auto& attr : attributes) {
            std::vector<double> srcc, plcc, krcc, mae;
            for (const auto& r : records) {
                if (r.model != model || r.attribute != attr) {
                    continue;
                }
                if (!r.defined()) {
                    table.excluded.push_back(r);
                    continue;
                }
                srcc.push_back(*r.srcc);
                plcc.push_back(*r.plcc);
                krcc.push_back(*r.krcc);
                mae.push_back(*r.mae);
            }
            if (srcc.empty()) {
                continue;
            }
            table.cells[{model, attr}] =
                BenchmarkCell{median_across_scenes(srcc, mode), median_across_scenes(plcc, mode),
                              median_across_scenes(krcc, mode), median_across_scenes(mae, mode), srcc.size()};
        }
    }
    return table;
}

std::string format_benchmark_csv(const BenchmarkTable& table) {
    std::ostringstream out;
    out << "model,attribute,n_scenes,srcc,plcc,krcc,mae\n";
    for (const auto& model : table.models) {
        for (const auto& attr : table.attributes) {
            std::vector<std::string> row = {model, attr};
            if (const auto* c = table.cell(model, attr)) {
                row.push_back(std::to_string(c->scenes));
                for (double v : {c->srcc, c->plcc, c->krcc, c->mae}) {
                    row.push_back(util::format_fixed(v, 6));
                }
            } else {
                row.insert(row.end(), 5, kGapMarker);
            }
            util::write_csv_row(out, row);
        }
    }
    return out.str();
}

std::string format_benchmark_text(const BenchmarkTable& table) {
    constexpr int kCol = 6;
    std::size_t name_width = std::string("Model\\Attribute").size();
    for (const auto& m : table.models) {
        name_width = std::max(name_width, m.size());
    }
    const int group_width = 4 * kCol;

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_width)) << "Model\\Attribute";
    for (const auto& attr : table.attributes) {
        out << " | " << std::left << std::setw(group_width) << attr;
    }
    out << '\n' << std::setw(static_cast<int>(name_width)) << "";
    for (std::size_t a = 0; a < table.attributes.size(); ++a) {
        out << " | ";
        for (const char* h : {"SRCC", "PLCC", "KRCC", "MAE"}) {
            out << std::left << std::setw(kCol) << h;
        }
    }
    out << '\n';
    for (const auto& model : table.models) {
        out << std::left << std::setw(static_cast<int>(name_width)) << model;
        for (const auto& attr : table.attributes) {
            out << " | ";
            const auto* c = table.cell(model, attr);
            if (c) {
                for (double v : {c->srcc, c->plcc, c->krcc, c->mae}) {
                    out << std::left << std::setw(kCol) << util::format_fixed(v, 2);
                }
            } else {
                for (int i = 0; i < 4; ++i) {
                    out << std::left << std::setw(kCol) << kGapMarker;
                }
            }
        }
        out << '\n';
    }
    // Trim trailing spaces line by line.
    std::string text = out.str();
    std::string trimmed;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        line.erase(line.find_last_not_of(' ') + 1);
        trimmed += line + '\n';
    }
    return trimmed;
}

std::vector<std::size_t> class_distribution_histogram(const std::vector<core::ClassProbVector>& predictions,
                                                      const core::SceneRegistry& registry) {
    if (predictions.empty()) {
        throw DegenerateInputError("class histogram: no predictions");
    }
    std::vector<std::size_t> counts(registry.count(), 0);
    for (const auto& p : predictions) {
        if (p.size() != registry.count()) {
            throw ShapeError("class histogram: prediction size does not match the registry");
        }
        ++counts[p.argmax()];
    }
    return counts;
}

namespace {

std::string opt_field(const std::optional<double>& v) { return v ? util::format_fixed(*v, 6) : std::string(); }

std::optional<double> parse_opt(const std::string& field, std::size_t row) {
    if (util::trim(field).empty()) {
        return std::nullopt;
    }
    auto v = util::parse_double(field);
    if (!v) {
        throw ParseError("metrics row " + std::to_string(row) + ": '" + field + "' is not a number", row);
    }
    return v;
}

}  // namespace

std::string format_metric_records(const std::vector<MetricRecord>& records) {
    std::ostringstream out;
    out << kMetricsHeader << '\n';
    for (const auto& r : records) {
        util::write_csv_row(out, {r.model, r.scene_id, r.attribute, std::to_string(r.n_images), opt_field(r.srcc),
                                  opt_field(r.plcc), opt_field(r.krcc), opt_field(r.mae)});
    }
    return out.str();
}

std::vector<MetricRecord> parse_metric_records(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line) || util::trim(line) != kMetricsHeader) {
        throw ParseError("metrics file: header must be '" + std::string(kMetricsHeader) + "'", 1);
    }
    ++row;
    std::vector<MetricRecord> out;
    while (std::getline(in, line)) {
        ++row;
        if (util::trim(line).empty()) {
            continue;
        }
        const auto f = util::split_csv_line(line);
        if (f.size() != 8) {
            throw ParseError("metrics row " + std::to_string(row) + ": expected 8 columns", row);
        }
        MetricRecord r;
        r.model = f[0];
        r.scene_id = f[1];
        r.attribute = f[2];
        auto n = util::parse_int(f[3]);
        if (!n || *n < 0) {
            throw ParseError("metrics row " + std::to_string(row) + ": bad image count", row);
        }
        r.n_images = static_cast<std::size_t>(*n);
        r.srcc = parse_opt(f[4], row);
        r.plcc = parse_opt(f[5], row);
        r.krcc = parse_opt(f[6], row);
        r.mae = parse_opt(f[7], row);
        out.push_back(std::move(r));
    }
    return out;
}

std::string format_averaged_correlations(const std::vector<MetricRecord>& records) {
    std::ostringstream out;
    out << kAveragedHeader << '\n';
    for (const auto& r : records) {
        const auto avg = averaged_correlation(r);
        if (!avg) {
            continue;
        }
        util::write_csv_row(out, {r.model, r.attribute, r.scene_id, util::format_fixed(*avg, 6)});
    }
    return out.str();
}

std::string format_histograms(const std::vector<SceneHistogram>& histograms, const core::SceneRegistry& registry) {
    std::ostringstream out;
    out << kHistogramHeader << '\n';
    for (const auto& h : histograms) {
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            util::write_csv_row(out, {h.test_scene, registry.id(i), std::to_string(h.counts[i])});
        }
    }
    return out.str();
}

std::string format_predictions(const std::vector<PredictionRow>& rows) {
    std::ostringstream out;
    out << kPredictionsHeader << '\n';
    for (const auto& r : rows) {
        util::write_csv_row(out, {r.image, r.scene_id, util::format_roundtrip(r.target),
                                  util::format_roundtrip(r.pre_quality), util::format_roundtrip(r.final_score)});
    }
    return out.str();
}

std::vector<PredictionRow> parse_predictions(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || util::trim(line) != kPredictionsHeader) {
        throw ParseError("predictions file: header must be '" + std::string(kPredictionsHeader) + "'", 1);
    }
    std::size_t row = 1;
    std::vector<PredictionRow> out;
    while (std::getline(in, line)) {
        ++row;
        if (util::trim(line).empty()) {
            continue;
        }
        const auto f = util::split_csv_line(line);
        if (f.size() != 5) {
            throw ParseError("predictions row " + std::to_string(row) + ": expected 5 columns", row);
        }
        auto t = util::parse_double(f[2]);
        auto qp = util::parse_double(f[3]);
        auto qf = util::parse_double(f[4]);
        if (!t || !qp || !qf) {
            throw ParseError("predictions row " + std::to_string(row) + ": bad number", row);
        }
        out.push_back({f[0], f[1], *t, *qp, *qf});
    }
    return out;
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

}  // namespace fhiqa::evaluation
