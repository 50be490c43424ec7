#include "fhiqa/evaluation/metrics.hpp"

#include "fhiqa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace fhiqa::evaluation {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DegenerateInputError("metric inputs differ in length (" + std::to_string(x.size()) + " vs " +
                                   std::to_string(y.size()) + ")");
    }
    if (x.size() < 2) {
        throw DegenerateInputError("metrics need at least two samples");
    }
}

// Counts swaps needed to sort `v` (= discordant pairs) while merge-sorting it.
std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) {
        return 0;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) {
        buf[k++] = v[i++];
    }
    while (j < hi) {
        buf[k++] = v[j++];
    }
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

// Sum over tie groups of t(t-1)/2 for an already sorted range.
template <class It, class Eq>
std::uint64_t tied_pairs(It first, It last, Eq eq) {
    std::uint64_t total = 0;
    while (first != last) {
        It run = first;
        std::uint64_t t = 0;
        while (run != last && eq(*run, *first)) {
            ++run;
            ++t;
        }
        total += t * (t - 1) / 2;
        first = run;
    }
    return total;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            ranks[order[t]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw DegenerateInputError("correlation undefined for constant input");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y);
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y);
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) {
            return x[a] < x[b];
        }
        return y[a] < y[b];
    });

    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const std::uint64_t n1 = tied_pairs(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
    const std::uint64_t n3 = tied_pairs(order.begin(), order.end(),
                                        [&](std::size_t a, std::size_t b) { return x[a] == x[b] && y[a] == y[b]; });

    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        ys[i] = y[order[i]];
    }
    std::vector<double> buf(n);
    const std::uint64_t discordant = merge_count(ys, buf, 0, n);
    const std::uint64_t n2 = tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });

    if (n0 == n1 || n0 == n2) {
        throw DegenerateInputError("correlation undefined for constant input");
    }
    // concordant - discordant = n0 - n1 - n2 + n3 - 2 * discordant
    const double numer = static_cast<double>(n0) - static_cast<double>(n1) - static_cast<double>(n2) +
                         static_cast<double>(n3) - 2.0 * static_cast<double>(discordant);
    const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
    return std::clamp(numer / denom, -1.0, 1.0);
}

double mean_absolute_error(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty()) {
        throw DegenerateInputError("MAE needs two non-empty inputs of equal length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        total += std::abs(x[i] - y[i]);
    }
    return total / static_cast<double>(x.size());
}

SceneMetrics compute_scene_metrics(std::span<const double> preds, std::span<const double> targets) {
    check_pair(preds, targets);
    SceneMetrics m;
    m.srcc = spearman(preds, targets);
    m.plcc = pearson(preds, targets);
    m.krcc = kendall_tau_b(preds, targets);
    m.mae = mean_absolute_error(preds, targets);
    return m;
}

double median_across_scenes(std::span<const double> values, MedianMode mode) {
    if (values.empty()) {
        throw DegenerateInputError("median of an empty set");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) {
        return v[n / 2];
    }
    if (mode == MedianMode::Lower) {
        return v[n / 2 - 1];
    }
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::optional<double> averaged_correlation(const MetricRecord& record) {
    if (!record.srcc || !record.plcc || !record.krcc) {
        return std::nullopt;
    }
    return (*record.srcc + *record.plcc + *record.krcc) / 3.0;
}

std::vector<MetricRecord> evaluate_predictions(const std::vector<Prediction>& predictions, const std::string& model,
                                               const std::string& attribute) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& p : predictions) {
        auto [it, inserted] = groups.try_emplace(p.scene_id);
        if (inserted) {
            order.push_back(p.scene_id);
        }
        it->second.first.push_back(p.predicted);
        it->second.second.push_back(p.target);
    }
    std::vector<MetricRecord> out;
    for (const auto& scene : order) {
        const auto& [pred, target] = groups.at(scene);
        MetricRecord r;
        r.model = model;
        r.scene_id = scene;
        r.attribute = attribute;
        r.n_images = pred.size();
        try {
            const auto m = compute_scene_metrics(pred, target);
            r.srcc = m.srcc;
            r.plcc = m.plcc;
            r.krcc = m.krcc;
            r.mae = m.mae;
        } catch (const DegenerateInputError&) {
            if (!pred.empty()) {
                r.mae = mean_absolute_error(pred, target);
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace fhiqa::evaluation
