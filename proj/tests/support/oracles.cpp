#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace fhiqa::testing {

std::vector<std::size_t> brute_force_top_k(const std::vector<double>& probs, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> pairs;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        pairs.emplace_back(probs[i], i);
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& l, const auto& r) {
        if (l.first != r.first) {
            return l.first > r.first;
        }
        return l.second < r.second;
    });
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < pairs.size() && i < k; ++i) {
        kept.push_back(pairs[i].second);
    }
    return kept;
}

double brute_force_final_score(double pre_quality, const std::vector<double>& probs,
                               const std::vector<double>& multipliers, const std::vector<double>& offsets,
                               std::size_t k) {
    const auto kept = brute_force_top_k(probs, k);
    std::vector<double> mask(probs.size(), 0.0);
    for (std::size_t i : kept) {
        mask[i] = 1.0;
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        denom += mask[i] * probs[i];
    }
    double num = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        num += mask[i] * probs[i] / denom * (multipliers[i] * pre_quality + offsets[i]);
    }
    return num;
}

double oracle_image_loss(const LossPoint& point, double weight_quality, double weight_class, double delta) {
    double m = point.logits[0];
    for (double z : point.logits) {
        m = std::max(m, z);
    }
    double z_sum = 0.0;
    for (double z : point.logits) {
        z_sum += std::exp(z - m);
    }
    std::vector<double> probs;
    for (double z : point.logits) {
        probs.push_back(std::exp(z - m) / z_sum);
    }
    const double qf = brute_force_final_score(point.pre_quality, probs, point.multipliers, point.offsets, point.k);
    const double r = std::abs(qf - point.target);
    const double huber = r <= delta ? 0.5 * r * r : delta * (r - 0.5 * delta);
    const double ce = -(point.logits[point.class_target] - m - std::log(z_sum));
    return weight_quality * huber + weight_class * ce;
}

LossPoint random_loss_point(std::mt19937_64& rng, double margin) {
    std::uniform_int_distribution<std::size_t> scenes(2, 12);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (;;) {
        LossPoint p;
        const std::size_t s = scenes(rng);
        p.logits = random_uniform(rng, s, -2.0, 2.0);
        p.multipliers = random_uniform(rng, s, 0.5, 3.0);
        p.offsets = random_uniform(rng, s, -1.0, 1.0);
        p.pre_quality = u(rng);
        p.target = u(rng) * 2.0;
        std::uniform_int_distribution<std::size_t> pick(0, s - 1);
        std::uniform_int_distribution<std::size_t> k(1, s);
        p.class_target = pick(rng);
        p.k = k(rng);

        auto sorted = p.logits;
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        if (p.k < s && sorted[p.k - 1] - sorted[p.k] < margin) {
            continue;
        }
        std::vector<double> probs(s);
        double total = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
            probs[i] = std::exp(p.logits[i]);
            total += probs[i];
        }
        for (double& v : probs) {
            v /= total;
        }
        const double r = std::abs(brute_force_final_score(p.pre_quality, probs, p.multipliers, p.offsets, p.k) - p.target);
        if (std::abs(r - 1.0) < margin) {
            continue;
        }
        return p;
    }
}

double naive_mean(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) {
        s += v;
    }
    return s / static_cast<double>(x.size());
}

double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = naive_mean(x);
    const double my = naive_mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> counting_ranks(const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double below = 0.0, equal = 0.0;
        for (double v : x) {
            below += v < x[i] ? 1.0 : 0.0;
            equal += v == x[i] ? 1.0 : 0.0;
        }
        r[i] = below + (equal + 1.0) / 2.0;
    }
    return r;
}

double naive_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return naive_pearson(counting_ranks(x), counting_ranks(y));
}

double naive_kendall(const std::vector<double>& x, const std::vector<double>& y) {
    double concordant = 0.0, discordant = 0.0, tied_x = 0.0, tied_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) {
                continue;
            }
            if (dx == 0.0) {
                tied_x += 1.0;
            } else if (dy == 0.0) {
                tied_y += 1.0;
            } else if ((dx > 0.0) == (dy > 0.0)) {
                concordant += 1.0;
            } else {
                discordant += 1.0;
            }
        }
    }
    const double n1 = concordant + discordant + tied_x;
    const double n2 = concordant + discordant + tied_y;
    return (concordant - discordant) / std::sqrt(n1 * n2);
}

double naive_mae(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += std::abs(x[i] - y[i]);
    }
    return s / static_cast<double>(x.size());
}

std::vector<double> random_probs(std::mt19937_64& rng, std::size_t size) {
    std::gamma_distribution<double> gamma(0.7, 1.0);
    std::vector<double> p(size);
    double total = 0.0;
    for (double& v : p) {
        v = gamma(rng) + 1e-9;
        total += v;
    }
    for (double& v : p) {
        v /= total;
    }
    return p;
}

std::vector<double> random_uniform(std::mt19937_64& rng, std::size_t size, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(size);
    for (double& x : v) {
        x = u(rng);
    }
    return v;
}

std::vector<double> random_tied(std::mt19937_64& rng, std::size_t size, int levels) {
    std::uniform_int_distribution<int> u(0, levels - 1);
    std::vector<double> v(size);
    for (double& x : v) {
        x = static_cast<double>(u(rng));
    }
    return v;
}

}  // namespace fhiqa::testing
