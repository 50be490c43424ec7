#pragma once

// Reference implementations written independently of the library code.
// They favour obviousness over speed.

#include <cstddef>
#include <random>
#include <vector>

namespace fhiqa::testing {

// Q_f by sorting all (weight, index) pairs, masking everything past the k-th,
// renormalising the survivors and summing their rescaled scores.
double brute_force_final_score(double pre_quality, const std::vector<double>& probs,
                               const std::vector<double>& multipliers, const std::vector<double>& offsets,
                               std::size_t k);

// Indices kept by the mask above, by descending weight then ascending index.
std::vector<std::size_t> brute_force_top_k(const std::vector<double>& probs, std::size_t k);

struct LossPoint {
    double pre_quality = 0.0;
    std::vector<double> logits;
    std::vector<double> multipliers;
    std::vector<double> offsets;
    std::size_t k = 1;
    double target = 0.0;
    std::size_t class_target = 0;
};

// w_q * huber(Q_f, target) + w_c * cross-entropy, with Q_f from the brute-force
// evaluator on softmax(logits).
double oracle_image_loss(const LossPoint& point, double weight_quality, double weight_class, double delta);

// Random point whose top-k set and Huber branch are stable under small
// perturbations (at least `margin` from any switch).
LossPoint random_loss_point(std::mt19937_64& rng, double margin);

double naive_mean(const std::vector<double>& x);
double naive_pearson(const std::vector<double>& x, const std::vector<double>& y);
// Rank_i = (#values below x_i) + (#values equal to x_i + 1) / 2.
std::vector<double> counting_ranks(const std::vector<double>& x);
double naive_spearman(const std::vector<double>& x, const std::vector<double>& y);
// Tau-b by visiting every pair.
double naive_kendall(const std::vector<double>& x, const std::vector<double>& y);
double naive_mae(const std::vector<double>& x, const std::vector<double>& y);

// Hand-rolled generators.
std::vector<double> random_probs(std::mt19937_64& rng, std::size_t size);
std::vector<double> random_uniform(std::mt19937_64& rng, std::size_t size, double lo, double hi);
// Values drawn from a small integer alphabet so ties are common.
std::vector<double> random_tied(std::mt19937_64& rng, std::size_t size, int levels);

}  // namespace fhiqa::testing
