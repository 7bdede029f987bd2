#pragma once

#include "edm/tree.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edm {

struct ForestConfig {
    int n_trees = 100;
    std::optional<int> max_depth; // empty = unbounded
    int min_samples_leaf = 1;
    int features_per_split = 0; // 0 = floor(sqrt(d))
    bool balanced_class_weights = true;
    std::uint64_t seed = 0;

    bool operator==(const ForestConfig&) const = default;
};

struct ForestModel {
    ForestConfig config;
    std::vector<DecisionTree> trees;
    std::vector<double> importance; // normalized to sum 1 when any split exists

    std::vector<double> predict_proba(const std::vector<std::vector<double>>& cols,
                                      const std::vector<int>& rows) const;

    std::string save_json() const;
    static ForestModel load_json(const std::string& text);
};

// Bagged trees on bootstrap samples of `rows` (defaults to all rows).
// Balanced weights are n / (2 * n_c) over the supplied rows; each tree's
// bootstrap and feature stream derive from (seed, tree index) alone, so
// training order and thread schedule cannot change the model.
ForestModel fit_forest(const std::vector<std::vector<double>>& cols,
                       const std::vector<std::uint8_t>& y, const ForestConfig& config,
                       const std::vector<int>& rows = {}, unsigned n_threads = 0);

// L2-regularised logistic companion; standardizes internally.
struct LogitModel {
    std::vector<double> coef; // on the standardized scale
    double intercept = 0.0;
    double l2 = 1.0;
    std::vector<double> feature_mean;
    std::vector<double> feature_std;
    bool converged = false;
    int iterations = 0;

    std::vector<double> predict_proba(const std::vector<std::vector<double>>& cols,
                                      const std::vector<int>& rows) const;
};

LogitModel fit_logit(const std::vector<std::vector<double>>& cols,
                     const std::vector<std::uint8_t>& y, const std::vector<double>& weights,
                     double l2, int max_iter = 500, double tol = 1e-8);

// weighted NLL + (l2/2)|coef|^2 and its gradient on an already-standardized
// design; exposed so the finite-difference check can poke it directly
double logit_loss(const std::vector<std::vector<double>>& cols, const std::vector<std::uint8_t>& y,
                  const std::vector<double>& weights, const std::vector<double>& coef,
                  double intercept, double l2);
void logit_gradient(const std::vector<std::vector<double>>& cols,
                    const std::vector<std::uint8_t>& y, const std::vector<double>& weights,
                    const std::vector<double>& coef, double intercept, double l2,
                    std::vector<double>& grad_coef, double& grad_intercept);

// hyperparameter grid; iteration order is n_trees, then depth, then leaf
struct GridSpec {
    std::vector<int> n_trees{100, 300};
    std::vector<std::optional<int>> max_depth{std::nullopt, 8, 16};
    std::vector<int> min_samples_leaf{1, 5};

    std::vector<ForestConfig> expand(const ForestConfig& base) const;
};

struct GridSearchResult {
    ForestConfig best;
    std::vector<double> mean_f1; // per expanded config
};

// Inner cohort-grouped k-fold: distinct training cohorts, sorted ascending,
// are dealt round-robin into k groups. Maximises mean F1; ties prefer fewer
// trees, then shallower depth, then grid order.
GridSearchResult grid_search(const std::vector<std::vector<double>>& cols,
                             const std::vector<std::uint8_t>& y, const std::vector<int>& cohorts,
                             const GridSpec& grid, int inner_k, std::uint64_t seed,
                             unsigned n_threads = 0);

} // namespace edm
