#include "edm/forest.hpp"

#include "edm/metrics.hpp"
#include "edm/parallel.hpp"
#include "edm/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

using nlohmann::json;

namespace edm {

std::vector<double> ForestModel::predict_proba(const std::vector<std::vector<double>>& cols,
                                               const std::vector<int>& rows) const {
    std::vector<double> out(rows.size(), 0.0);
    for (const auto& tree : trees)
        for (std::size_t i = 0; i < rows.size(); ++i) out[i] += tree.predict_row(cols, rows[i]);
    const double inv = trees.empty() ? 0.0 : 1.0 / static_cast<double>(trees.size());
    for (double& v : out) v *= inv;
    return out;
}

ForestModel fit_forest(const std::vector<std::vector<double>>& cols,
                       const std::vector<std::uint8_t>& y, const ForestConfig& config,
                       const std::vector<int>& rows, unsigned n_threads) {
    std::vector<int> all_rows;
    const std::vector<int>* train = &rows;
    if (rows.empty()) {
        all_rows.resize(y.size());
        std::iota(all_rows.begin(), all_rows.end(), 0);
        train = &all_rows;
    }
    const std::size_t n = train->size();
    if (n < 2) throw std::invalid_argument("fit_forest: need at least two rows");
    if (config.n_trees < 1) throw std::invalid_argument("fit_forest: n_trees must be >= 1");

    std::size_t n_pos = 0;
    for (int r : *train) n_pos += y[r] ? 1 : 0;
    if (n_pos == 0 || n_pos == n)
        throw std::invalid_argument("fit_forest: training set has a single class");

    // balanced: w_c = n / (2 * n_c); otherwise unit weights
    std::vector<double> weights(y.size(), 1.0);
    if (config.balanced_class_weights) {
        const double w_pos = static_cast<double>(n) / (2.0 * static_cast<double>(n_pos));
        const double w_neg = static_cast<double>(n) / (2.0 * static_cast<double>(n - n_pos));
        for (int r : *train) weights[r] = y[r] ? w_pos : w_neg;
    }

    TreeConfig tree_config;
    tree_config.max_depth = config.max_depth;
    tree_config.min_samples_leaf = config.min_samples_leaf;
    tree_config.features_per_split = config.features_per_split;

    ForestModel model;
    model.config = config;
    model.trees.resize(config.n_trees);
    const std::vector<int>& base_rows = *train;
    parallel_for(static_cast<std::size_t>(config.n_trees), n_threads, [&](std::size_t t) {
        Rng boot(Rng::derive(config.seed, 0xB001u + 2 * t));
        std::vector<int> sample(n);
        for (std::size_t i = 0; i < n; ++i)
            sample[i] = base_rows[static_cast<std::size_t>(
                boot.uniform_int(0, static_cast<std::int64_t>(n) - 1))];
        model.trees[t] =
            fit_tree(cols, y, weights, sample, tree_config, Rng::derive(config.seed, 0xFEA7u + 2 * t));
    });

    // MDI: average per-tree sums across trees, then normalize
    model.importance.assign(cols.size(), 0.0);
    for (const auto& tree : model.trees)
        for (std::size_t f = 0; f < cols.size(); ++f) model.importance[f] += tree.importance[f];
    double total = 0.0;
    for (double& v : model.importance) {
        v /= static_cast<double>(config.n_trees);
        total += v;
    }
    if (total > 0.0)
        for (double& v : model.importance) v /= total;
    return model;
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

std::string ForestModel::save_json() const {
    json doc;
    doc["format"] = "edm-forest";
    doc["version"] = 1;
    json cfg;
    cfg["n_trees"] = config.n_trees;
    if (config.max_depth) cfg["max_depth"] = *config.max_depth;
    else cfg["max_depth"] = nullptr;
    cfg["min_samples_leaf"] = config.min_samples_leaf;
    cfg["features_per_split"] = config.features_per_split;
    cfg["balanced_class_weights"] = config.balanced_class_weights;
    cfg["seed"] = config.seed;
    doc["config"] = std::move(cfg);
    doc["importance"] = importance;
    json jtrees = json::array();
    for (const auto& tree : trees) {
        json nodes = json::array();
        for (const auto& node : tree.nodes)
            nodes.push_back({node.feature, node.threshold, node.left, node.right, node.p_positive});
        jtrees.push_back({{"nodes", std::move(nodes)}, {"importance", tree.importance}});
    }
    doc["trees"] = std::move(jtrees);
    return doc.dump();
}

ForestModel ForestModel::load_json(const std::string& text) {
    const json doc = json::parse(text);
    if (doc.value("format", "") != std::string("edm-forest"))
        throw std::invalid_argument("not an edm-forest document");
    ForestModel model;
    const json& cfg = doc.at("config");
    model.config.n_trees = cfg.at("n_trees").get<int>();
    if (!cfg.at("max_depth").is_null()) model.config.max_depth = cfg.at("max_depth").get<int>();
    model.config.min_samples_leaf = cfg.at("min_samples_leaf").get<int>();
    model.config.features_per_split = cfg.at("features_per_split").get<int>();
    model.config.balanced_class_weights = cfg.at("balanced_class_weights").get<bool>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.importance = doc.at("importance").get<std::vector<double>>();
    for (const auto& jt : doc.at("trees")) {
        DecisionTree tree;
        for (const auto& jn : jt.at("nodes")) {
            TreeNode node;
            node.feature = jn.at(0).get<int>();
            node.threshold = jn.at(1).get<double>();
            node.left = jn.at(2).get<int>();
            node.right = jn.at(3).get<int>();
            node.p_positive = jn.at(4).get<double>();
            tree.nodes.push_back(node);
        }
        tree.importance = jt.at("importance").get<std::vector<double>>();
        model.trees.push_back(std::move(tree));
    }
    return model;
}

// ---------------------------------------------------------------------------
// logistic companion
// ---------------------------------------------------------------------------

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double linear_term(const std::vector<std::vector<double>>& cols, const std::vector<double>& coef,
                   double intercept, int row) {
    double z = intercept;
    for (std::size_t f = 0; f < cols.size(); ++f) z += coef[f] * cols[f][row];
    return z;
}

} // namespace

double logit_loss(const std::vector<std::vector<double>>& cols, const std::vector<std::uint8_t>& y,
                  const std::vector<double>& weights, const std::vector<double>& coef,
                  double intercept, double l2) {
    double loss = 0.0;
    for (std::size_t r = 0; r < y.size(); ++r) {
        const double z = linear_term(cols, coef, intercept, static_cast<int>(r));
        // log(1 + e^z) - y z, computed stably
        const double log1pexp = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += weights[r] * (log1pexp - (y[r] ? z : 0.0));
    }
    double penalty = 0.0;
    for (double b : coef) penalty += b * b;
    return loss + 0.5 * l2 * penalty;
}

void logit_gradient(const std::vector<std::vector<double>>& cols,
                    const std::vector<std::uint8_t>& y, const std::vector<double>& weights,
                    const std::vector<double>& coef, double intercept, double l2,
                    std::vector<double>& grad_coef, double& grad_intercept) {
    grad_coef.assign(cols.size(), 0.0);
    grad_intercept = 0.0;
    for (std::size_t r = 0; r < y.size(); ++r) {
        const double z = linear_term(cols, coef, intercept, static_cast<int>(r));
        const double delta = weights[r] * (sigmoid(z) - (y[r] ? 1.0 : 0.0));
        grad_intercept += delta;
        for (std::size_t f = 0; f < cols.size(); ++f) grad_coef[f] += delta * cols[f][r];
    }
    for (std::size_t f = 0; f < cols.size(); ++f) grad_coef[f] += l2 * coef[f];
}

std::vector<double> LogitModel::predict_proba(const std::vector<std::vector<double>>& cols,
                                              const std::vector<int>& rows) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (int r : rows) {
        double z = intercept;
        for (std::size_t f = 0; f < cols.size(); ++f) {
            const double x = (cols[f][r] - feature_mean[f]) /
                             (feature_std[f] > 0.0 ? feature_std[f] : 1.0);
            z += coef[f] * x;
        }
        out.push_back(sigmoid(z));
    }
    return out;
}

LogitModel fit_logit(const std::vector<std::vector<double>>& cols,
                     const std::vector<std::uint8_t>& y, const std::vector<double>& weights,
                     double l2, int max_iter, double tol) {
    const std::size_t d = cols.size();
    const std::size_t n = y.size();
    if (n == 0) throw std::invalid_argument("fit_logit: empty input");
    for (const auto& col : cols)
        for (double v : col)
            if (!std::isfinite(v)) throw std::invalid_argument("fit_logit: non-finite input");

    LogitModel model;
    model.l2 = l2;
    model.feature_mean.assign(d, 0.0);
    model.feature_std.assign(d, 0.0);
    std::vector<std::vector<double>> z_cols(d, std::vector<double>(n, 0.0));
    for (std::size_t f = 0; f < d; ++f) {
        double m = 0.0;
        for (double v : cols[f]) m += v;
        m /= static_cast<double>(n);
        double s = 0.0;
        for (double v : cols[f]) s += (v - m) * (v - m);
        s = std::sqrt(s / static_cast<double>(n));
        model.feature_mean[f] = m;
        model.feature_std[f] = s;
        const double inv = s > 0.0 ? 1.0 / s : 1.0;
        for (std::size_t r = 0; r < n; ++r) z_cols[f][r] = (cols[f][r] - m) * inv;
    }

    model.coef.assign(d, 0.0);
    model.intercept = 0.0;
    std::vector<double> grad(d, 0.0);
    double grad0 = 0.0;
    double loss = logit_loss(z_cols, y, weights, model.coef, model.intercept, l2);
    double step = 1.0;
    for (int it = 0; it < max_iter; ++it) {
        model.iterations = it + 1;
        logit_gradient(z_cols, y, weights, model.coef, model.intercept, l2, grad, grad0);
        double inf_norm = std::fabs(grad0);
        for (double g : grad) inf_norm = std::max(inf_norm, std::fabs(g));
        if (inf_norm <= tol) {
            model.converged = true;
            break;
        }
        double g2 = grad0 * grad0;
        for (double g : grad) g2 += g * g;
        // backtracking line search on the Armijo condition
        step = std::min(step * 2.0, 1e3);
        bool accepted = false;
        std::vector<double> trial(d, 0.0);
        for (int back = 0; back < 60; ++back) {
            for (std::size_t f = 0; f < d; ++f) trial[f] = model.coef[f] - step * grad[f];
            const double trial0 = model.intercept - step * grad0;
            const double trial_loss = logit_loss(z_cols, y, weights, trial, trial0, l2);
            if (trial_loss <= loss - 1e-4 * step * g2) {
                model.coef = trial;
                model.intercept = trial0;
                loss = trial_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // step underflow: gradient direction exhausted
    }
    return model;
}

// ---------------------------------------------------------------------------
// grid search
// ---------------------------------------------------------------------------

std::vector<ForestConfig> GridSpec::expand(const ForestConfig& base) const {
    std::vector<ForestConfig> out;
    for (int trees : n_trees)
        for (const auto& depth : max_depth)
            for (int leaf : min_samples_leaf) {
                ForestConfig cfg = base;
                cfg.n_trees = trees;
                cfg.max_depth = depth;
                cfg.min_samples_leaf = leaf;
                out.push_back(cfg);
            }
    return out;
}

GridSearchResult grid_search(const std::vector<std::vector<double>>& cols,
                             const std::vector<std::uint8_t>& y, const std::vector<int>& cohorts,
                             const GridSpec& grid, int inner_k, std::uint64_t seed,
                             unsigned n_threads) {
    std::set<int> distinct(cohorts.begin(), cohorts.end());
    if (static_cast<int>(distinct.size()) < inner_k)
        throw std::invalid_argument("grid_search: fewer distinct cohorts than inner folds");

    // round-robin cohorts (ascending) into k groups
    std::vector<int> years(distinct.begin(), distinct.end());
    std::map<int, int> group_of;
    for (std::size_t i = 0; i < years.size(); ++i)
        group_of[years[i]] = static_cast<int>(i) % inner_k;

    std::vector<std::vector<int>> train_rows(inner_k), test_rows(inner_k);
    for (std::size_t r = 0; r < cohorts.size(); ++r) {
        const int g = group_of.at(cohorts[r]);
        for (int k = 0; k < inner_k; ++k)
            (k == g ? test_rows : train_rows)[k].push_back(static_cast<int>(r));
    }

    ForestConfig base;
    base.seed = seed;
    const std::vector<ForestConfig> configs = grid.expand(base);
    GridSearchResult result;
    result.mean_f1.assign(configs.size(), 0.0);

    for (std::size_t c = 0; c < configs.size(); ++c) {
        double f1_sum = 0.0;
        int folds_used = 0;
        for (int k = 0; k < inner_k; ++k) {
            if (test_rows[k].empty() || train_rows[k].empty()) continue;
            ForestConfig cfg = configs[c];
            cfg.seed = Rng::derive(seed, 0x6000u + c * 31 + static_cast<std::size_t>(k));
            const ForestModel model = fit_forest(cols, y, cfg, train_rows[k], n_threads);
            const std::vector<double> scores = model.predict_proba(cols, test_rows[k]);
            std::vector<std::uint8_t> labels;
            labels.reserve(test_rows[k].size());
            for (int r : test_rows[k]) labels.push_back(y[r]);
            f1_sum += compute_metrics(scores, labels).f1;
            ++folds_used;
        }
        result.mean_f1[c] = folds_used ? f1_sum / folds_used : 0.0;
    }

    // best mean F1; ties by fewer trees, then shallower depth, then grid order
    std::size_t best = 0;
    auto depth_rank = [](const std::optional<int>& d) {
        return d ? *d : std::numeric_limits<int>::max();
    };
    for (std::size_t c = 1; c < configs.size(); ++c) {
        const double delta = result.mean_f1[c] - result.mean_f1[best];
        if (delta > 1e-12) {
            best = c;
        } else if (std::fabs(delta) <= 1e-12) {
            if (configs[c].n_trees < configs[best].n_trees ||
                (configs[c].n_trees == configs[best].n_trees &&
                 depth_rank(configs[c].max_depth) < depth_rank(configs[best].max_depth)))
                best = c;
        }
    }
    result.best = configs[best];
    result.best.seed = seed;
    return result;
}

} // namespace edm
