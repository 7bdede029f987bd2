#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace edm {

struct TreeConfig {
    std::optional<int> max_depth;  // empty = grow to purity
    int min_samples_leaf = 1;      // unweighted row count per child
    int features_per_split = 0;    // 0 = floor(sqrt(d)); d or more = all columns
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double p_positive = 0.0; // class-weighted frequency at leaves
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
    std::vector<double> importance; // per feature: sum of fraction * gini decrease

    double predict_row(const std::vector<std::vector<double>>& cols, int row) const;
};

// Greedy CART on a column-major design. `rows` may contain duplicates (the
// forest's bootstrap); `weights` are per-row class weights. Splits maximise
// weighted Gini decrease over a seeded feature subset, thresholds sit at
// midpoints between distinct sorted values, and ties resolve to the lowest
// column index then the lowest threshold.
DecisionTree fit_tree(const std::vector<std::vector<double>>& cols,
                      const std::vector<std::uint8_t>& y, const std::vector<double>& weights,
                      const std::vector<int>& rows, const TreeConfig& config, std::uint64_t seed);

} // namespace edm
