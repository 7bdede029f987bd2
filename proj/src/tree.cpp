#include "edm/tree.hpp"

#include "edm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edm {

double DecisionTree::predict_row(const std::vector<std::vector<double>>& cols, int row) const {
    int at = 0;
    while (nodes[at].feature >= 0)
        at = cols[nodes[at].feature][row] <= nodes[at].threshold ? nodes[at].left
                                                                 : nodes[at].right;
    return nodes[at].p_positive;
}

namespace {

struct WorkItem {
    int node = 0;
    std::size_t lo = 0;
    std::size_t hi = 0;
    int depth = 0;
};

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
    double left_w0 = 0.0, left_w1 = 0.0;
};

inline double gini(double w0, double w1) {
    const double w = w0 + w1;
    if (w <= 0.0) return 0.0;
    const double p0 = w0 / w, p1 = w1 / w;
    return 1.0 - p0 * p0 - p1 * p1;
}

} // namespace

DecisionTree fit_tree(const std::vector<std::vector<double>>& cols,
                      const std::vector<std::uint8_t>& y, const std::vector<double>& weights,
                      const std::vector<int>& rows, const TreeConfig& config, std::uint64_t seed) {
    if (rows.empty()) throw std::invalid_argument("fit_tree: empty input");
    const int d = static_cast<int>(cols.size());
    DecisionTree tree;
    tree.importance.assign(d, 0.0);
    if (d == 0) {
        double w1 = 0.0, w = 0.0;
        for (int r : rows) {
            w += weights[r];
            w1 += y[r] ? weights[r] : 0.0;
        }
        tree.nodes.push_back({-1, 0.0, -1, -1, w > 0.0 ? w1 / w : 0.0});
        return tree;
    }

    int k = config.features_per_split;
    if (k <= 0) k = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
    k = std::min(k, d);

    Rng rng(seed);
    std::vector<int> index(rows); // permuted in place while partitioning
    std::vector<int> feature_pool(d);
    for (int f = 0; f < d; ++f) feature_pool[f] = f;
    std::vector<int> candidates(k);
    std::vector<std::pair<double, int>> sorted_rows; // (value, position in index)

    double root_weight = 0.0;
    for (int r : index) root_weight += weights[r];

    std::vector<WorkItem> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, index.size(), 0});

    while (!stack.empty()) {
        const WorkItem item = stack.back();
        stack.pop_back();

        double w0 = 0.0, w1 = 0.0;
        for (std::size_t i = item.lo; i < item.hi; ++i) {
            const int r = index[i];
            (y[r] ? w1 : w0) += weights[r];
        }
        const double node_w = w0 + w1;
        const double node_gini = gini(w0, w1);
        const std::size_t n_node = item.hi - item.lo;

        auto make_leaf = [&] {
            tree.nodes[item.node] = {-1, 0.0, -1, -1, node_w > 0.0 ? w1 / node_w : 0.0};
        };

        const bool depth_capped = config.max_depth && item.depth >= *config.max_depth;
        if (node_gini <= 0.0 || depth_capped ||
            n_node < 2 * static_cast<std::size_t>(config.min_samples_leaf)) {
            make_leaf();
            continue;
        }

        // seeded subset of k distinct features, evaluated in ascending index
        // order so equal decreases keep the lowest column
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(rng.uniform_int(0, d - 1 - i));
            std::swap(feature_pool[i], feature_pool[j]);
            candidates[i] = feature_pool[i];
        }
        std::sort(candidates.begin(), candidates.end());

        SplitChoice best;
        for (int f : candidates) {
            sorted_rows.clear();
            for (std::size_t i = item.lo; i < item.hi; ++i)
                sorted_rows.emplace_back(cols[f][index[i]], static_cast<int>(i));
            std::sort(sorted_rows.begin(), sorted_rows.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double lw0 = 0.0, lw1 = 0.0;
            for (std::size_t i = 0; i + 1 < sorted_rows.size(); ++i) {
                const int r = index[sorted_rows[i].second];
                (y[r] ? lw1 : lw0) += weights[r];
                if (sorted_rows[i].first == sorted_rows[i + 1].first) continue;
                const std::size_t n_left = i + 1;
                const std::size_t n_right = sorted_rows.size() - n_left;
                if (n_left < static_cast<std::size_t>(config.min_samples_leaf) ||
                    n_right < static_cast<std::size_t>(config.min_samples_leaf))
                    continue;
                const double rw0 = w0 - lw0, rw1 = w1 - lw1;
                const double lw = lw0 + lw1, rw = rw0 + rw1;
                const double decrease =
                    node_gini - (lw / node_w) * gini(lw0, lw1) - (rw / node_w) * gini(rw0, rw1);
                if (decrease > best.decrease) { // strict: ties keep lowest feature/threshold
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (sorted_rows[i].first + sorted_rows[i + 1].first);
                    best.decrease = decrease;
                    best.left_w0 = lw0;
                    best.left_w1 = lw1;
                }
            }
        }

        if (!best.found || best.decrease <= 0.0) {
            make_leaf();
            continue;
        }

        // partition rows around the threshold
        std::size_t mid = item.lo;
        for (std::size_t i = item.lo; i < item.hi; ++i)
            if (cols[best.feature][index[i]] <= best.threshold) std::swap(index[i], index[mid++]);

        tree.importance[best.feature] += (node_w / root_weight) * best.decrease;

        const int left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int right_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[item.node] = {best.feature, best.threshold, left_id, right_id, 0.0};
        // push right first so the left branch is processed next (stable order)
        stack.push_back({right_id, mid, item.hi, item.depth + 1});
        stack.push_back({left_id, item.lo, mid, item.depth + 1});
    }

    return tree;
}

} // namespace edm
