#include "edm/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace edm {

std::optional<double> rank_auc(const std::vector<double>& scores,
                               const std::vector<std::uint8_t>& labels) {
    const std::size_t n = scores.size();
    if (labels.size() != n) throw std::invalid_argument("rank_auc: size mismatch");
    std::size_t n_pos = 0;
    for (auto y : labels) n_pos += y ? 1 : 0;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // rank sum of positives with average ranks over ties; sums of k + 0.5
    // values of this magnitude are exact in double
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j); // (i+1 .. j) averaged
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]]) pos_rank_sum += avg_rank;
        i = j;
    }
    const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

FoldMetrics compute_metrics(const std::vector<double>& scores,
                            const std::vector<std::uint8_t>& labels, double threshold) {
    const std::size_t n = scores.size();
    if (labels.size() != n) throw std::invalid_argument("compute_metrics: size mismatch");
    if (n == 0) throw std::invalid_argument("compute_metrics: empty input");
    for (double s : scores)
        if (!(s >= 0.0 && s <= 1.0))
            throw std::invalid_argument("compute_metrics: scores must lie in [0,1]");

    FoldMetrics m;
    m.n_test = static_cast<int>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool pred = scores[i] >= threshold;
        const bool truth = labels[i] != 0;
        if (pred && truth) ++m.tp;
        else if (pred && !truth) ++m.fp;
        else if (!pred && truth) ++m.fn;
        else ++m.tn;
    }
    m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(n);
    m.precision = (m.tp + m.fp) ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    const double tpr = (m.tp + m.fn) ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    const double tnr = (m.tn + m.fp) ? static_cast<double>(m.tn) / (m.tn + m.fp) : 0.0;
    m.balanced_accuracy = 0.5 * (tpr + tnr);
    m.roc_auc = rank_auc(scores, labels);
    return m;
}

} // namespace edm
