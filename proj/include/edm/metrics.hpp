#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace edm {

struct FoldMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double balanced_accuracy = 0.0;
    std::optional<double> roc_auc; // empty when labels are single-class
    int tp = 0, fp = 0, tn = 0, fn = 0;
    int n_test = 0;
};

// Mann-Whitney rank statistic: (concordant + 0.5 * ties) / (n_pos * n_neg).
// Average ranks keep it exactly equal to pairwise counting. Empty optional
// when one class is absent.
std::optional<double> rank_auc(const std::vector<double>& scores,
                               const std::vector<std::uint8_t>& labels);

// dropout (label 1) is the positive class; predictions use score >= threshold
FoldMetrics compute_metrics(const std::vector<double>& scores,
                            const std::vector<std::uint8_t>& labels, double threshold = 0.5);

} // namespace edm
