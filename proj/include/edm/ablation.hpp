#pragma once

#include "edm/features.hpp"
#include "edm/folds.hpp"
#include "edm/forest.hpp"
#include "edm/metrics.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace edm {

// M0 baseline, M1 +network, M2 +graph, M3 full
struct ModelVariant {
    std::string name;
    bool graph = false;
    bool net = false;
};

const std::vector<ModelVariant>& standard_variants();

struct FoldConfigResult {
    FoldMetrics metrics;
    ForestConfig chosen;
    std::vector<std::string> design_names;
    std::vector<std::string> design_blocks;
    std::vector<double> importance;
    bool outlier = false; // |f1 - config mean| > 2 std, filled during aggregation
};

struct ConfigAggregate {
    int n_features = 0; // matrix columns entering the model
    double accuracy_mean = 0, accuracy_std = 0;
    double precision_mean = 0, precision_std = 0;
    double recall_mean = 0, recall_std = 0;
    double f1_mean = 0, f1_std = 0;
    double auc_mean = 0, auc_std = 0;
    double balanced_mean = 0, balanced_std = 0;
    // design-column importances averaged over folds, descending
    std::vector<std::pair<std::string, double>> importance_ranking;
    std::map<std::string, std::string> ranking_block; // design column -> block
    std::map<std::string, double> block_importance;   // block -> mean share
};

struct AblationDelta {
    std::string from;
    std::string to;
    double delta_f1 = 0.0;  // computed on 4-decimal-rounded means
    double delta_auc = 0.0;
};

struct AblationReport {
    int vot = 3;
    std::uint64_t seed = 0;
    FoldPlan plan;
    std::vector<std::string> config_names;
    std::map<std::string, std::vector<FoldConfigResult>> folds; // keyed by config
    std::map<std::string, ConfigAggregate> aggregates;
    std::vector<AblationDelta> deltas; // M0->M1, M0->M2, M2->M3

    std::string to_json() const;
    static AblationReport from_json(const std::string& text);
};

struct AblationOptions {
    int vot = 3;
    double bottleneck_quantile = 0.75;
    GridSpec grid;
    int inner_k = 3;
    std::uint64_t seed = 42;
    bool gate_off = false;
    std::set<std::string> exclude_columns; // audit-stripped names
    unsigned threads = 0;
};

// Per fold and configuration: assemble matrices with a training-only
// bottleneck set, fit preprocessing and grid search on training cohorts,
// train, score the held-out cohort. Pure function of (dataset, plan,
// options); a VOT-gate trip aborts with the gate error.
AblationReport run_ablation(const Dataset& ds, const FoldPlan& plan, const AblationOptions& opt);

// model_comparison.csv, importance_topk_<config>.csv, net_effect.csv,
// foldwise.csv and summary.md under out_dir; numbers at 4 decimals half-even
void emit_reports(const AblationReport& report, const std::string& out_dir);

} // namespace edm
