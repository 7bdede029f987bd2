#pragma once

#include "edm/ablation.hpp"
#include "edm/audit.hpp"
#include "edm/synthetic.hpp"

#include <cstdint>
#include <string>

namespace edm {

// process exit codes shared by the CLI and the pipeline
inline constexpr int kExitOk = 0;
inline constexpr int kExitAuditFail = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitIo = 74;

struct GenerateOptions {
    std::string out_dir;
    SyntheticConfig config;
};
int cmd_generate(const GenerateOptions& opt);

struct SummaryOptions {
    std::string data_dir;
};
int cmd_summary(const SummaryOptions& opt);

struct GraphStatsOptions {
    std::string data_dir;
    double bottleneck_quantile = 0.75;
};
int cmd_graph_stats(const GraphStatsOptions& opt);

struct NetStatsOptions {
    std::string data_dir;
    int vot = 3;
    std::uint64_t seed = 42;
    std::string edges_csv; // optional per-cohort edge-list export
};
int cmd_net_stats(const NetStatsOptions& opt);

struct MatrixOptions {
    std::string data_dir;
    std::string out_csv;
    std::string out_columns;
    int vot = 3;
    bool include_graph = true;
    bool include_net = true;
    bool gate_off = false;
    double bottleneck_quantile = 0.75;
    std::uint64_t seed = 42;
};
int cmd_matrix(const MatrixOptions& opt);

struct AuditOptions {
    // either a data directory (assembled in-process, gate off) ...
    std::string data_dir;
    // ... or an exported matrix + column-spec pair
    std::string matrix_csv;
    std::string columns_json;
    std::string out_json;
    std::string out_table;
    AuditThresholds thresholds;
    double bottleneck_quantile = 0.75;
    std::uint64_t seed = 42;
};
int cmd_audit(const AuditOptions& opt);

struct AblateOptions {
    std::string data_dir;
    std::string out_json;
    AblationOptions ablation;
    int target_folds = 16;
    int min_test = 40;
    std::string audit_report_json; // fatal columns to exclude (the FIXED run)
};
int cmd_ablate(const AblateOptions& opt);

struct ReportOptions {
    std::string ablation_json;
    std::string out_dir;
};
int cmd_report(const ReportOptions& opt);

struct PipelineOptions {
    std::string data_dir;
    std::string out_dir;
    int vot = 3;
    std::uint64_t seed = 42;
    int target_folds = 16;
    int min_test = 40;
    double bottleneck_quantile = 0.75;
    GridSpec grid;
    int inner_k = 3;
    unsigned threads = 0;
    bool skip_audit = false; // proceed past a failed audit without stripping
    bool gate_off = false;   // disable the VOT gate during assembly
    bool fix = false;        // strip fatal columns and rerun clean
    AuditThresholds thresholds;
};
int cmd_pipeline(const PipelineOptions& opt);

} // namespace edm
