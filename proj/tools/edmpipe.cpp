// edmpipe: synthetic cohort generation, leakage audit and leave-cohort-out
// ablation from the command line. See README.md for the workflow.

#include "edm/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

namespace {

// JSON config file; explicit flags override its values
nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw edm::DataError("cannot open config file " + path);
    return nlohmann::json::parse(in);
}

template <typename T>
void config_override(const nlohmann::json& cfg, const char* key, CLI::Option* opt, T& target) {
    if (opt && opt->count() > 0) return; // explicit flag wins
    if (cfg.contains(key)) target = cfg.at(key).get<T>();
}

// EDMPIPE_SEED overrides the default seed when no --seed flag was given
void apply_env_seed(CLI::Option* seed_opt, std::uint64_t& seed) {
    if (seed_opt && seed_opt->count() > 0) return;
    if (const char* env = std::getenv("EDMPIPE_SEED")) seed = std::strtoull(env, nullptr, 10);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cohort dropout pipeline: generate, audit, ablate, report"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its values");

    // generate
    edm::GenerateOptions gen;
    auto* sc_gen = app.add_subcommand("generate", "write a synthetic dataset");
    sc_gen->add_option("--out", gen.out_dir, "output directory")->required();
    auto* gen_seed = sc_gen->add_option("--seed", gen.config.seed, "generator seed");
    sc_gen->add_option("--cohorts", gen.config.n_cohorts, "number of yearly cohorts");
    sc_gen->add_option("--students-mean", gen.config.students_per_cohort_mean,
                       "mean students per cohort");
    sc_gen->add_option("--students-spread", gen.config.students_per_cohort_spread,
                       "uniform spread around the mean");
    sc_gen->add_option("--first-year", gen.config.first_cohort_year, "first cohort year");
    sc_gen->add_option("--vot", gen.config.vot, "observation boundary (term index)");
    sc_gen->add_option("--horizon", gen.config.horizon, "follow-up horizon (term index)");
    sc_gen->add_flag("--plant-leaks,--with-leaks", gen.config.plant_leak_vars,
                     "plant the two post-horizon leak attributes");
    sc_gen->add_option("--leak-purity", gen.config.leak_purity,
                       "agreement between still_enrolled_after_vot and the outcome negation");

    // summary
    edm::SummaryOptions sum;
    auto* sc_sum = app.add_subcommand("summary", "print dataset counts as JSON");
    sc_sum->add_option("--data", sum.data_dir, "dataset directory")->required();

    // graph-stats
    edm::GraphStatsOptions gstats;
    auto* sc_gstats = app.add_subcommand("graph-stats", "curriculum graph stats as JSON");
    sc_gstats->add_option("--data", gstats.data_dir, "dataset directory")->required();
    sc_gstats->add_option("--bottleneck-quantile", gstats.bottleneck_quantile,
                          "quantile for the bottleneck rule");

    // net-stats
    edm::NetStatsOptions nstats;
    auto* sc_nstats = app.add_subcommand("net-stats", "co-enrolment network stats as JSON");
    sc_nstats->add_option("--data", nstats.data_dir, "dataset directory")->required();
    sc_nstats->add_option("--vot", nstats.vot, "observation boundary");
    auto* nstats_seed = sc_nstats->add_option("--seed", nstats.seed, "community detection seed");
    sc_nstats->add_option("--edges", nstats.edges_csv, "also export the pooled edge lists as CSV");

    // matrix
    edm::MatrixOptions mat;
    auto* sc_mat = app.add_subcommand("matrix", "assemble and export the feature matrix");
    sc_mat->add_option("--data", mat.data_dir, "dataset directory")->required();
    sc_mat->add_option("--out-csv", mat.out_csv, "matrix CSV path")->required();
    sc_mat->add_option("--out-columns", mat.out_columns, "column-spec JSON path")->required();
    sc_mat->add_option("--vot", mat.vot, "observation boundary");
    sc_mat->add_flag("--gate-off", mat.gate_off, "disable the VOT gate");
    sc_mat->add_flag("!--no-graph", mat.include_graph, "exclude the GRAPH block");
    sc_mat->add_flag("!--no-net", mat.include_net, "exclude the NET block");
    auto* mat_seed = sc_mat->add_option("--seed", mat.seed, "community detection seed");

    // audit
    edm::AuditOptions aud;
    auto* sc_aud = app.add_subcommand("audit", "leakage audit (exit 2 on failure)");
    sc_aud->add_option("--data", aud.data_dir, "dataset directory (assembles in-process)");
    sc_aud->add_option("--matrix", aud.matrix_csv, "exported matrix CSV");
    sc_aud->add_option("--columns", aud.columns_json, "exported column-spec JSON");
    sc_aud->add_option("--out-json", aud.out_json, "write the report as JSON");
    sc_aud->add_option("--out-table", aud.out_table, "write the human-readable table");
    sc_aud->add_option("--vot", aud.thresholds.vot, "observation boundary");
    sc_aud->add_option("--purity-threshold", aud.thresholds.purity, "purity screen threshold");
    sc_aud->add_option("--r-threshold", aud.thresholds.r_threshold, "point-biserial threshold");
    sc_aud->add_option("--auc-threshold", aud.thresholds.auc_threshold, "rank-AUC threshold");
    sc_aud->add_option("--min-support", aud.thresholds.min_support, "absolute support floor");
    auto* aud_seed = sc_aud->add_option("--seed", aud.seed, "community detection seed");

    // ablate
    edm::AblateOptions abl;
    auto* sc_abl = app.add_subcommand("ablate", "run the M0-M3 leave-cohort-out ablation");
    sc_abl->add_option("--data", abl.data_dir, "dataset directory")->required();
    sc_abl->add_option("--out", abl.out_json, "ablation report JSON path")->required();
    sc_abl->add_option("--vot", abl.ablation.vot, "observation boundary");
    auto* abl_seed = sc_abl->add_option("--seed", abl.ablation.seed, "run seed");
    sc_abl->add_option("--target-folds", abl.target_folds, "fold count target");
    sc_abl->add_option("--min-test", abl.min_test, "minimum held-out students per fold");
    sc_abl->add_option("--inner-k", abl.ablation.inner_k, "inner cohort-grouped folds");
    sc_abl->add_option("--threads", abl.ablation.threads, "worker threads (0 = hardware)");
    sc_abl->add_flag("--gate-off", abl.ablation.gate_off, "disable the VOT gate");
    sc_abl->add_option("--exclude-from-audit", abl.audit_report_json,
                       "audit report JSON whose fatal columns are excluded (the FIXED rerun)");

    // report
    edm::ReportOptions rep;
    auto* sc_rep = app.add_subcommand("report", "emit report tables from an ablation JSON");
    sc_rep->add_option("--ablation", rep.ablation_json, "ablation report JSON")->required();
    sc_rep->add_option("--out", rep.out_dir, "output directory")->required();

    // pipeline
    edm::PipelineOptions pipe;
    auto* sc_pipe = app.add_subcommand("pipeline", "audit, then ablate and report");
    sc_pipe->add_option("--data", pipe.data_dir, "dataset directory")->required();
    sc_pipe->add_option("--out", pipe.out_dir, "output directory")->required();
    sc_pipe->add_option("--vot", pipe.vot, "observation boundary");
    auto* pipe_seed = sc_pipe->add_option("--seed", pipe.seed, "run seed");
    sc_pipe->add_option("--target-folds", pipe.target_folds, "fold count target");
    sc_pipe->add_option("--min-test", pipe.min_test, "minimum held-out students per fold");
    sc_pipe->add_option("--inner-k", pipe.inner_k, "inner cohort-grouped folds");
    sc_pipe->add_option("--threads", pipe.threads, "worker threads (0 = hardware)");
    sc_pipe->add_flag("--skip-audit", pipe.skip_audit, "proceed past a failed audit");
    sc_pipe->add_flag("--gate-off", pipe.gate_off, "disable the VOT gate during ablation");
    sc_pipe->add_flag("--fix", pipe.fix, "strip fatal columns and rerun clean (FIXED)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : edm::kExitUsage;
    }

    try {
        if (!config_path.empty()) {
            const nlohmann::json cfg = load_config_file(config_path);
            config_override(cfg, "seed", gen_seed, gen.config.seed);
            config_override(cfg, "seed", nstats_seed, nstats.seed);
            config_override(cfg, "seed", mat_seed, mat.seed);
            config_override(cfg, "seed", aud_seed, aud.seed);
            config_override(cfg, "seed", abl_seed, abl.ablation.seed);
            config_override(cfg, "seed", pipe_seed, pipe.seed);
            if (cfg.contains("vot")) {
                const int vot = cfg.at("vot").get<int>();
                if (sc_gen->count("--vot") == 0) gen.config.vot = vot;
                if (sc_nstats->count("--vot") == 0) nstats.vot = vot;
                if (sc_mat->count("--vot") == 0) mat.vot = vot;
                if (sc_aud->count("--vot") == 0) aud.thresholds.vot = vot;
                if (sc_abl->count("--vot") == 0) abl.ablation.vot = vot;
                if (sc_pipe->count("--vot") == 0) pipe.vot = vot;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return edm::kExitUsage;
    }

    apply_env_seed(gen_seed, gen.config.seed);
    apply_env_seed(nstats_seed, nstats.seed);
    apply_env_seed(mat_seed, mat.seed);
    apply_env_seed(aud_seed, aud.seed);
    apply_env_seed(abl_seed, abl.ablation.seed);
    apply_env_seed(pipe_seed, pipe.seed);

    if (sc_gen->parsed()) return edm::cmd_generate(gen);
    if (sc_sum->parsed()) return edm::cmd_summary(sum);
    if (sc_gstats->parsed()) return edm::cmd_graph_stats(gstats);
    if (sc_nstats->parsed()) return edm::cmd_net_stats(nstats);
    if (sc_mat->parsed()) return edm::cmd_matrix(mat);
    if (sc_aud->parsed()) {
        if (aud.data_dir.empty() && (aud.matrix_csv.empty() || aud.columns_json.empty())) {
            std::cerr << "error: audit needs --data or both --matrix and --columns\n";
            return edm::kExitUsage;
        }
        return edm::cmd_audit(aud);
    }
    if (sc_abl->parsed()) return edm::cmd_ablate(abl);
    if (sc_rep->parsed()) return edm::cmd_report(rep);
    if (sc_pipe->parsed()) return edm::cmd_pipeline(pipe);
    return edm::kExitUsage;
}
