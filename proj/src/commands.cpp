#include "edm/commands.hpp"

#include "edm/csv.hpp"
#include "edm/curriculum_graph.hpp"
#include "edm/preprocess.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

namespace fs = std::filesystem;

namespace edm {

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

// uniform error mapping for every subcommand body
template <typename Fn>
int run_guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const VotGateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAuditFail;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

std::map<int, std::vector<std::string>> cohort_map(const Dataset& ds) {
    std::map<int, std::vector<std::string>> out;
    for (const auto& s : ds.students) out[s.cohort_year].push_back(s.student_id);
    return out;
}

FeatureMatrix assemble_full(const Dataset& ds, int vot, double quantile, std::uint64_t seed,
                            bool gate_off, const std::set<std::string>& exclude = {}) {
    const CurriculumGraph graph = build_graph(ds.curriculum);
    const std::set<std::string> bottlenecks = identify_bottlenecks(graph, ds, quantile);
    AssembleOptions aopt;
    aopt.vot = vot;
    aopt.include_graph = true;
    aopt.include_net = true;
    aopt.enforce_vot_gate = !gate_off;
    aopt.exclude_columns = exclude;
    aopt.net_seed = seed;
    return assemble(ds, graph, bottlenecks, aopt);
}

} // namespace

int cmd_generate(const GenerateOptions& opt) {
    return run_guarded([&] {
        const Dataset ds = generate_synthetic(opt.config);
        fs::create_directories(opt.out_dir);
        write_dataset(ds, DatasetPaths::in_dir(opt.out_dir));
        std::cout << summary_to_json(dataset_summary(ds)) << "\n";
        return kExitOk;
    });
}

int cmd_summary(const SummaryOptions& opt) {
    return run_guarded([&] {
        const Dataset ds = load_dataset(DatasetPaths::in_dir(opt.data_dir));
        std::cout << summary_to_json(dataset_summary(ds)) << "\n";
        return kExitOk;
    });
}

int cmd_graph_stats(const GraphStatsOptions& opt) {
    return run_guarded([&] {
        const Dataset ds = load_dataset(DatasetPaths::in_dir(opt.data_dir));
        const CurriculumGraph graph = build_graph(ds.curriculum);
        const auto bottlenecks = identify_bottlenecks(graph, ds, opt.bottleneck_quantile);
        std::cout << graph_stats_json(graph, bottlenecks) << "\n";
        return kExitOk;
    });
}

int cmd_net_stats(const NetStatsOptions& opt) {
    return run_guarded([&] {
        const Dataset ds = load_dataset(DatasetPaths::in_dir(opt.data_dir));
        std::cout << net_stats_json(ds, opt.vot, opt.seed) << "\n";
        if (!opt.edges_csv.empty()) {
            std::ofstream out(opt.edges_csv, std::ios::binary | std::ios::trunc);
            if (!out) throw DataError("cannot write " + opt.edges_csv);
            csv::write_row(out, {"student_i", "student_j", "weight"});
            for (int year : ds.cohort_years()) {
                const CooccurrenceGraph g = build_cooccurrence(ds, year, opt.vot, 0);
                for (int v = 0; v < g.n(); ++v)
                    for (const auto& [u, w] : g.adj[v])
                        if (u > v)
                            csv::write_row(out, {g.nodes[v], g.nodes[u], csv::format_number(w)});
            }
        }
        return kExitOk;
    });
}

int cmd_matrix(const MatrixOptions& opt) {
    return run_guarded([&] {
        const Dataset ds = load_dataset(DatasetPaths::in_dir(opt.data_dir));
        const CurriculumGraph graph = build_graph(ds.curriculum);
        const auto bottlenecks = identify_bottlenecks(graph, ds, opt.bottleneck_quantile);
        AssembleOptions aopt;
        aopt.vot = opt.vot;
        aopt.include_graph = opt.include_graph;
        aopt.include_net = opt.include_net;
        aopt.enforce_vot_gate = !opt.gate_off;
        aopt.net_seed = opt.seed;
        const FeatureMatrix m = assemble(ds, graph, bottlenecks, aopt);
        export_matrix(m, opt.out_csv, opt.out_columns);
        std::cout << "wrote " << m.n_rows() << " rows x " << m.n_cols() << " columns\n";
        return kExitOk;
    });
}

int cmd_audit(const AuditOptions& opt) {
    return run_guarded([&] {
        FeatureMatrix m;
        if (!opt.matrix_csv.empty()) {
            m = import_matrix(opt.matrix_csv, opt.columns_json);
        } else {
            const Dataset ds = load_dataset(DatasetPaths::in_dir(opt.data_dir));
            // gate off on purpose: the audit has to see dirty columns
            m = assemble_full(ds, opt.thresholds.vot, opt.bottleneck_quantile, opt.seed, true);
        }
        const AuditReport report = run_audit(m, opt.thresholds);
        if (!opt.out_json.empty()) write_text(opt.out_json, audit_report_json(report));
        if (!opt.out_table.empty()) write_text(opt.out_table, audit_report_table(report));
        std::cout << audit_report_table(report);
        return report.pass ? kExitOk : kExitAuditFail;
    });
}

int cmd_ablate(const AblateOptions& opt) {
    return run_guarded([&] {
        const Dataset ds = load_dataset(DatasetPaths::in_dir(opt.data_dir));
        AblationOptions aopt = opt.ablation;
        if (!opt.audit_report_json.empty()) {
            std::ifstream in(opt.audit_report_json, std::ios::binary);
            if (!in) throw DataError("cannot open " + opt.audit_report_json);
            const auto doc = nlohmann::json::parse(in);
            for (const auto& col : doc.at("fatal_columns"))
                aopt.exclude_columns.insert(col.get<std::string>());
        }
        const FoldPlan plan = plan_folds(cohort_map(ds), opt.target_folds, opt.min_test);
        const AblationReport report = run_ablation(ds, plan, aopt);
        write_text(opt.out_json, report.to_json());
        std::cout << "wrote " << opt.out_json << " (" << plan.folds.size() << " folds x "
                  << report.config_names.size() << " configs)\n";
        return kExitOk;
    });
}

int cmd_report(const ReportOptions& opt) {
    return run_guarded([&] {
        std::ifstream in(opt.ablation_json, std::ios::binary);
        if (!in) throw DataError("cannot open " + opt.ablation_json);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const AblationReport report = AblationReport::from_json(text);
        emit_reports(report, opt.out_dir);
        std::cout << "wrote report tables to " << opt.out_dir << "\n";
        return kExitOk;
    });
}

int cmd_pipeline(const PipelineOptions& opt) {
    return run_guarded([&] {
        const Dataset ds = load_dataset(DatasetPaths::in_dir(opt.data_dir));
        fs::create_directories(opt.out_dir);

        // stage 1: audit on the fully assembled matrix, gate off so dirty
        // columns are visible to the screens
        AuditThresholds thresholds = opt.thresholds;
        thresholds.vot = opt.vot;
        const FeatureMatrix full =
            assemble_full(ds, opt.vot, opt.bottleneck_quantile, opt.seed, true);
        AuditReport audit = run_audit(full, thresholds);
        write_text(opt.out_dir + "/audit_report.json", audit_report_json(audit));
        write_text(opt.out_dir + "/audit_report.txt", audit_report_table(audit));
        std::cout << audit_report_table(audit);

        std::set<std::string> exclude;
        if (!audit.pass) {
            if (opt.skip_audit) {
                std::cout << "audit failed; --skip-audit set, continuing with dirty columns\n";
            } else if (opt.fix) {
                for (const auto& col : audit.fatal_columns()) exclude.insert(col);
                const FeatureMatrix cleaned = strip_and_rebuild(full, audit);
                const AuditReport re = run_audit(cleaned, thresholds);
                write_text(opt.out_dir + "/audit_report_fixed.json", audit_report_json(re));
                if (!re.pass) {
                    std::cerr << "error: audit still fails after stripping fatal columns\n";
                    return kExitAuditFail;
                }
                std::cout << "stripped " << exclude.size()
                          << " column(s); re-audit passes, rerunning clean\n";
            } else {
                std::cerr << "audit failed; stopping before ablation (use --fix to strip and "
                             "rerun, or --skip-audit to proceed)\n";
                return kExitAuditFail;
            }
        }

        // stage 2: leave-cohort-out ablation
        AblationOptions aopt;
        aopt.vot = opt.vot;
        aopt.bottleneck_quantile = opt.bottleneck_quantile;
        aopt.grid = opt.grid;
        aopt.inner_k = opt.inner_k;
        aopt.seed = opt.seed;
        aopt.gate_off = opt.gate_off;
        aopt.exclude_columns = exclude;
        aopt.threads = opt.threads;
        const FoldPlan plan = plan_folds(cohort_map(ds), opt.target_folds, opt.min_test);
        const AblationReport report = run_ablation(ds, plan, aopt);
        write_text(opt.out_dir + "/ablation_report.json", report.to_json());

        // stage 3: report tables
        emit_reports(report, opt.out_dir);
        std::cout << "pipeline complete: " << opt.out_dir << "\n";
        return kExitOk;
    });
}

} // namespace edm
