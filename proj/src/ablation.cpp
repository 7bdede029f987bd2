#include "edm/ablation.hpp"

#include "edm/csv.hpp"
#include "edm/curriculum_graph.hpp"
#include "edm/preprocess.hpp"
#include "edm/rng.hpp"
#include "edm/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

using nlohmann::json;

namespace edm {

const std::vector<ModelVariant>& standard_variants() {
    static const std::vector<ModelVariant> variants{
        {"M0", false, false},
        {"M1", false, true},
        {"M2", true, false},
        {"M3", true, true},
    };
    return variants;
}

namespace {

std::vector<std::string> train_students_of(const Dataset& ds, const Fold& fold) {
    std::vector<std::string> out;
    for (const auto& s : ds.students)
        if (fold.train_cohorts.count(s.cohort_year)) out.push_back(s.student_id);
    return out;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
    MeanStd ms;
    ms.mean = mean_of(v);
    ms.std = population_std(v);
    return ms;
}

} // namespace

AblationReport run_ablation(const Dataset& ds, const FoldPlan& plan, const AblationOptions& opt) {
    AblationReport report;
    report.vot = opt.vot;
    report.seed = opt.seed;
    report.plan = plan;

    const CurriculumGraph graph = build_graph(ds.curriculum);
    const auto& variants = standard_variants();
    for (const auto& v : variants) report.config_names.push_back(v.name);

    // cohort net blocks are fold-invariant (each cohort's events only)
    std::map<int, CohortNetBlock> net_cache;
    for (int year : ds.cohort_years())
        net_cache.emplace(year, compute_net_block(ds, year, opt.vot, opt.seed));

    for (std::size_t fi = 0; fi < plan.folds.size(); ++fi) {
        const Fold& fold = plan.folds[fi];
        const std::vector<std::string> train_ids = train_students_of(ds, fold);
        std::set<std::string> train_set(train_ids.begin(), train_ids.end());
        const std::map<std::string, int> counts = enrolment_counts(ds, &train_set);
        const std::set<std::string> bottlenecks =
            identify_bottlenecks(graph, counts, opt.bottleneck_quantile);

        for (std::size_t ci = 0; ci < variants.size(); ++ci) {
            const ModelVariant& variant = variants[ci];
            AssembleOptions aopt;
            aopt.vot = opt.vot;
            aopt.include_graph = variant.graph;
            aopt.include_net = variant.net;
            aopt.enforce_vot_gate = !opt.gate_off;
            aopt.exclude_columns = opt.exclude_columns;
            aopt.net_seed = opt.seed;

            const FeatureMatrix train_m =
                assemble(ds, graph, bottlenecks, aopt, train_ids, &net_cache);
            const FeatureMatrix test_m =
                assemble(ds, graph, bottlenecks, aopt, fold.test_students, &net_cache);

            std::vector<int> train_rows(train_m.n_rows());
            std::iota(train_rows.begin(), train_rows.end(), 0);
            std::vector<int> test_rows(test_m.n_rows());
            std::iota(test_rows.begin(), test_rows.end(), 0);

            const PreprocessPlan pp = fit_preprocess(train_m, train_rows);
            const DesignMatrix xtr = apply_preprocess(pp, train_m, train_rows);
            const DesignMatrix xte = apply_preprocess(pp, test_m, test_rows);

            const std::uint64_t fold_seed = Rng::derive(opt.seed, 0xAB1A + fi * 8 + ci);
            const GridSearchResult search =
                grid_search(xtr.cols, train_m.outcome, train_m.cohort, opt.grid, opt.inner_k,
                            fold_seed, opt.threads);
            ForestConfig chosen = search.best;
            chosen.seed = Rng::derive(fold_seed, 0xF17);
            const ForestModel model =
                fit_forest(xtr.cols, train_m.outcome, chosen, train_rows, opt.threads);

            const std::vector<double> scores = model.predict_proba(xte.cols, test_rows);
            FoldConfigResult result;
            result.metrics = compute_metrics(scores, test_m.outcome);
            result.chosen = chosen;
            result.design_names = xtr.names;
            for (const auto& b : xtr.blocks) result.design_blocks.emplace_back(block_name(b));
            result.importance = model.importance;
            report.folds[variant.name].push_back(std::move(result));

            if (fi == 0)
                report.aggregates[variant.name].n_features = train_m.n_cols();
        }
    }

    // aggregates
    for (const auto& variant : variants) {
        auto& agg = report.aggregates[variant.name];
        auto& fold_results = report.folds[variant.name];
        std::vector<double> acc, prec, rec, f1, auc, bal;
        for (const auto& r : fold_results) {
            acc.push_back(r.metrics.accuracy);
            prec.push_back(r.metrics.precision);
            rec.push_back(r.metrics.recall);
            f1.push_back(r.metrics.f1);
            bal.push_back(r.metrics.balanced_accuracy);
            if (r.metrics.roc_auc) auc.push_back(*r.metrics.roc_auc);
        }
        const MeanStd a = mean_std(acc), p = mean_std(prec), rc = mean_std(rec),
                      f = mean_std(f1), u = mean_std(auc), b = mean_std(bal);
        agg.accuracy_mean = a.mean;
        agg.accuracy_std = a.std;
        agg.precision_mean = p.mean;
        agg.precision_std = p.std;
        agg.recall_mean = rc.mean;
        agg.recall_std = rc.std;
        agg.f1_mean = f.mean;
        agg.f1_std = f.std;
        agg.auc_mean = u.mean;
        agg.auc_std = u.std;
        agg.balanced_mean = b.mean;
        agg.balanced_std = b.std;

        for (auto& r : fold_results)
            r.outlier = std::fabs(r.metrics.f1 - agg.f1_mean) > 2.0 * agg.f1_std;

        // importance by design column name, averaged over all folds
        std::map<std::string, double> sums;
        std::map<std::string, std::string> blocks;
        std::map<std::string, double> block_sums;
        for (const auto& r : fold_results) {
            for (std::size_t i = 0; i < r.design_names.size(); ++i) {
                sums[r.design_names[i]] += r.importance[i];
                blocks[r.design_names[i]] = r.design_blocks[i];
                block_sums[r.design_blocks[i]] += r.importance[i];
            }
        }
        const double n_folds = static_cast<double>(fold_results.size());
        std::vector<std::pair<std::string, double>> ranking;
        for (const auto& [name, total] : sums) ranking.emplace_back(name, total / n_folds);
        std::sort(ranking.begin(), ranking.end(), [](const auto& x, const auto& y) {
            if (x.second != y.second) return x.second > y.second;
            return x.first < y.first;
        });
        agg.importance_ranking = std::move(ranking);
        agg.ranking_block = std::move(blocks);
        for (const auto& [block, total] : block_sums)
            agg.block_importance[block] = total / n_folds;
    }

    // deltas on 4-decimal-rounded means so the CSV cross-check is exact
    auto delta = [&report](const std::string& from, const std::string& to) {
        AblationDelta d;
        d.from = from;
        d.to = to;
        d.delta_f1 = round4(round4(report.aggregates.at(to).f1_mean) -
                            round4(report.aggregates.at(from).f1_mean));
        d.delta_auc = round4(round4(report.aggregates.at(to).auc_mean) -
                             round4(report.aggregates.at(from).auc_mean));
        return d;
    };
    report.deltas.push_back(delta("M0", "M1"));
    report.deltas.push_back(delta("M0", "M2"));
    report.deltas.push_back(delta("M2", "M3"));
    return report;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

namespace {

json metrics_to_json(const FoldMetrics& m) {
    json j;
    j["accuracy"] = m.accuracy;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["balanced_accuracy"] = m.balanced_accuracy;
    if (m.roc_auc) j["roc_auc"] = *m.roc_auc;
    else j["roc_auc"] = nullptr;
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["tn"] = m.tn;
    j["fn"] = m.fn;
    j["n_test"] = m.n_test;
    return j;
}

FoldMetrics metrics_from_json(const json& j) {
    FoldMetrics m;
    m.accuracy = j.at("accuracy").get<double>();
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.balanced_accuracy = j.at("balanced_accuracy").get<double>();
    if (!j.at("roc_auc").is_null()) m.roc_auc = j.at("roc_auc").get<double>();
    m.tp = j.at("tp").get<int>();
    m.fp = j.at("fp").get<int>();
    m.tn = j.at("tn").get<int>();
    m.fn = j.at("fn").get<int>();
    m.n_test = j.at("n_test").get<int>();
    return m;
}

json config_to_json(const ForestConfig& c) {
    json j;
    j["n_trees"] = c.n_trees;
    if (c.max_depth) j["max_depth"] = *c.max_depth;
    else j["max_depth"] = nullptr;
    j["min_samples_leaf"] = c.min_samples_leaf;
    j["features_per_split"] = c.features_per_split;
    j["balanced_class_weights"] = c.balanced_class_weights;
    j["seed"] = c.seed;
    return j;
}

ForestConfig config_from_json(const json& j) {
    ForestConfig c;
    c.n_trees = j.at("n_trees").get<int>();
    if (!j.at("max_depth").is_null()) c.max_depth = j.at("max_depth").get<int>();
    c.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    c.features_per_split = j.at("features_per_split").get<int>();
    c.balanced_class_weights = j.at("balanced_class_weights").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

} // namespace

std::string AblationReport::to_json() const {
    json doc;
    doc["vot"] = vot;
    doc["seed"] = seed;
    doc["plan"] = json::parse(plan.to_json());
    doc["configs"] = config_names;
    json jfolds = json::object();
    for (const auto& [name, results] : folds) {
        json arr = json::array();
        for (const auto& r : results) {
            json jr;
            jr["metrics"] = metrics_to_json(r.metrics);
            jr["chosen"] = config_to_json(r.chosen);
            jr["design_names"] = r.design_names;
            jr["design_blocks"] = r.design_blocks;
            jr["importance"] = r.importance;
            jr["outlier"] = r.outlier;
            arr.push_back(std::move(jr));
        }
        jfolds[name] = std::move(arr);
    }
    doc["folds"] = std::move(jfolds);
    json jagg = json::object();
    for (const auto& [name, a] : aggregates) {
        json ja;
        ja["n_features"] = a.n_features;
        ja["accuracy"] = {{"mean", a.accuracy_mean}, {"std", a.accuracy_std}};
        ja["precision"] = {{"mean", a.precision_mean}, {"std", a.precision_std}};
        ja["recall"] = {{"mean", a.recall_mean}, {"std", a.recall_std}};
        ja["f1"] = {{"mean", a.f1_mean}, {"std", a.f1_std}};
        ja["roc_auc"] = {{"mean", a.auc_mean}, {"std", a.auc_std}};
        ja["balanced_accuracy"] = {{"mean", a.balanced_mean}, {"std", a.balanced_std}};
        json ranking = json::array();
        for (const auto& [col, imp] : a.importance_ranking)
            ranking.push_back({{"feature", col},
                               {"block", a.ranking_block.count(col) ? a.ranking_block.at(col) : ""},
                               {"importance", imp}});
        ja["importance_ranking"] = std::move(ranking);
        ja["block_importance"] = a.block_importance;
        jagg[name] = std::move(ja);
    }
    doc["aggregates"] = std::move(jagg);
    json jdeltas = json::array();
    for (const auto& d : deltas)
        jdeltas.push_back(
            {{"from", d.from}, {"to", d.to}, {"delta_f1", d.delta_f1}, {"delta_auc", d.delta_auc}});
    doc["deltas"] = std::move(jdeltas);
    return doc.dump(2);
}

AblationReport AblationReport::from_json(const std::string& text) {
    const json doc = json::parse(text);
    AblationReport report;
    report.vot = doc.at("vot").get<int>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.config_names = doc.at("configs").get<std::vector<std::string>>();
    {
        const json& jplan = doc.at("plan");
        report.plan.target_folds = jplan.at("target_folds").get<int>();
        report.plan.min_test = jplan.at("min_test").get<int>();
        for (const auto& jf : jplan.at("folds")) {
            Fold f;
            f.test_cohorts = jf.at("test_cohorts").get<std::vector<int>>();
            f.split_part = jf.at("split_part").get<int>();
            const auto train = jf.at("train_cohorts").get<std::vector<int>>();
            f.train_cohorts.insert(train.begin(), train.end());
            f.test_students.resize(jf.at("n_test").get<std::size_t>()); // sizes only
            report.plan.folds.push_back(std::move(f));
        }
    }
    for (auto it = doc.at("folds").begin(); it != doc.at("folds").end(); ++it) {
        for (const auto& jr : it.value()) {
            FoldConfigResult r;
            r.metrics = metrics_from_json(jr.at("metrics"));
            r.chosen = config_from_json(jr.at("chosen"));
            r.design_names = jr.at("design_names").get<std::vector<std::string>>();
            r.design_blocks = jr.at("design_blocks").get<std::vector<std::string>>();
            r.importance = jr.at("importance").get<std::vector<double>>();
            r.outlier = jr.at("outlier").get<bool>();
            report.folds[it.key()].push_back(std::move(r));
        }
    }
    for (auto it = doc.at("aggregates").begin(); it != doc.at("aggregates").end(); ++it) {
        const json& ja = it.value();
        ConfigAggregate a;
        a.n_features = ja.at("n_features").get<int>();
        a.accuracy_mean = ja.at("accuracy").at("mean").get<double>();
        a.accuracy_std = ja.at("accuracy").at("std").get<double>();
        a.precision_mean = ja.at("precision").at("mean").get<double>();
        a.precision_std = ja.at("precision").at("std").get<double>();
        a.recall_mean = ja.at("recall").at("mean").get<double>();
        a.recall_std = ja.at("recall").at("std").get<double>();
        a.f1_mean = ja.at("f1").at("mean").get<double>();
        a.f1_std = ja.at("f1").at("std").get<double>();
        a.auc_mean = ja.at("roc_auc").at("mean").get<double>();
        a.auc_std = ja.at("roc_auc").at("std").get<double>();
        a.balanced_mean = ja.at("balanced_accuracy").at("mean").get<double>();
        a.balanced_std = ja.at("balanced_accuracy").at("std").get<double>();
        for (const auto& jr : ja.at("importance_ranking")) {
            a.importance_ranking.emplace_back(jr.at("feature").get<std::string>(),
                                              jr.at("importance").get<double>());
            a.ranking_block[jr.at("feature").get<std::string>()] =
                jr.at("block").get<std::string>();
        }
        if (ja.contains("block_importance"))
            a.block_importance = ja.at("block_importance").get<std::map<std::string, double>>();
        report.aggregates[it.key()] = std::move(a);
    }
    for (const auto& jd : doc.at("deltas")) {
        AblationDelta d;
        d.from = jd.at("from").get<std::string>();
        d.to = jd.at("to").get<std::string>();
        d.delta_f1 = jd.at("delta_f1").get<double>();
        d.delta_auc = jd.at("delta_auc").get<double>();
        report.deltas.push_back(std::move(d));
    }
    return report;
}

// ---------------------------------------------------------------------------
// report files
// ---------------------------------------------------------------------------

namespace {

std::ofstream open_report(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

std::string impact_text(double delta_f1) {
    char buf[64];
    if (delta_f1 < -5e-5) {
        std::snprintf(buf, sizeof buf, "Slight decrease (%.4f)", delta_f1);
    } else if (delta_f1 > 5e-5) {
        std::snprintf(buf, sizeof buf, "Slight increase (+%.4f)", delta_f1);
    } else {
        std::snprintf(buf, sizeof buf, "No change (0.0000)");
    }
    return buf;
}

} // namespace

void emit_reports(const AblationReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        auto out = open_report(out_dir + "/model_comparison.csv");
        csv::write_row(out, {"Model", "Features", "Accuracy", "Precision", "Recall", "F1-Score",
                             "ROC-AUC"});
        for (const auto& name : report.config_names) {
            const auto& a = report.aggregates.at(name);
            csv::write_row(out, {name, std::to_string(a.n_features), format4(a.accuracy_mean),
                                 format4(a.precision_mean), format4(a.recall_mean),
                                 format4(a.f1_mean), format4(a.auc_mean)});
        }
    }

    for (const auto& name : report.config_names) {
        const auto& a = report.aggregates.at(name);
        auto out = open_report(out_dir + "/importance_topk_" + name + ".csv");
        csv::write_row(out, {"Feature", "Block", "Importance"});
        const std::size_t k = std::min<std::size_t>(20, a.importance_ranking.size());
        for (std::size_t i = 0; i < k; ++i) {
            const auto& [feature, importance] = a.importance_ranking[i];
            csv::write_row(out, {feature,
                                 a.ranking_block.count(feature) ? a.ranking_block.at(feature) : "",
                                 format4(importance)});
        }
    }

    {
        auto out = open_report(out_dir + "/net_effect.csv");
        csv::write_row(out, {"Model", "Features", "F1-Score", "ROC-AUC", "Delta_F1",
                             "Delta_ROC-AUC", "Impact"});
        const auto& base = report.aggregates.at("M0");
        csv::write_row(out, {"M0", std::to_string(base.n_features), format4(base.f1_mean),
                             format4(base.auc_mean), "", "", "Baseline"});
        for (const auto& d : report.deltas) {
            const auto& a = report.aggregates.at(d.to);
            char df1[32], dauc[32];
            std::snprintf(df1, sizeof df1, "%.4f", d.delta_f1);
            std::snprintf(dauc, sizeof dauc, "%.4f", d.delta_auc);
            csv::write_row(out, {d.to + " (vs " + d.from + ")", std::to_string(a.n_features),
                                 format4(a.f1_mean), format4(a.auc_mean), df1, dauc,
                                 impact_text(d.delta_f1)});
        }
    }

    {
        auto out = open_report(out_dir + "/foldwise.csv");
        csv::write_row(out, {"Fold", "TestCohorts", "Model", "NTest", "Accuracy", "Precision",
                             "Recall", "F1-Score", "ROC-AUC", "BalancedAccuracy", "Outlier"});
        for (std::size_t fi = 0; fi < report.plan.folds.size(); ++fi) {
            std::string cohorts;
            for (int y : report.plan.folds[fi].test_cohorts) {
                if (!cohorts.empty()) cohorts += '+';
                cohorts += std::to_string(y);
            }
            if (report.plan.folds[fi].split_part >= 0)
                cohorts += report.plan.folds[fi].split_part == 0 ? "a" : "b";
            for (const auto& name : report.config_names) {
                const auto& r = report.folds.at(name)[fi];
                csv::write_row(out, {std::to_string(fi + 1), cohorts, name,
                                     std::to_string(r.metrics.n_test), format4(r.metrics.accuracy),
                                     format4(r.metrics.precision), format4(r.metrics.recall),
                                     format4(r.metrics.f1),
                                     r.metrics.roc_auc ? format4(*r.metrics.roc_auc) : "NA",
                                     format4(r.metrics.balanced_accuracy),
                                     r.outlier ? "1" : "0"});
            }
        }
    }

    {
        auto out = open_report(out_dir + "/summary.md");
        out << "# Ablation summary\n\n";
        out << "Leave-cohort-out evaluation, " << report.plan.folds.size() << " folds, VOT = term "
            << report.vot << ", seed " << report.seed << ".\n\n";
        out << "## Model comparison\n\n";
        out << "| Model | Features | Accuracy | Precision | Recall | F1-Score | ROC-AUC | Balanced Acc. |\n";
        out << "|-------|----------|----------|-----------|--------|----------|---------|---------------|\n";
        for (const auto& name : report.config_names) {
            const auto& a = report.aggregates.at(name);
            out << "| " << name << " | " << a.n_features << " | " << format4(a.accuracy_mean)
                << " | " << format4(a.precision_mean) << " | " << format4(a.recall_mean) << " | "
                << format4(a.f1_mean) << " ± " << format4(a.f1_std) << " | "
                << format4(a.auc_mean) << " ± " << format4(a.auc_std) << " | "
                << format4(a.balanced_mean) << " |\n";
        }
        out << "\n## Network effect\n\n";
        out << "| Step | ΔF1 | ΔROC-AUC | Impact |\n|------|-----|----------|--------|\n";
        for (const auto& d : report.deltas) {
            char df1[32], dauc[32];
            std::snprintf(df1, sizeof df1, "%+.4f", d.delta_f1);
            std::snprintf(dauc, sizeof dauc, "%+.4f", d.delta_auc);
            out << "| " << d.from << " → " << d.to << " | " << df1 << " | " << dauc << " | "
                << impact_text(d.delta_f1) << " |\n";
        }
        for (const auto& name : report.config_names) {
            const auto& a = report.aggregates.at(name);
            out << "\n## Top features (" << name << ")\n\n";
            out << "| Feature | Block | Importance |\n|---------|-------|------------|\n";
            const std::size_t k = std::min<std::size_t>(10, a.importance_ranking.size());
            for (std::size_t i = 0; i < k; ++i) {
                const auto& [feature, importance] = a.importance_ranking[i];
                out << "| " << feature << " | "
                    << (a.ranking_block.count(feature) ? a.ranking_block.at(feature) : "") << " | "
                    << format4(importance) << " |\n";
            }
            out << "\nBlock importance: ";
            bool first = true;
            for (const auto& [block, share] : a.block_importance) {
                out << (first ? "" : ", ") << block << " " << format4(share);
                first = false;
            }
            out << "\n";
        }
        out << "\n## Fold stability\n\n";
        int outliers = 0;
        for (const auto& name : report.config_names)
            for (const auto& r : report.folds.at(name))
                outliers += r.outlier ? 1 : 0;
        out << "Per-config F1 standard deviations: ";
        bool first = true;
        for (const auto& name : report.config_names) {
            out << (first ? "" : ", ") << name << " " << format4(report.aggregates.at(name).f1_std);
            first = false;
        }
        out << ". Outlier folds (|F1 − mean| > 2σ): " << outliers << ".\n";
    }
}

} // namespace edm
