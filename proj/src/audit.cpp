#include "edm/audit.hpp"

#include "edm/metrics.hpp"
#include "edm/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using nlohmann::json;

namespace edm {

const char* screen_name(Screen s) {
    switch (s) {
    case Screen::temporal: return "temporal";
    case Screen::purity: return "purity";
    case Screen::correlation: return "correlation";
    }
    return "?";
}

const char* severity_name(Severity s) {
    return s == Severity::fatal ? "fatal" : "warning";
}

std::vector<std::string> AuditReport::fatal_columns() const {
    std::set<std::string> cols;
    for (const auto& f : findings)
        if (f.severity == Severity::fatal) cols.insert(f.column);
    return {cols.begin(), cols.end()};
}

std::vector<AuditFinding> temporal_screen(const std::vector<FeatureColumn>& columns, int vot) {
    std::vector<AuditFinding> out;
    for (const auto& col : columns) {
        if (col.availability_term <= vot) continue; // boundary is inclusive
        AuditFinding f;
        f.column = col.name;
        f.screen = Screen::temporal;
        f.severity = Severity::fatal;
        f.availability_term = col.availability_term;
        f.vot = vot;
        out.push_back(std::move(f));
    }
    return out;
}

namespace {

struct CategoryStats {
    std::string label;
    int support = 0;
    int positives = 0;
};

void screen_categories(const std::string& column, const std::vector<CategoryStats>& cats,
                       int min_support, double purity, std::vector<AuditFinding>& out) {
    for (const auto& cat : cats) {
        if (cat.support < min_support) continue;
        const double rate = static_cast<double>(cat.positives) / cat.support;
        if (rate >= purity || rate <= 1.0 - purity) {
            AuditFinding f;
            f.column = column;
            f.screen = Screen::purity;
            f.severity = Severity::fatal;
            f.category = cat.label;
            f.support = cat.support;
            f.conditional_rate = rate;
            out.push_back(std::move(f));
        }
    }
}

} // namespace

std::vector<AuditFinding> purity_screen(const FeatureMatrix& m, const AuditThresholds& t) {
    std::vector<AuditFinding> out;
    const int n = m.n_rows();
    if (n == 0) return out;
    const int min_support = std::max(
        t.min_support, static_cast<int>(std::ceil(t.min_support_frac * static_cast<double>(n))));

    for (int c = 0; c < m.n_cols(); ++c) {
        const auto& col = m.columns[c];
        std::vector<CategoryStats> cats;
        if (col.dtype == ColumnType::categorical || col.dtype == ColumnType::boolean) {
            std::map<std::string, CategoryStats> by_label;
            for (int r = 0; r < n; ++r) {
                const Cell& cell = m.cells[c][r];
                if (cell.missing) continue;
                const std::string label =
                    col.dtype == ColumnType::boolean ? (cell.flag ? "1" : "0") : cell.cat;
                auto& cs = by_label[label];
                cs.label = label;
                cs.support += 1;
                cs.positives += m.outcome[r] ? 1 : 0;
            }
            for (auto& [label, cs] : by_label) {
                (void)label;
                cats.push_back(cs);
            }
        } else {
            // quartile bins so numerics pass through the same screen
            std::vector<double> present;
            for (int r = 0; r < n; ++r)
                if (!m.cells[c][r].missing) present.push_back(m.cells[c][r].num);
            if (present.empty()) continue;
            const double q1 = lower_quantile(present, 0.25);
            const double q2 = lower_quantile(present, 0.50);
            const double q3 = lower_quantile(present, 0.75);
            cats.assign(4, {});
            cats[0].label = "Q1";
            cats[1].label = "Q2";
            cats[2].label = "Q3";
            cats[3].label = "Q4";
            for (int r = 0; r < n; ++r) {
                const Cell& cell = m.cells[c][r];
                if (cell.missing) continue;
                const int bin = cell.num <= q1 ? 0 : cell.num <= q2 ? 1 : cell.num <= q3 ? 2 : 3;
                cats[bin].support += 1;
                cats[bin].positives += m.outcome[r] ? 1 : 0;
            }
        }
        screen_categories(col.name, cats, min_support, t.purity, out);
    }
    return out;
}

std::vector<AuditFinding> correlation_screen(const FeatureMatrix& m, const AuditThresholds& t) {
    std::vector<AuditFinding> out;
    const int n = m.n_rows();
    if (n == 0) return out;

    for (int c = 0; c < m.n_cols(); ++c) {
        const auto& col = m.columns[c];
        if (col.dtype == ColumnType::categorical) continue; // purity screen's territory
        std::vector<double> x;
        std::vector<std::uint8_t> y;
        for (int r = 0; r < n; ++r) {
            const Cell& cell = m.cells[c][r];
            if (cell.missing) continue;
            x.push_back(col.dtype == ColumnType::boolean ? (cell.flag ? 1.0 : 0.0) : cell.num);
            y.push_back(m.outcome[r]);
        }
        if (x.size() < 2) continue;

        // point-biserial r
        double r_val = 0.0;
        {
            const double mx = mean_of(x);
            double my = 0.0;
            for (auto v : y) my += v;
            my /= static_cast<double>(y.size());
            double sxy = 0.0, sxx = 0.0, syy = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double dx = x[i] - mx;
                const double dy = static_cast<double>(y[i]) - my;
                sxy += dx * dy;
                sxx += dx * dx;
                syy += dy * dy;
            }
            r_val = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
        }

        // the column read directly as a score, oriented to the stronger side
        double auc_val = 0.5;
        if (const auto auc = rank_auc(x, y)) auc_val = std::max(*auc, 1.0 - *auc);

        const bool r_hit = std::fabs(r_val) >= t.r_threshold;
        const bool auc_hit = auc_val >= t.auc_threshold;
        if (!r_hit && !auc_hit) continue;
        AuditFinding f;
        f.column = col.name;
        f.screen = Screen::correlation;
        f.severity = (r_hit && auc_hit) ? Severity::fatal : Severity::warning;
        f.point_biserial = r_val;
        f.auc = auc_val;
        out.push_back(std::move(f));
    }
    return out;
}

AuditReport run_audit(const FeatureMatrix& m, const AuditThresholds& t) {
    AuditReport report;
    auto absorb = [&report](std::vector<AuditFinding> findings) {
        for (auto& f : findings) {
            report.counts_per_screen[f.screen] += 1;
            if (f.severity == Severity::fatal) report.pass = false;
            report.findings.push_back(std::move(f));
        }
    };
    absorb(temporal_screen(m.columns, t.vot));
    absorb(purity_screen(m, t));
    absorb(correlation_screen(m, t));
    return report;
}

FeatureMatrix strip_and_rebuild(const FeatureMatrix& m, const AuditReport& report) {
    std::set<std::string> fatal;
    for (const auto& name : report.fatal_columns()) fatal.insert(name);
    std::vector<int> keep;
    for (int c = 0; c < m.n_cols(); ++c)
        if (!fatal.count(m.columns[c].name)) keep.push_back(c);
    if (keep.empty()) throw DataError("strip_and_rebuild: removing fatal columns empties the matrix");
    return m.select_columns(keep);
}

std::string audit_report_json(const AuditReport& report) {
    json doc;
    doc["verdict"] = report.pass ? "pass" : "fail";
    json counts = json::object();
    for (const auto& [screen, count] : report.counts_per_screen)
        counts[screen_name(screen)] = count;
    doc["counts_per_screen"] = std::move(counts);
    doc["fatal_columns"] = report.fatal_columns();
    json findings = json::array();
    for (const auto& f : report.findings) {
        json jf;
        jf["column"] = f.column;
        jf["screen"] = screen_name(f.screen);
        jf["severity"] = severity_name(f.severity);
        switch (f.screen) {
        case Screen::temporal:
            jf["availability_term"] = f.availability_term;
            jf["vot"] = f.vot;
            break;
        case Screen::purity:
            jf["category"] = f.category;
            jf["support"] = f.support;
            jf["conditional_dropout_rate"] = f.conditional_rate;
            break;
        case Screen::correlation:
            jf["point_biserial"] = f.point_biserial;
            jf["rank_auc"] = f.auc;
            break;
        }
        findings.push_back(std::move(jf));
    }
    doc["findings"] = std::move(findings);
    return doc.dump(2);
}

std::string audit_report_table(const AuditReport& report) {
    std::ostringstream out;
    out << "leakage audit: " << (report.pass ? "PASS" : "FAIL") << "\n";
    out << "column                         screen       severity  evidence\n";
    out << "-----------------------------  -----------  --------  ----------------------------\n";
    for (const auto& f : report.findings) {
        char line[256];
        std::string evidence;
        switch (f.screen) {
        case Screen::temporal:
            evidence = "available at term " + std::to_string(f.availability_term) + " > vot " +
                       std::to_string(f.vot);
            break;
        case Screen::purity: {
            char buf[96];
            std::snprintf(buf, sizeof buf, "category %s: support %d, dropout rate %.3f",
                          f.category.c_str(), f.support, f.conditional_rate);
            evidence = buf;
            break;
        }
        case Screen::correlation: {
            char buf[96];
            std::snprintf(buf, sizeof buf, "r=%.3f, auc=%.3f", f.point_biserial, f.auc);
            evidence = buf;
            break;
        }
        }
        std::snprintf(line, sizeof line, "%-29s  %-11s  %-8s  %s\n", f.column.c_str(),
                      screen_name(f.screen), severity_name(f.severity), evidence.c_str());
        out << line;
    }
    if (report.findings.empty()) out << "(no findings)\n";
    return out.str();
}

} // namespace edm
