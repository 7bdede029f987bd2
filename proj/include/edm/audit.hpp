#pragma once

#include "edm/features.hpp"

#include <map>
#include <string>
#include <vector>

namespace edm {

enum class Screen { temporal, purity, correlation };
enum class Severity { warning, fatal };

const char* screen_name(Screen s);
const char* severity_name(Severity s);

struct AuditFinding {
    std::string column;
    Screen screen = Screen::temporal;
    Severity severity = Severity::warning;
    // temporal evidence
    int availability_term = -1;
    int vot = -1;
    // purity evidence
    std::string category;
    int support = 0;
    double conditional_rate = 0.0;
    // correlation evidence
    double point_biserial = 0.0;
    double auc = 0.0;
};

struct AuditThresholds {
    double purity = 0.995;        // conditional rate at or beyond purity / 1-purity is fatal
    int min_support = 30;         // absolute floor; effective floor is max(this, 2% of rows)
    double min_support_frac = 0.02;
    double r_threshold = 0.95;    // |point-biserial| warning level
    double auc_threshold = 0.995; // single-column rank-AUC warning level
    int vot = 3;
};

struct AuditReport {
    std::vector<AuditFinding> findings;
    bool pass = true; // fail iff at least one fatal finding
    std::map<Screen, int> counts_per_screen;

    std::vector<std::string> fatal_columns() const; // distinct, sorted
};

std::vector<AuditFinding> temporal_screen(const std::vector<FeatureColumn>& columns, int vot);
std::vector<AuditFinding> purity_screen(const FeatureMatrix& m, const AuditThresholds& t);
std::vector<AuditFinding> correlation_screen(const FeatureMatrix& m, const AuditThresholds& t);

AuditReport run_audit(const FeatureMatrix& m, const AuditThresholds& t);

// removes every fatal column; the result re-audits clean by construction.
// throws DataError when stripping would empty the matrix.
FeatureMatrix strip_and_rebuild(const FeatureMatrix& m, const AuditReport& report);

std::string audit_report_json(const AuditReport& report);
std::string audit_report_table(const AuditReport& report); // human-readable

} // namespace edm
