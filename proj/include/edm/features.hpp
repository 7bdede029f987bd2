#pragma once

#include "edm/curriculum_graph.hpp"
#include "edm/dataset.hpp"
#include "edm/net_features.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace edm {

enum class Block { N1, N2, N3, N4, GRAPH, NET };
const char* block_name(Block b);
Block parse_block(const std::string& s);

enum class ColumnType { numeric, categorical, boolean };
const char* column_type_name(ColumnType t);
ColumnType parse_column_type(const std::string& s);

struct FeatureColumn {
    std::string name;
    Block block = Block::N1;
    ColumnType dtype = ColumnType::numeric;
    int availability_term = 0;
};

// one cell; exactly one payload is meaningful per the column dtype
struct Cell {
    bool missing = true;
    double num = 0.0;
    std::string cat;
    bool flag = false;
};

Cell numeric_cell(double v);
Cell categorical_cell(std::string v);
Cell boolean_cell(bool v);

struct FeatureMatrix {
    std::vector<FeatureColumn> columns;
    std::vector<std::string> row_ids; // student ids
    std::vector<int> cohort;          // aligned to rows
    std::vector<std::uint8_t> outcome;
    std::vector<std::vector<Cell>> cells; // column-major: cells[col][row]

    int n_rows() const { return static_cast<int>(row_ids.size()); }
    int n_cols() const { return static_cast<int>(columns.size()); }
    int column_index(const std::string& name) const; // -1 when absent
    FeatureMatrix select_columns(const std::vector<int>& keep) const;
};

// aborts assembly when gate-enabled columns lie past the VOT
struct VotGateError : DataError {
    explicit VotGateError(std::vector<std::string> columns, int vot);
    std::vector<std::string> offending;
};

// N3 block values for one student, events with term <= vot only
struct N3Features {
    int n_attempted = 0;
    int n_passed = 0;
    double pass_ratio = 1.0;
    bool nothing_attempted = true;
    bool early_gpa_missing = true;
    double early_gpa = 0.0;
    int n_bottleneck_failures = 0;
    bool no_bottleneck_attempted = true;
    double foundational_pass_ratio = 1.0;
    bool no_foundational_attempted = true;
    int credits_earned = 0;
};

N3Features build_n3_features(const Dataset& ds, const StudentSnapshot& snap,
                             const std::set<std::string>& bottlenecks);

struct AssembleOptions {
    int vot = 3;
    bool include_graph = false;
    bool include_net = false;
    bool enforce_vot_gate = true;
    std::set<std::string> exclude_columns; // audit-stripped names
    std::uint64_t net_seed = 0;
};

// Assembles the tagged matrix for the given students (all students when the
// row filter is empty). GRAPH features use the supplied bottleneck set so a
// fold can pass one derived from training cohorts only; NET blocks may be
// supplied from a cache keyed by cohort year.
FeatureMatrix assemble(const Dataset& ds, const CurriculumGraph& graph,
                       const std::set<std::string>& bottlenecks, const AssembleOptions& opt,
                       const std::vector<std::string>& row_students = {},
                       const std::map<int, CohortNetBlock>* net_cache = nullptr);

// CSV + sidecar column-spec JSON, the exported-artifact formats
void export_matrix(const FeatureMatrix& m, const std::string& csv_path,
                   const std::string& columns_json_path);
FeatureMatrix import_matrix(const std::string& csv_path, const std::string& columns_json_path);

} // namespace edm
