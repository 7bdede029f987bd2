#include "edm/features.hpp"

#include "edm/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace edm {

const char* block_name(Block b) {
    switch (b) {
    case Block::N1: return "N1";
    case Block::N2: return "N2";
    case Block::N3: return "N3";
    case Block::N4: return "N4";
    case Block::GRAPH: return "GRAPH";
    case Block::NET: return "NET";
    }
    return "?";
}

Block parse_block(const std::string& s) {
    if (s == "N1") return Block::N1;
    if (s == "N2") return Block::N2;
    if (s == "N3") return Block::N3;
    if (s == "N4") return Block::N4;
    if (s == "GRAPH") return Block::GRAPH;
    if (s == "NET") return Block::NET;
    throw SchemaError("unknown block '" + s + "'");
}

const char* column_type_name(ColumnType t) {
    switch (t) {
    case ColumnType::numeric: return "numeric";
    case ColumnType::categorical: return "categorical";
    case ColumnType::boolean: return "boolean";
    }
    return "?";
}

ColumnType parse_column_type(const std::string& s) {
    if (s == "numeric") return ColumnType::numeric;
    if (s == "categorical") return ColumnType::categorical;
    if (s == "boolean") return ColumnType::boolean;
    throw SchemaError("unknown column dtype '" + s + "'");
}

Cell numeric_cell(double v) {
    Cell c;
    c.missing = false;
    c.num = v;
    return c;
}

Cell categorical_cell(std::string v) {
    Cell c;
    c.missing = false;
    c.cat = std::move(v);
    return c;
}

Cell boolean_cell(bool v) {
    Cell c;
    c.missing = false;
    c.flag = v;
    return c;
}

int FeatureMatrix::column_index(const std::string& name) const {
    for (int i = 0; i < n_cols(); ++i)
        if (columns[i].name == name) return i;
    return -1;
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<int>& keep) const {
    FeatureMatrix out;
    out.row_ids = row_ids;
    out.cohort = cohort;
    out.outcome = outcome;
    for (int c : keep) {
        out.columns.push_back(columns[c]);
        out.cells.push_back(cells[c]);
    }
    return out;
}

VotGateError::VotGateError(std::vector<std::string> columns, int vot)
    : DataError([&columns, vot] {
          std::ostringstream msg;
          msg << "VOT gate: " << columns.size() << " column(s) become available after term " << vot
              << ": [";
          for (std::size_t i = 0; i < columns.size(); ++i) msg << (i ? ", " : "") << columns[i];
          msg << "]";
          return msg.str();
      }()),
      offending(std::move(columns)) {}

N3Features build_n3_features(const Dataset& ds, const StudentSnapshot& snap,
                             const std::set<std::string>& bottlenecks) {
    N3Features f;
    f.n_attempted = static_cast<int>(snap.attempted.size());
    f.n_passed = static_cast<int>(snap.passed.size());
    f.nothing_attempted = f.n_attempted == 0;
    f.pass_ratio = f.nothing_attempted ? 1.0 : static_cast<double>(f.n_passed) / f.n_attempted;
    f.credits_earned = snap.credits_earned;

    for (const auto& [course, fails] : snap.failure_counts)
        if (bottlenecks.count(course)) f.n_bottleneck_failures += fails;
    for (const auto& course : snap.attempted)
        if (bottlenecks.count(course)) {
            f.no_bottleneck_attempted = false;
            break;
        }

    int found_att = 0, found_pass = 0;
    for (const auto& course : snap.attempted) {
        const CourseSpec* c = ds.curriculum.find(course);
        if (c && c->foundational) {
            ++found_att;
            if (snap.passed.count(course)) ++found_pass;
        }
    }
    f.no_foundational_attempted = found_att == 0;
    f.foundational_pass_ratio =
        found_att == 0 ? 1.0 : static_cast<double>(found_pass) / found_att;
    return f;
}

namespace {

// mean exam grade over graded exam events inside the window
std::pair<bool, double> early_gpa_of(const Dataset& ds, const std::string& student_id, int vot) {
    double sum = 0.0;
    int n = 0;
    for (const auto& e : ds.events) {
        if (e.student_id != student_id || e.term > vot) continue;
        if (e.kind != EventKind::exam_sitting || !e.grade) continue;
        sum += *e.grade;
        ++n;
    }
    if (n == 0) return {false, 0.0};
    return {true, sum / n};
}

} // namespace

FeatureMatrix assemble(const Dataset& ds, const CurriculumGraph& graph,
                       const std::set<std::string>& bottlenecks, const AssembleOptions& opt,
                       const std::vector<std::string>& row_students,
                       const std::map<int, CohortNetBlock>* net_cache) {
    FeatureMatrix m;

    std::vector<const StudentRecord*> rows;
    if (row_students.empty()) {
        for (const auto& s : ds.students) rows.push_back(&s);
    } else {
        for (const auto& id : row_students) {
            const StudentRecord* s = ds.find_student(id);
            if (!s) throw DanglingReferenceError("unknown student '" + id + "' in assemble");
            rows.push_back(s);
        }
    }
    for (const auto* s : rows) {
        m.row_ids.push_back(s->student_id);
        m.cohort.push_back(s->cohort_year);
        m.outcome.push_back(ds.outcomes.at(s->student_id).dropout ? 1 : 0);
    }
    const int n = static_cast<int>(rows.size());

    auto excluded = [&opt](const std::string& name) { return opt.exclude_columns.count(name) > 0; };

    std::vector<std::string> gate_violations;
    auto add_attr_columns = [&](AttrLevel level, Block block) {
        for (const auto& [name, spec] : ds.attribute_specs) {
            if (spec.level != level || excluded(name)) continue;
            FeatureColumn col;
            col.name = name;
            col.block = block;
            col.dtype = spec.type == AttrType::categorical ? ColumnType::categorical
                                                           : ColumnType::numeric;
            col.availability_term = spec.availability_term;
            std::vector<Cell> values;
            values.reserve(n);
            for (const auto* s : rows) {
                const auto it = s->attributes.find(name);
                if (it == s->attributes.end() || it->second.missing) {
                    values.emplace_back();
                } else if (spec.type == AttrType::categorical) {
                    values.push_back(categorical_cell(it->second.category));
                } else {
                    values.push_back(numeric_cell(it->second.number));
                }
            }
            m.columns.push_back(std::move(col));
            m.cells.push_back(std::move(values));
        }
    };

    add_attr_columns(AttrLevel::N1, Block::N1);
    add_attr_columns(AttrLevel::N2, Block::N2);

    // N3: window performance and friction
    {
        std::vector<StudentSnapshot> snaps;
        snaps.reserve(n);
        for (const auto* s : rows) snaps.push_back(snapshot_at_vot(ds, s->student_id, opt.vot));

        std::vector<N3Features> n3;
        n3.reserve(n);
        for (int i = 0; i < n; ++i) n3.push_back(build_n3_features(ds, snaps[i], bottlenecks));

        auto add_n3 = [&](const std::string& name, ColumnType dtype, auto getter) {
            if (excluded(name)) return;
            m.columns.push_back({name, Block::N3, dtype, opt.vot});
            std::vector<Cell> values;
            values.reserve(n);
            for (int i = 0; i < n; ++i) values.push_back(getter(i));
            m.cells.push_back(std::move(values));
        };

        add_n3("n_attempted", ColumnType::numeric,
               [&](int i) { return numeric_cell(n3[i].n_attempted); });
        add_n3("n_passed", ColumnType::numeric,
               [&](int i) { return numeric_cell(n3[i].n_passed); });
        add_n3("pass_ratio", ColumnType::numeric,
               [&](int i) { return numeric_cell(n3[i].pass_ratio); });
        add_n3("nothing_attempted", ColumnType::boolean,
               [&](int i) { return boolean_cell(n3[i].nothing_attempted); });
        add_n3("early_gpa", ColumnType::numeric, [&](int i) {
            const auto [present, gpa] = early_gpa_of(ds, rows[i]->student_id, opt.vot);
            return present ? numeric_cell(gpa) : Cell{};
        });
        add_n3("n_bottleneck_failures", ColumnType::numeric,
               [&](int i) { return numeric_cell(n3[i].n_bottleneck_failures); });
        add_n3("no_bottleneck_attempted", ColumnType::boolean,
               [&](int i) { return boolean_cell(n3[i].no_bottleneck_attempted); });
        add_n3("foundational_pass_ratio", ColumnType::numeric,
               [&](int i) { return numeric_cell(n3[i].foundational_pass_ratio); });
        add_n3("no_foundational_attempted", ColumnType::boolean,
               [&](int i) { return boolean_cell(n3[i].no_foundational_attempted); });
        add_n3("credits_earned", ColumnType::numeric,
               [&](int i) { return numeric_cell(n3[i].credits_earned); });

        if (opt.include_graph) {
            std::vector<GraphFeatures> gf;
            gf.reserve(n);
            for (int i = 0; i < n; ++i)
                gf.push_back(compute_graph_features(graph, snaps[i], bottlenecks));
            auto add_graph = [&](const std::string& name, auto getter) {
                if (excluded(name)) return;
                m.columns.push_back({name, Block::GRAPH, ColumnType::numeric, opt.vot});
                std::vector<Cell> values;
                values.reserve(n);
                for (int i = 0; i < n; ++i) values.push_back(numeric_cell(getter(i)));
                m.cells.push_back(std::move(values));
            };
            add_graph("blocked_credits", [&](int i) { return gf[i].blocked_credits; });
            add_graph("backbone_completion_rate",
                      [&](int i) { return gf[i].backbone_completion_rate; });
            add_graph("bottleneck_approval_ratio",
                      [&](int i) { return gf[i].bottleneck_approval_ratio; });
            add_graph("distance_to_graduation",
                      [&](int i) { return gf[i].distance_to_graduation; });
            add_graph("prereq_satisfaction_index",
                      [&](int i) { return gf[i].prereq_satisfaction_index; });
        }
    }

    // N4: cohort fixed effect + cohort-level attributes
    if (!excluded("cohort_year")) {
        m.columns.push_back({"cohort_year", Block::N4, ColumnType::categorical, 0});
        std::vector<Cell> values;
        values.reserve(n);
        for (const auto* s : rows) values.push_back(categorical_cell(std::to_string(s->cohort_year)));
        m.cells.push_back(std::move(values));
    }
    add_attr_columns(AttrLevel::N4, Block::N4);

    if (opt.include_net) {
        std::map<int, CohortNetBlock> local;
        auto block_for = [&](int year) -> const CohortNetBlock& {
            if (net_cache) {
                const auto it = net_cache->find(year);
                if (it != net_cache->end()) return it->second;
            }
            const auto it = local.find(year);
            if (it != local.end()) return it->second;
            return local.emplace(year, compute_net_block(ds, year, opt.vot, opt.net_seed))
                .first->second;
        };
        auto add_net = [&](const std::string& name, ColumnType dtype, auto getter) {
            if (excluded(name)) return;
            m.columns.push_back({name, Block::NET, dtype, opt.vot});
            std::vector<Cell> values;
            values.reserve(n);
            for (int i = 0; i < n; ++i) {
                const CohortNetBlock& blk = block_for(rows[i]->cohort_year);
                const int k = blk.index_of(rows[i]->student_id);
                if (k < 0)
                    throw DanglingReferenceError("student '" + rows[i]->student_id +
                                                 "' missing from cohort net block");
                values.push_back(getter(blk, k));
            }
            m.cells.push_back(std::move(values));
        };
        add_net("net_community_size", ColumnType::numeric,
                [](const CohortNetBlock& b, int k) { return numeric_cell(b.z_community_size[k]); });
        add_net("net_belonging", ColumnType::numeric,
                [](const CohortNetBlock& b, int k) { return numeric_cell(b.z_belonging[k]); });
        add_net("net_stability", ColumnType::numeric,
                [](const CohortNetBlock& b, int k) { return numeric_cell(b.z_stability[k]); });
        add_net("net_weighted_degree", ColumnType::numeric,
                [](const CohortNetBlock& b, int k) { return numeric_cell(b.z_weighted_degree[k]); });
        add_net("net_solitary", ColumnType::boolean,
                [](const CohortNetBlock& b, int k) { return boolean_cell(b.raw[k].solitary_flag); });
    }

    if (opt.enforce_vot_gate) {
        for (const auto& col : m.columns)
            if (col.availability_term > opt.vot) gate_violations.push_back(col.name);
        if (!gate_violations.empty()) {
            std::sort(gate_violations.begin(), gate_violations.end());
            throw VotGateError(std::move(gate_violations), opt.vot);
        }
    }

    return m;
}

void export_matrix(const FeatureMatrix& m, const std::string& csv_path,
                   const std::string& columns_json_path) {
    {
        std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + csv_path);
        std::vector<std::string> header{"student_id", "cohort", "outcome"};
        for (const auto& col : m.columns) header.push_back(col.name);
        csv::write_row(out, header);
        for (int r = 0; r < m.n_rows(); ++r) {
            std::vector<std::string> row{m.row_ids[r], std::to_string(m.cohort[r]),
                                         m.outcome[r] ? "1" : "0"};
            for (int c = 0; c < m.n_cols(); ++c) {
                const Cell& cell = m.cells[c][r];
                if (cell.missing) {
                    row.emplace_back();
                    continue;
                }
                switch (m.columns[c].dtype) {
                case ColumnType::numeric: row.push_back(csv::format_number(cell.num)); break;
                case ColumnType::categorical: row.push_back(cell.cat); break;
                case ColumnType::boolean: row.push_back(cell.flag ? "1" : "0"); break;
                }
            }
            csv::write_row(out, row);
        }
    }
    {
        json cols = json::array();
        for (const auto& col : m.columns)
            cols.push_back({{"name", col.name},
                            {"block", block_name(col.block)},
                            {"dtype", column_type_name(col.dtype)},
                            {"availability_term", col.availability_term}});
        std::ofstream out(columns_json_path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + columns_json_path);
        out << cols.dump(2) << '\n';
    }
}

FeatureMatrix import_matrix(const std::string& csv_path, const std::string& columns_json_path) {
    FeatureMatrix m;
    {
        std::ifstream in(columns_json_path, std::ios::binary);
        if (!in) throw DataError("cannot open " + columns_json_path);
        json cols;
        try {
            cols = json::parse(in);
        } catch (const json::parse_error& e) {
            throw SchemaError(columns_json_path + ": " + e.what());
        }
        for (const auto& jc : cols) {
            FeatureColumn col;
            col.name = jc.at("name").get<std::string>();
            col.block = parse_block(jc.at("block").get<std::string>());
            col.dtype = parse_column_type(jc.at("dtype").get<std::string>());
            col.availability_term = jc.at("availability_term").get<int>();
            m.columns.push_back(std::move(col));
        }
    }
    const csv::Table t = csv::read_file(csv_path);
    const int c_id = t.require("student_id");
    const int c_cohort = t.require("cohort");
    const int c_outcome = t.require("outcome");
    std::vector<int> col_of;
    for (const auto& col : m.columns) col_of.push_back(t.require(col.name));
    m.cells.assign(m.n_cols(), {});
    for (const auto& row : t.rows) {
        m.row_ids.push_back(row[c_id]);
        m.cohort.push_back(std::stoi(row[c_cohort]));
        m.outcome.push_back(row[c_outcome] == "1" ? 1 : 0);
        for (int c = 0; c < m.n_cols(); ++c) {
            const std::string& raw = row[col_of[c]];
            if (raw.empty()) {
                m.cells[c].emplace_back();
                continue;
            }
            switch (m.columns[c].dtype) {
            case ColumnType::numeric: m.cells[c].push_back(numeric_cell(std::stod(raw))); break;
            case ColumnType::categorical: m.cells[c].push_back(categorical_cell(raw)); break;
            case ColumnType::boolean: m.cells[c].push_back(boolean_cell(raw == "1")); break;
            }
        }
    }
    return m;
}

} // namespace edm
