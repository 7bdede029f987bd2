#include "edm/dataset.hpp"

#include "edm/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace edm {

// ---------------------------------------------------------------------------
// enum names
// ---------------------------------------------------------------------------

const char* attr_type_name(AttrType t) {
    switch (t) {
    case AttrType::numeric: return "numeric";
    case AttrType::categorical: return "categorical";
    case AttrType::date: return "date";
    }
    return "?";
}

const char* attr_level_name(AttrLevel l) {
    switch (l) {
    case AttrLevel::N1: return "N1";
    case AttrLevel::N2: return "N2";
    case AttrLevel::N4: return "N4";
    }
    return "?";
}

AttrType parse_attr_type(const std::string& s) {
    if (s == "numeric") return AttrType::numeric;
    if (s == "categorical") return AttrType::categorical;
    if (s == "date") return AttrType::date;
    throw SchemaError("unknown attribute type '" + s + "' (expected numeric|categorical|date)");
}

AttrLevel parse_attr_level(const std::string& s) {
    if (s == "N1") return AttrLevel::N1;
    if (s == "N2") return AttrLevel::N2;
    if (s == "N4") return AttrLevel::N4;
    throw SchemaError("unknown attribute level '" + s + "' (expected N1|N2|N4)");
}

const char* event_kind_name(EventKind k) {
    return k == EventKind::class_section ? "class_section" : "exam_sitting";
}

const char* event_result_name(EventResult r) {
    switch (r) {
    case EventResult::passed: return "passed";
    case EventResult::failed: return "failed";
    case EventResult::absent: return "absent";
    }
    return "?";
}

const char* horizon_status_name(HorizonStatus s) {
    switch (s) {
    case HorizonStatus::graduated: return "graduated";
    case HorizonStatus::dropped_out: return "dropped_out";
    case HorizonStatus::enrolled: return "enrolled";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// dates (Howard Hinnant's civil algorithms)
// ---------------------------------------------------------------------------

long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y += m <= 2;
}

std::string iso_from_days(long z) {
    int y, m, d;
    civil_from_days(z, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

long days_from_iso(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31)
        throw SchemaError("bad date '" + iso + "' (expected YYYY-MM-DD)");
    return days_from_civil(y, m, d);
}

// ---------------------------------------------------------------------------
// lookups
// ---------------------------------------------------------------------------

const CourseSpec* CurriculumSpec::find(const std::string& course_id) const {
    for (const auto& c : courses)
        if (c.course_id == course_id) return &c;
    return nullptr;
}

const StudentRecord* Dataset::find_student(const std::string& id) const {
    for (const auto& s : students)
        if (s.student_id == id) return &s;
    return nullptr;
}

std::vector<int> Dataset::cohort_years() const {
    std::set<int> years;
    for (const auto& s : students) years.insert(s.cohort_year);
    return {years.begin(), years.end()};
}

std::vector<const StudentRecord*> Dataset::cohort_members(int year) const {
    std::vector<const StudentRecord*> out;
    for (const auto& s : students)
        if (s.cohort_year == year) out.push_back(&s);
    return out;
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

namespace {

double parse_number(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw SchemaError(where + ": not a number: '" + s + "'");
    }
}

int parse_int(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw SchemaError(where + ": not an integer: '" + s + "'");
    }
}

std::string row_ctx(const std::string& file, std::size_t data_row) {
    // +2: header line plus 1-based numbering
    return file + " row " + std::to_string(data_row + 2);
}

} // namespace

void validate_dataset(const Dataset& ds) {
    std::set<std::string> course_ids;
    for (const auto& c : ds.curriculum.courses) {
        if (!course_ids.insert(c.course_id).second)
            throw DuplicateKeyError("duplicate course_id '" + c.course_id + "' in curriculum");
        if (c.credits < 1)
            throw SchemaError("course '" + c.course_id + "': credits must be >= 1");
        if (c.recommended_term < 1)
            throw SchemaError("course '" + c.course_id + "': recommended_term must be >= 1");
        for (const auto& p : c.prerequisites) {
            if (p == c.course_id)
                throw SchemaError("course '" + c.course_id + "' lists itself as prerequisite");
            if (!ds.curriculum.find(p))
                throw DanglingReferenceError("course '" + c.course_id + "' requires unknown course '" +
                                             p + "' (curriculum)");
        }
    }

    std::set<std::string> student_ids;
    for (const auto& s : ds.students) {
        if (!student_ids.insert(s.student_id).second)
            throw DuplicateKeyError("duplicate student_id '" + s.student_id + "' in students file");
        for (const auto& [name, value] : s.attributes) {
            (void)value;
            if (!ds.attribute_specs.count(name))
                throw DanglingReferenceError("student '" + s.student_id + "' carries attribute '" +
                                             name + "' missing from attributes.json");
        }
    }

    std::set<std::tuple<std::string, std::string, std::string, int, EventKind>> event_keys;
    for (const auto& e : ds.events) {
        if (!student_ids.count(e.student_id))
            throw DanglingReferenceError("unknown student '" + e.student_id + "' in enrollments file");
        if (!course_ids.count(e.course_id))
            throw DanglingReferenceError("unknown course '" + e.course_id + "' in enrollments file");
        if (e.term < 1) throw SchemaError("enrollment for '" + e.student_id + "': term must be >= 1");
        if (!event_keys.insert({e.student_id, e.course_id, e.section_id, e.term, e.kind}).second)
            throw DuplicateKeyError("duplicate enrollment event (" + e.student_id + "," + e.course_id +
                                    "," + e.section_id + "," + std::to_string(e.term) + "," +
                                    event_kind_name(e.kind) + ")");
        if (e.grade && (*e.grade < 0.0 || *e.grade > 10.0))
            throw SchemaError("enrollment for '" + e.student_id + "': grade outside the 0-10 scale");
        if (e.kind == EventKind::exam_sitting && e.result == EventResult::passed && !e.grade)
            throw SchemaError("passed exam_sitting for '" + e.student_id + "' on '" + e.course_id +
                              "' must carry a grade");
    }

    for (const auto& [id, oc] : ds.outcomes) {
        if (!student_ids.count(id))
            throw DanglingReferenceError("unknown student '" + id + "' in outcomes file");
        if (oc.dropout != (oc.status_at_horizon == HorizonStatus::dropped_out))
            throw SchemaError("outcome for '" + id + "': dropout flag must equal (status == dropped_out)");
    }
    for (const auto& s : ds.students)
        if (!ds.outcomes.count(s.student_id))
            throw DanglingReferenceError("student '" + s.student_id + "' has no outcome row");
}

// ---------------------------------------------------------------------------
// load
// ---------------------------------------------------------------------------

DatasetPaths DatasetPaths::in_dir(const std::string& dir) {
    DatasetPaths p;
    p.curriculum = dir + "/curriculum.json";
    p.students = dir + "/students.csv";
    p.attributes = dir + "/attributes.json";
    p.enrollments = dir + "/enrollments.csv";
    p.outcomes = dir + "/outcomes.csv";
    return p;
}

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

CurriculumSpec load_curriculum(const std::string& path) {
    const json doc = load_json_file(path);
    if (!doc.is_object() || !doc.contains("courses") || !doc["courses"].is_array())
        throw SchemaError(path + ": expected an object with a 'courses' array");
    CurriculumSpec spec;
    for (const auto& jc : doc["courses"]) {
        CourseSpec c;
        if (!jc.contains("id") || !jc["id"].is_string())
            throw SchemaError(path + ": course entry missing string field 'id'");
        c.course_id = jc["id"].get<std::string>();
        const std::string ctx = path + " course '" + c.course_id + "'";
        if (!jc.contains("credits") || !jc["credits"].is_number_integer())
            throw SchemaError(ctx + ": missing integer field 'credits'");
        c.credits = jc["credits"].get<int>();
        if (!jc.contains("recommended_term") || !jc["recommended_term"].is_number_integer())
            throw SchemaError(ctx + ": missing integer field 'recommended_term'");
        c.recommended_term = jc["recommended_term"].get<int>();
        c.backbone = jc.value("backbone", false);
        c.foundational = jc.value("foundational", false);
        if (jc.contains("prereqs")) {
            if (!jc["prereqs"].is_array()) throw SchemaError(ctx + ": 'prereqs' must be an array");
            for (const auto& p : jc["prereqs"]) c.prerequisites.push_back(p.get<std::string>());
        }
        std::sort(c.prerequisites.begin(), c.prerequisites.end());
        c.prerequisites.erase(std::unique(c.prerequisites.begin(), c.prerequisites.end()),
                              c.prerequisites.end());
        spec.courses.push_back(std::move(c));
    }
    return spec;
}

std::map<std::string, AttributeSpec> load_attribute_specs(const std::string& path) {
    const json doc = load_json_file(path);
    if (!doc.is_object()) throw SchemaError(path + ": expected an object keyed by attribute name");
    std::map<std::string, AttributeSpec> specs;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const json& js = it.value();
        const std::string ctx = path + " attribute '" + it.key() + "'";
        if (!js.is_object() || !js.contains("level") || !js.contains("type") ||
            !js.contains("availability_term"))
            throw SchemaError(ctx + ": needs 'level', 'type' and 'availability_term'");
        AttributeSpec spec;
        spec.level = parse_attr_level(js["level"].get<std::string>());
        spec.type = parse_attr_type(js["type"].get<std::string>());
        spec.availability_term = js["availability_term"].get<int>();
        specs.emplace(it.key(), spec);
    }
    return specs;
}

} // namespace

Dataset load_dataset(const DatasetPaths& paths) {
    Dataset ds;
    ds.curriculum = load_curriculum(paths.curriculum);
    ds.attribute_specs = load_attribute_specs(paths.attributes);

    // students.csv: student_id,cohort_year,<one column per attribute>
    {
        const csv::Table t = csv::read_file(paths.students);
        const int id_col = t.require("student_id");
        const int year_col = t.require("cohort_year");
        std::vector<std::pair<int, std::string>> attr_cols;
        for (std::size_t i = 0; i < t.header.size(); ++i) {
            if (static_cast<int>(i) == id_col || static_cast<int>(i) == year_col) continue;
            if (!ds.attribute_specs.count(t.header[i]))
                throw DanglingReferenceError(paths.students + ": column '" + t.header[i] +
                                             "' missing from attributes.json");
            attr_cols.emplace_back(static_cast<int>(i), t.header[i]);
        }
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& row = t.rows[r];
            StudentRecord s;
            s.student_id = row[id_col];
            if (s.student_id.empty())
                throw SchemaError(row_ctx(paths.students, r) + ": field 'student_id' is empty");
            s.cohort_year = parse_int(row[year_col], row_ctx(paths.students, r) + " field 'cohort_year'");
            for (const auto& [col, name] : attr_cols) {
                const std::string& raw = row[col];
                AttrValue v;
                if (raw.empty()) {
                    v.missing = true;
                } else {
                    v.missing = false;
                    const AttributeSpec& spec = ds.attribute_specs.at(name);
                    switch (spec.type) {
                    case AttrType::numeric:
                        v.number = parse_number(raw, row_ctx(paths.students, r) + " field '" + name + "'");
                        break;
                    case AttrType::date:
                        v.number = static_cast<double>(days_from_iso(raw));
                        break;
                    case AttrType::categorical:
                        v.category = raw;
                        break;
                    }
                }
                s.attributes.emplace(name, std::move(v));
            }
            ds.students.push_back(std::move(s));
        }
    }

    // enrollments.csv
    {
        const csv::Table t = csv::read_file(paths.enrollments);
        const int c_student = t.require("student_id");
        const int c_course = t.require("course_id");
        const int c_section = t.require("section_id");
        const int c_term = t.require("term");
        const int c_kind = t.require("kind");
        const int c_result = t.require("result");
        const int c_grade = t.require("grade");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& row = t.rows[r];
            const std::string ctx = row_ctx(paths.enrollments, r);
            EnrollmentEvent e;
            e.student_id = row[c_student];
            e.course_id = row[c_course];
            e.section_id = row[c_section];
            e.term = parse_int(row[c_term], ctx + " field 'term'");
            if (row[c_kind] == "class_section") e.kind = EventKind::class_section;
            else if (row[c_kind] == "exam_sitting") e.kind = EventKind::exam_sitting;
            else throw SchemaError(ctx + " field 'kind': unknown value '" + row[c_kind] + "'");
            if (row[c_result] == "passed") e.result = EventResult::passed;
            else if (row[c_result] == "failed") e.result = EventResult::failed;
            else if (row[c_result] == "absent") e.result = EventResult::absent;
            else throw SchemaError(ctx + " field 'result': unknown value '" + row[c_result] + "'");
            if (!row[c_grade].empty())
                e.grade = parse_number(row[c_grade], ctx + " field 'grade'");
            ds.events.push_back(std::move(e));
        }
    }

    // outcomes.csv
    {
        const csv::Table t = csv::read_file(paths.outcomes);
        const int c_student = t.require("student_id");
        const int c_dropout = t.require("dropout");
        const int c_status = t.require("status_at_horizon");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& row = t.rows[r];
            const std::string ctx = row_ctx(paths.outcomes, r);
            OutcomeRecord oc;
            oc.student_id = row[c_student];
            const int flag = parse_int(row[c_dropout], ctx + " field 'dropout'");
            if (flag != 0 && flag != 1) throw SchemaError(ctx + " field 'dropout': expected 0 or 1");
            oc.dropout = flag == 1;
            if (row[c_status] == "graduated") oc.status_at_horizon = HorizonStatus::graduated;
            else if (row[c_status] == "dropped_out") oc.status_at_horizon = HorizonStatus::dropped_out;
            else if (row[c_status] == "enrolled") oc.status_at_horizon = HorizonStatus::enrolled;
            else throw SchemaError(ctx + " field 'status_at_horizon': unknown value '" + row[c_status] + "'");
            if (ds.outcomes.count(oc.student_id))
                throw DuplicateKeyError("duplicate student_id '" + oc.student_id + "' in outcomes file");
            ds.outcomes.emplace(oc.student_id, oc);
        }
    }

    validate_dataset(ds);
    return ds;
}

// ---------------------------------------------------------------------------
// write
// ---------------------------------------------------------------------------

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

} // namespace

void write_dataset(const Dataset& ds, const DatasetPaths& paths) {
    {
        json courses = json::array();
        for (const auto& c : ds.curriculum.courses) {
            json jc;
            jc["id"] = c.course_id;
            jc["credits"] = c.credits;
            jc["recommended_term"] = c.recommended_term;
            jc["backbone"] = c.backbone;
            jc["foundational"] = c.foundational;
            jc["prereqs"] = c.prerequisites;
            courses.push_back(std::move(jc));
        }
        json doc;
        doc["courses"] = std::move(courses);
        auto out = open_out(paths.curriculum);
        out << doc.dump(2) << '\n';
    }
    {
        json doc = json::object();
        for (const auto& [name, spec] : ds.attribute_specs) {
            doc[name] = {{"level", attr_level_name(spec.level)},
                         {"type", attr_type_name(spec.type)},
                         {"availability_term", spec.availability_term}};
        }
        auto out = open_out(paths.attributes);
        out << doc.dump(2) << '\n';
    }
    {
        auto out = open_out(paths.students);
        std::vector<std::string> header{"student_id", "cohort_year"};
        for (const auto& [name, spec] : ds.attribute_specs) {
            (void)spec;
            header.push_back(name);
        }
        csv::write_row(out, header);
        for (const auto& s : ds.students) {
            std::vector<std::string> row{s.student_id, std::to_string(s.cohort_year)};
            for (const auto& [name, spec] : ds.attribute_specs) {
                const auto it = s.attributes.find(name);
                if (it == s.attributes.end() || it->second.missing) {
                    row.emplace_back();
                    continue;
                }
                switch (spec.type) {
                case AttrType::numeric:
                    row.push_back(csv::format_number(it->second.number));
                    break;
                case AttrType::date:
                    row.push_back(iso_from_days(static_cast<long>(it->second.number)));
                    break;
                case AttrType::categorical:
                    row.push_back(it->second.category);
                    break;
                }
            }
            csv::write_row(out, row);
        }
    }
    {
        auto out = open_out(paths.enrollments);
        csv::write_row(out, {"student_id", "course_id", "section_id", "term", "kind", "result", "grade"});
        for (const auto& e : ds.events) {
            csv::write_row(out, {e.student_id, e.course_id, e.section_id, std::to_string(e.term),
                                 event_kind_name(e.kind), event_result_name(e.result),
                                 e.grade ? csv::format_number(*e.grade) : std::string{}});
        }
    }
    {
        auto out = open_out(paths.outcomes);
        csv::write_row(out, {"student_id", "dropout", "status_at_horizon"});
        for (const auto& s : ds.students) {
            const auto& oc = ds.outcomes.at(s.student_id);
            csv::write_row(out, {oc.student_id, oc.dropout ? "1" : "0",
                                 horizon_status_name(oc.status_at_horizon)});
        }
    }
}

// ---------------------------------------------------------------------------
// summary
// ---------------------------------------------------------------------------

DatasetSummary dataset_summary(const Dataset& ds) {
    DatasetSummary s;
    s.n_students = static_cast<int>(ds.students.size());
    s.n_courses = static_cast<int>(ds.curriculum.courses.size());
    s.n_events = static_cast<int>(ds.events.size());
    std::map<int, CohortSummary> by_year;
    for (const auto& st : ds.students) {
        auto& c = by_year[st.cohort_year];
        c.year = st.cohort_year;
        c.students += 1;
        if (ds.outcomes.at(st.student_id).dropout) c.dropouts += 1;
    }
    int total_drop = 0;
    for (auto& [year, c] : by_year) {
        (void)year;
        c.dropout_rate = c.students ? static_cast<double>(c.dropouts) / c.students : 0.0;
        total_drop += c.dropouts;
        s.cohorts.push_back(c);
    }
    for (const auto& e : ds.events) s.events_per_term[e.term] += 1;
    s.overall_dropout_rate =
        s.n_students ? static_cast<double>(total_drop) / s.n_students : 0.0;
    return s;
}

std::string summary_to_json(const DatasetSummary& s) {
    json doc;
    doc["students"] = s.n_students;
    doc["courses"] = s.n_courses;
    doc["events"] = s.n_events;
    doc["overall_dropout_rate"] = s.overall_dropout_rate;
    json cohorts = json::array();
    for (const auto& c : s.cohorts)
        cohorts.push_back({{"year", c.year},
                           {"students", c.students},
                           {"dropouts", c.dropouts},
                           {"dropout_rate", c.dropout_rate}});
    doc["cohorts"] = std::move(cohorts);
    json per_term = json::object();
    for (const auto& [term, n] : s.events_per_term) per_term[std::to_string(term)] = n;
    doc["events_per_term"] = std::move(per_term);
    return doc.dump(2);
}

} // namespace edm
