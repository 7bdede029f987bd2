#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace edm {

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// malformed field or row; message names the field and the row number
struct SchemaError : DataError {
    using DataError::DataError;
};

// id referenced but never defined; message names the id and the file
struct DanglingReferenceError : DataError {
    using DataError::DataError;
};

struct DuplicateKeyError : DataError {
    using DataError::DataError;
};

// ---------------------------------------------------------------------------
// domain types
// ---------------------------------------------------------------------------

enum class AttrType { numeric, categorical, date };
enum class AttrLevel { N1, N2, N4 };

const char* attr_type_name(AttrType t);
const char* attr_level_name(AttrLevel l);
AttrType parse_attr_type(const std::string& s);
AttrLevel parse_attr_level(const std::string& s);

struct AttributeSpec {
    AttrType type = AttrType::numeric;
    AttrLevel level = AttrLevel::N1;
    int availability_term = 0; // term index at which the value becomes known, 0 = entry
};

// One typed attribute value. Dates are held as days since 1970-01-01 so they
// stay ordered and numeric downstream; the writer restores ISO form.
struct AttrValue {
    bool missing = true;
    double number = 0.0;
    std::string category;
};

struct CourseSpec {
    std::string course_id;
    int credits = 1;
    int recommended_term = 1;
    bool backbone = false;
    bool foundational = false;
    std::vector<std::string> prerequisites; // sorted, unique
};

struct CurriculumSpec {
    std::vector<CourseSpec> courses;
    const CourseSpec* find(const std::string& course_id) const;
};

struct StudentRecord {
    std::string student_id;
    int cohort_year = 0;
    std::map<std::string, AttrValue> attributes;
};

enum class EventKind { class_section, exam_sitting };
enum class EventResult { passed, failed, absent };

const char* event_kind_name(EventKind k);
const char* event_result_name(EventResult r);

struct EnrollmentEvent {
    std::string student_id;
    std::string course_id;
    std::string section_id;
    int term = 1;
    EventKind kind = EventKind::class_section;
    EventResult result = EventResult::absent;
    std::optional<double> grade; // 0-10 scale
};

enum class HorizonStatus { graduated, dropped_out, enrolled };

const char* horizon_status_name(HorizonStatus s);

struct OutcomeRecord {
    std::string student_id;
    bool dropout = false;
    HorizonStatus status_at_horizon = HorizonStatus::enrolled;
};

struct Dataset {
    CurriculumSpec curriculum;
    std::map<std::string, AttributeSpec> attribute_specs;
    std::vector<StudentRecord> students; // file order
    std::vector<EnrollmentEvent> events; // file order
    std::map<std::string, OutcomeRecord> outcomes;

    const StudentRecord* find_student(const std::string& id) const;
    std::vector<int> cohort_years() const; // sorted unique
    std::vector<const StudentRecord*> cohort_members(int year) const;
};

// ---------------------------------------------------------------------------
// file I/O (formats pinned by the on-disk contract)
// ---------------------------------------------------------------------------

struct DatasetPaths {
    std::string curriculum;  // curriculum.json
    std::string students;    // students.csv
    std::string attributes;  // attributes.json sidecar
    std::string enrollments; // enrollments.csv
    std::string outcomes;    // outcomes.csv

    static DatasetPaths in_dir(const std::string& dir);
};

Dataset load_dataset(const DatasetPaths& paths);
void write_dataset(const Dataset& ds, const DatasetPaths& paths);

// cross-file validation; load_dataset calls this, the generator relies on it too
void validate_dataset(const Dataset& ds);

// ---------------------------------------------------------------------------
// summary
// ---------------------------------------------------------------------------

struct CohortSummary {
    int year = 0;
    int students = 0;
    int dropouts = 0;
    double dropout_rate = 0.0;
};

struct DatasetSummary {
    int n_students = 0;
    int n_courses = 0;
    int n_events = 0;
    std::vector<CohortSummary> cohorts;
    std::map<int, int> events_per_term;
    double overall_dropout_rate = 0.0;
};

DatasetSummary dataset_summary(const Dataset& ds);
std::string summary_to_json(const DatasetSummary& s);

// date helpers (proleptic Gregorian, no time zone)
long days_from_civil(int y, int m, int d);
void civil_from_days(long z, int& y, int& m, int& d);
std::string iso_from_days(long z);
long days_from_iso(const std::string& iso); // throws SchemaError on bad form

} // namespace edm
