#include "edm/synthetic.hpp"

#include "edm/curriculum_graph.hpp"
#include "edm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace edm {

void SyntheticConfig::validate() const {
    if (n_cohorts < 1) throw SchemaError("SyntheticConfig: n_cohorts must be >= 1");
    if (students_per_cohort_mean < 1) throw SchemaError("SyntheticConfig: students_per_cohort_mean must be >= 1");
    if (students_per_cohort_spread < 0 || students_per_cohort_spread >= students_per_cohort_mean)
        throw SchemaError("SyntheticConfig: spread must be in [0, mean)");
    if (vot < 1) throw SchemaError("SyntheticConfig: vot must be >= 1");
    if (sim_terms < vot) throw SchemaError("SyntheticConfig: sim_terms must be >= vot");
    if (horizon <= vot) throw SchemaError("SyntheticConfig: horizon must exceed vot");
    if (leak_purity < 0.0 || leak_purity > 1.0)
        throw SchemaError("SyntheticConfig: leak_purity must be in [0,1]");
    if (graduation_fraction < 0.0 || graduation_fraction > 1.0)
        throw SchemaError("SyntheticConfig: graduation_fraction must be in [0,1]");
    if (pass_grade < 0.0 || pass_grade > 10.0)
        throw SchemaError("SyntheticConfig: pass_grade must be on the 0-10 scale");
}

namespace {

CourseSpec course(const char* id, int credits, int term, bool backbone, bool foundational,
                  std::initializer_list<const char*> prereqs) {
    CourseSpec c;
    c.course_id = id;
    c.credits = credits;
    c.recommended_term = term;
    c.backbone = backbone;
    c.foundational = foundational;
    for (const char* p : prereqs) c.prerequisites.emplace_back(p);
    std::sort(c.prerequisites.begin(), c.prerequisites.end());
    return c;
}

} // namespace

// Five-year engineering plan: dense early maths/physics chains, structural
// core in the middle years, project work at the end.
CurriculumSpec template_curriculum() {
    CurriculumSpec spec;
    auto add = [&spec](CourseSpec c) { spec.courses.push_back(std::move(c)); };

    add(course("MAT101", 6, 1, true, true, {}));
    add(course("FIS101", 6, 1, true, true, {}));
    add(course("QUI101", 4, 1, false, false, {}));
    add(course("ING101", 4, 1, false, false, {}));
    add(course("DIB101", 3, 1, false, false, {}));

    add(course("MAT102", 6, 2, true, true, {"MAT101"}));
    add(course("FIS102", 6, 2, true, true, {"FIS101", "MAT101"}));
    add(course("EST101", 4, 2, false, false, {"FIS101"}));
    add(course("QUI102", 3, 2, false, false, {"QUI101"}));
    add(course("COM101", 3, 2, false, false, {}));

    add(course("MAT201", 6, 3, true, true, {"MAT102"}));
    add(course("FIS201", 5, 3, false, true, {"FIS102", "MAT102"}));
    add(course("MEC201", 5, 3, true, false, {"EST101", "MAT102"}));
    add(course("GEO201", 4, 3, false, false, {"QUI101"}));
    add(course("IDI101", 2, 3, false, false, {}));

    add(course("MAT202", 5, 4, false, false, {"MAT201"}));
    add(course("EST201", 6, 4, true, false, {"MEC201", "MAT201"}));
    add(course("HID201", 5, 4, false, false, {"FIS201", "MAT201"}));
    add(course("MAT203", 4, 4, false, false, {"MAT201", "COM101"}));
    add(course("TOP201", 4, 4, false, false, {"GEO201", "DIB101"}));

    add(course("EST301", 6, 5, true, false, {"EST201"}));
    add(course("GEO301", 5, 5, true, false, {"GEO201", "MEC201"}));
    add(course("HID301", 5, 5, false, false, {"HID201"}));
    add(course("CON301", 4, 5, false, false, {"QUI102", "EST201"}));
    add(course("ECO301", 3, 5, false, false, {}));

    add(course("EST302", 5, 6, false, false, {"EST301"}));
    add(course("HOR301", 6, 6, true, false, {"EST301", "CON301"}));
    add(course("GEO302", 5, 6, false, false, {"GEO301", "EST301"}));
    add(course("VIA301", 5, 6, false, false, {"TOP201", "GEO301"}));
    add(course("INS301", 3, 6, false, false, {"HID301"}));

    add(course("EST401", 5, 7, false, false, {"EST302", "HOR301"}));
    add(course("HID401", 5, 7, false, false, {"HID301"}));
    add(course("SAN401", 5, 7, false, false, {"HID301", "INS301"}));
    add(course("ORG401", 4, 7, false, false, {"ECO301", "CON301"}));
    add(course("AMB401", 4, 7, false, false, {"GEO201"}));

    add(course("PUE401", 5, 8, false, false, {"EST401", "GEO302"}));
    add(course("VIA402", 4, 8, false, false, {"VIA301"}));
    add(course("SAN402", 4, 8, false, false, {"SAN401"}));
    add(course("LEG401", 3, 8, false, false, {}));
    add(course("GES401", 4, 8, false, false, {"ORG401"}));

    add(course("PRO501", 6, 9, true, false, {"PUE401", "HOR301", "GEO302"}));
    add(course("OBR501", 5, 9, false, false, {"GES401", "VIA402"}));
    add(course("ELE501", 4, 9, false, false, {}));
    add(course("ELE502", 4, 9, false, false, {}));

    add(course("TES501", 8, 10, true, false, {"PRO501", "OBR501"}));
    add(course("PRA501", 4, 10, false, false, {"OBR501"}));
    add(course("ELE503", 4, 10, false, false, {}));
    add(course("ELE504", 3, 10, false, false, {}));

    return spec;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct SimStudent {
    std::string id;
    int cohort_year = 0;
    int cohort_index = 0;
    int track = 0;
    double ability = 0.0;
    std::map<std::string, AttrValue> attributes;
    std::vector<EnrollmentEvent> events;
    // window stats feeding the hazard
    int blocked_credits_at_vot = 0;
    int bottleneck_failures = 0;
    int total_failures = 0;
    bool dropout = false;
    HorizonStatus status = HorizonStatus::enrolled;
};

AttrValue num_attr(double v) {
    AttrValue a;
    a.missing = false;
    a.number = v;
    return a;
}

AttrValue cat_attr(std::string v) {
    AttrValue a;
    a.missing = false;
    a.category = std::move(v);
    return a;
}

AttrValue missing_attr() { return {}; }

} // namespace

Dataset generate_synthetic(const SyntheticConfig& config) {
    config.validate();

    Dataset ds;
    ds.curriculum = template_curriculum();
    const CurriculumGraph graph = build_graph(ds.curriculum);
    const int n_courses = graph.n();

    // per-course difficulty in logit units; high in-degree courses are harder
    std::vector<double> difficulty(n_courses);
    {
        Rng jitter(Rng::derive(config.seed, 3));
        for (int v = 0; v < n_courses; ++v) {
            difficulty[v] = config.difficulty_base +
                            config.difficulty_indegree * std::min(graph.in_degree[v], 3) +
                            config.difficulty_jitter * jitter.normal();
        }
    }
    // generation-side bottleneck notion: two or more prerequisites
    std::vector<bool> heavy(n_courses, false);
    for (int v = 0; v < n_courses; ++v) heavy[v] = graph.in_degree[v] >= 2;

    // attribute schema
    ds.attribute_specs["age_at_entry"] = {AttrType::numeric, AttrLevel::N1, 0};
    ds.attribute_specs["birth_date"] = {AttrType::date, AttrLevel::N1, 0};
    ds.attribute_specs["gender"] = {AttrType::categorical, AttrLevel::N1, 0};
    ds.attribute_specs["ses_index"] = {AttrType::numeric, AttrLevel::N1, 0};
    ds.attribute_specs["financial_aid"] = {AttrType::categorical, AttrLevel::N1, 0};
    ds.attribute_specs["school_type"] = {AttrType::categorical, AttrLevel::N2, 0};
    ds.attribute_specs["admission_score"] = {AttrType::numeric, AttrLevel::N2, 0};
    ds.attribute_specs["hs_gpa"] = {AttrType::numeric, AttrLevel::N2, 0};
    ds.attribute_specs["parent_education"] = {AttrType::categorical, AttrLevel::N2, 0};
    ds.attribute_specs["macro_shock"] = {AttrType::numeric, AttrLevel::N4, 0};
    ds.attribute_specs["strike_terms"] = {AttrType::numeric, AttrLevel::N4, 0};
    if (config.plant_leak_vars) {
        ds.attribute_specs["still_enrolled_after_vot"] =
            {AttrType::categorical, AttrLevel::N2, config.horizon};
        ds.attribute_specs["graduated_flag"] =
            {AttrType::categorical, AttrLevel::N2, config.horizon};
    }

    // cohort-level draws
    Rng cohort_rng(Rng::derive(config.seed, 1));
    std::vector<int> cohort_sizes(config.n_cohorts);
    std::vector<int> cohort_shock(config.n_cohorts), cohort_strikes(config.n_cohorts);
    for (int c = 0; c < config.n_cohorts; ++c) {
        cohort_sizes[c] = static_cast<int>(
            cohort_rng.uniform_int(config.students_per_cohort_mean - config.students_per_cohort_spread,
                                   config.students_per_cohort_mean + config.students_per_cohort_spread));
        cohort_shock[c] = cohort_rng.bernoulli(0.2) ? 1 : 0;
        cohort_strikes[c] = static_cast<int>(cohort_rng.uniform_int(0, 2));
    }

    std::vector<SimStudent> sims;
    int global_index = 0;
    for (int c = 0; c < config.n_cohorts; ++c) {
        const int year = config.first_cohort_year + c;
        const int size = cohort_sizes[c];
        const int n_tracks = std::clamp(static_cast<int>(std::lround(size / 32.0)), 2, 4);
        for (int i = 0; i < size; ++i, ++global_index) {
            Rng rng(Rng::derive(config.seed, 1000 + static_cast<std::uint64_t>(global_index)));
            SimStudent s;
            char idbuf[32];
            std::snprintf(idbuf, sizeof idbuf, "S%04d-%03d", year, i + 1);
            s.id = idbuf;
            s.cohort_year = year;
            s.cohort_index = c;
            s.track = static_cast<int>(rng.uniform_int(0, n_tracks - 1));

            // demographics
            const double age_u = rng.uniform01();
            const int age = age_u < 0.62 ? 18 : age_u < 0.80 ? 19 : age_u < 0.90 ? 20
                            : 21 + static_cast<int>(rng.uniform_int(0, 6));
            const double g_u = rng.uniform01();
            const std::string gender = g_u < 0.31 ? "F" : g_u < 0.98 ? "M" : "X";
            const double ses = std::clamp(52.0 + 17.0 * (0.35 * rng.normal() + 0.94 * rng.normal()),
                                          5.0, 98.0);
            const double st_u = rng.uniform01();
            const std::string school = st_u < 0.55 ? "public" : st_u < 0.85 ? "private" : "technical";
            s.ability = 0.9 * rng.normal() + 0.004 * (ses - 50.0) +
                        (school == "technical" ? 0.12 : 0.0) + (school == "private" ? 0.06 : 0.0) -
                        0.02 * (age - 18);

            const double admission =
                std::clamp(54.0 + 13.0 * (0.65 * s.ability + 0.76 * rng.normal()), 0.0, 100.0);
            const double hs_gpa = std::clamp(6.4 + 1.1 * (0.6 * s.ability + 0.8 * rng.normal()), 4.0, 10.0);
            const double aid_u = rng.uniform01();
            const std::string aid = ses < 35.0 ? (aid_u < 0.6 ? "full" : "partial")
                                  : ses < 65.0 ? (aid_u < 0.35 ? "partial" : "none")
                                               : (aid_u < 0.08 ? "partial" : "none");
            const double pe_u = rng.uniform01() * 40.0 + ses;
            const std::string parent_ed = pe_u < 45.0 ? "primary" : pe_u < 75.0 ? "secondary"
                                        : pe_u < 105.0 ? "tertiary" : "postgraduate";

            s.attributes["age_at_entry"] = num_attr(age);
            s.attributes["birth_date"] = num_attr(static_cast<double>(
                days_from_civil(year - age, 3, 1) + static_cast<long>(rng.uniform_int(0, 330))));
            s.attributes["gender"] = cat_attr(gender);
            s.attributes["ses_index"] = rng.uniform01() < 0.04 ? missing_attr() : num_attr(std::round(ses * 10.0) / 10.0);
            s.attributes["financial_aid"] = cat_attr(aid);
            s.attributes["school_type"] = cat_attr(school);
            s.attributes["admission_score"] =
                rng.uniform01() < 0.03 ? missing_attr() : num_attr(std::round(admission * 10.0) / 10.0);
            s.attributes["hs_gpa"] = num_attr(std::round(hs_gpa * 10.0) / 10.0);
            s.attributes["parent_education"] = rng.uniform01() < 0.02 ? missing_attr() : cat_attr(parent_ed);
            s.attributes["macro_shock"] = num_attr(cohort_shock[c]);
            s.attributes["strike_terms"] = num_attr(cohort_strikes[c]);

            // term-by-term progression, gated by prerequisites
            std::vector<bool> passed(n_courses, false);
            std::vector<int> attempts(n_courses, 0);
            for (int term = 1; term <= config.sim_terms; ++term) {
                std::vector<int> todo;
                for (int v : graph.topo_order) {
                    if (passed[v]) continue;
                    const CourseSpec& cs = ds.curriculum.courses[v];
                    if (cs.recommended_term > term) continue;
                    bool ready = true;
                    for (int p : graph.prereqs_of[v])
                        if (!passed[p]) { ready = false; break; }
                    if (ready) todo.push_back(v);
                }
                std::stable_sort(todo.begin(), todo.end(), [&](int a, int b) {
                    return ds.curriculum.courses[a].recommended_term <
                           ds.curriculum.courses[b].recommended_term;
                });
                if (static_cast<int>(todo.size()) > config.max_courses_per_term)
                    todo.resize(config.max_courses_per_term);

                for (int v : todo) {
                    attempts[v] += 1;
                    const int section = attempts[v] == 1
                                            ? s.track % n_tracks
                                            : (s.track + attempts[v]) % n_tracks;
                    // the class event carries the attempt's course-level
                    // outcome, so "passed" always means the course was passed
                    EnrollmentEvent cls;
                    cls.student_id = s.id;
                    cls.course_id = graph.course_ids[v];
                    cls.section_id = "S" + std::to_string(section + 1);
                    cls.term = term;
                    cls.kind = EventKind::class_section;

                    const double abandon_u = rng.uniform01();
                    if (abandon_u < 0.05) {
                        cls.result = EventResult::absent; // left the section early
                        s.events.push_back(cls);
                        continue;
                    }
                    const double lose_reg =
                        std::clamp(0.10 - 0.03 * s.ability, 0.02, 0.25);
                    if (rng.uniform01() < lose_reg) {
                        cls.result = EventResult::failed; // lost regularity, no exam
                        s.events.push_back(cls);
                        continue;
                    }

                    EnrollmentEvent exam;
                    exam.student_id = s.id;
                    exam.course_id = graph.course_ids[v];
                    exam.section_id = "E" + std::to_string(1 + section % 2);
                    exam.term = term;
                    exam.kind = EventKind::exam_sitting;
                    if (rng.uniform01() < 0.07) {
                        exam.result = EventResult::absent; // skipped the final
                        cls.result = EventResult::failed;
                        s.events.push_back(cls);
                        s.events.push_back(exam);
                        continue;
                    }
                    const double p_pass = sigmoid(config.pass_slope * s.ability - difficulty[v]);
                    if (rng.uniform01() < p_pass) {
                        exam.result = EventResult::passed;
                        exam.grade = std::clamp<double>(
                            std::lround(6.2 + 1.2 * s.ability + 0.9 * rng.normal()),
                            config.pass_grade, 10.0);
                        cls.result = EventResult::passed;
                        passed[v] = true;
                    } else {
                        exam.result = EventResult::failed;
                        exam.grade = std::clamp<double>(std::lround(2.2 + 0.8 * rng.normal()), 0.0,
                                                        config.pass_grade - 1.0);
                        cls.result = EventResult::failed;
                    }
                    s.events.push_back(cls);
                    s.events.push_back(exam);
                }

                if (term == config.vot) {
                    // window stats for the hazard
                    for (const auto& e : s.events) {
                        if (e.result != EventResult::failed) continue;
                        s.total_failures += 1;
                        if (heavy[graph.index.at(e.course_id)]) s.bottleneck_failures += 1;
                    }
                    for (int v = 0; v < n_courses; ++v) {
                        if (passed[v]) continue;
                        for (int p : graph.prereqs_of[v])
                            if (!passed[p]) {
                                s.blocked_credits_at_vot += graph.credits[v];
                                break;
                            }
                    }
                }
            }

            const double hazard = config.hazard_intercept +
                                  config.hazard_blocked_credits * s.blocked_credits_at_vot +
                                  config.hazard_bottleneck_failures * s.bottleneck_failures +
                                  config.hazard_total_failures * s.total_failures +
                                  config.hazard_noise * rng.normal();
            s.dropout = rng.bernoulli(sigmoid(hazard));
            if (s.dropout) {
                s.status = HorizonStatus::dropped_out;
                const int last_term = config.vot + static_cast<int>(rng.uniform_int(0, 2));
                std::erase_if(s.events, [&](const EnrollmentEvent& e) { return e.term > last_term; });
            }
            sims.push_back(std::move(s));
        }
    }

    // graduations: the strongest non-dropouts have finished by the horizon
    const int n_total = static_cast<int>(sims.size());
    std::vector<int> non_drop;
    for (int i = 0; i < n_total; ++i)
        if (!sims[i].dropout) non_drop.push_back(i);
    std::sort(non_drop.begin(), non_drop.end(), [&](int a, int b) {
        if (sims[a].ability != sims[b].ability) return sims[a].ability > sims[b].ability;
        return sims[a].id < sims[b].id;
    });
    const int n_grad = std::min<int>(static_cast<int>(non_drop.size()),
                                     static_cast<int>(std::floor(config.graduation_fraction * n_total)));
    for (int k = 0; k < n_grad; ++k) sims[non_drop[k]].status = HorizonStatus::graduated;

    if (config.plant_leak_vars) {
        // still_enrolled_after_vot starts as the negation of dropout; the
        // corrupted entries are drawn from the graduates so agreement with
        // the negation stays >= leak_purity while the flag pair still
        // separates the outcome exactly.
        const int flips = std::min<int>(
            n_grad, static_cast<int>(std::floor((1.0 - config.leak_purity) * n_total)));
        std::vector<bool> flipped(n_total, false);
        for (int k = 0; k < flips; ++k) flipped[non_drop[k]] = true;
        for (int i = 0; i < n_total; ++i) {
            const bool still = !sims[i].dropout && !flipped[i];
            sims[i].attributes["still_enrolled_after_vot"] = cat_attr(still ? "1" : "0");
            sims[i].attributes["graduated_flag"] =
                cat_attr(sims[i].status == HorizonStatus::graduated ? "1" : "0");
        }
    }

    for (auto& s : sims) {
        StudentRecord rec;
        rec.student_id = s.id;
        rec.cohort_year = s.cohort_year;
        rec.attributes = std::move(s.attributes);
        ds.students.push_back(std::move(rec));
        for (auto& e : s.events) ds.events.push_back(std::move(e));
        OutcomeRecord oc;
        oc.student_id = s.id;
        oc.dropout = s.dropout;
        oc.status_at_horizon = s.status;
        ds.outcomes.emplace(oc.student_id, oc);
    }

    validate_dataset(ds);
    return ds;
}

} // namespace edm
