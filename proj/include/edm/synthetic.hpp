#pragma once

#include "edm/dataset.hpp"

#include <cstdint>
#include <string>

namespace edm {

// Knobs for the synthetic cohort generator. The seed fully determines the
// output; every stochastic choice happens on streams derived from it.
struct SyntheticConfig {
    int n_cohorts = 15;
    int students_per_cohort_mean = 90;
    int students_per_cohort_spread = 12; // uniform on mean +/- spread
    int first_cohort_year = 2008;
    std::uint64_t seed = 42;

    int vot = 3;          // observation boundary, in terms
    int horizon = 12;     // follow-up horizon, in terms (open knob; outcome flags carry it)
    int sim_terms = 6;    // terms actually simulated; >= vot so censoring is exercised
    double pass_grade = 4.0; // 0-10 scale

    // ability / pass-rate coefficients
    double pass_slope = 1.25;        // weight of ability in the pass logit
    double difficulty_base = -0.65;  // baseline course difficulty (logit units)
    double difficulty_indegree = 0.38; // extra difficulty per prerequisite (capped at 3)
    double difficulty_jitter = 0.18; // per-course seeded jitter
    int max_courses_per_term = 6;

    // dropout hazard: logit = intercept + weights . (blocked credits,
    // bottleneck failures, total failures, noise) measured inside the window
    double hazard_intercept = -22.0;
    double hazard_blocked_credits = 0.125;
    double hazard_bottleneck_failures = 0.55;
    double hazard_total_failures = 0.22;
    double hazard_noise = 0.55;

    // fraction of the population that has graduated by the horizon
    double graduation_fraction = 0.25;

    bool plant_leak_vars = false;
    double leak_purity = 0.95;

    void validate() const; // throws SchemaError on out-of-range values
};

// Deterministic synthetic dataset: template curriculum, ability-driven
// term-by-term progression gated by prerequisites, dropout from structural
// friction, and (optionally) two planted post-horizon leak attributes.
Dataset generate_synthetic(const SyntheticConfig& config);

// the fixed template curriculum used by the generator
CurriculumSpec template_curriculum();

} // namespace edm
