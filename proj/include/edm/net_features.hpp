#pragma once

#include "edm/cooccurrence.hpp"
#include "edm/louvain.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace edm {

struct NetFeatures {
    int community_size = 1;
    double belonging_score = 0.0;
    double community_stability = 0.0;
    bool solitary_flag = false;
    double weighted_degree = 0.0;
};

// Per-student synchrony metrics. Belonging and community size come from the
// pooled-window graph and partition; stability compares the student's
// community member-sets (student excluded) across consecutive per-term
// partitions with Jaccard similarity, where two empty sets score 0.
NetFeatures net_features(const CooccurrenceGraph& pooled, const Partition& pooled_partition,
                         const std::vector<CooccurrenceGraph>& term_graphs,
                         const std::vector<Partition>& term_partitions,
                         const std::string& student_id, double low_degree_threshold);

// z = (x - cohort mean) / cohort population std; zero-variance columns map to 0
std::vector<double> standardize_within_cohort(const std::vector<double>& values);

// Everything the NET block needs for one cohort, standardized and ready to
// splice into the feature matrix. Students appear in pooled-graph node order.
struct CohortNetBlock {
    int cohort_year = 0;
    std::vector<std::string> students;
    std::vector<NetFeatures> raw;
    std::vector<double> z_community_size;
    std::vector<double> z_belonging;
    std::vector<double> z_stability;
    std::vector<double> z_weighted_degree;
    Partition pooled_partition;

    int index_of(const std::string& student_id) const; // -1 when absent
};

CohortNetBlock compute_net_block(const Dataset& ds, int cohort_year, int vot, std::uint64_t seed);

std::string net_stats_json(const Dataset& ds, int vot, std::uint64_t seed);

} // namespace edm
