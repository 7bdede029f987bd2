#pragma once

#include "edm/dataset.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace edm {

struct CycleError : DataError {
    explicit CycleError(std::vector<std::string> nodes);
    std::vector<std::string> cycle;
};

// Prerequisite DAG. Edges run prerequisite -> dependent course. Immutable
// after build_graph; safe to share across threads.
struct CurriculumGraph {
    std::vector<std::string> course_ids; // node index -> id
    std::map<std::string, int> index;    // id -> node index
    std::vector<int> credits;
    std::vector<bool> backbone_flag;
    std::vector<bool> foundational_flag;
    std::vector<std::vector<int>> prereqs_of; // incoming edges
    std::vector<std::vector<int>> unlocks;    // outgoing edges
    std::vector<int> topo_order;
    std::vector<int> in_degree;
    std::vector<int> out_degree;
    std::vector<int> terminals;           // out-degree 0, ascending
    std::vector<int> backbone_set;        // flagged courses, or degree fallback
    std::vector<int> longest_chain_to;    // longest prerequisite chain ending at node, in edges

    int node(const std::string& id) const; // throws DanglingReferenceError
    int n() const { return static_cast<int>(course_ids.size()); }
};

CurriculumGraph build_graph(const CurriculumSpec& spec);

// distinct students with at least one event per course (optionally restricted
// to a student subset, which is how per-fold bottleneck sets stay clean)
std::map<std::string, int> enrolment_counts(const Dataset& ds,
                                            const std::set<std::string>* students = nullptr);

// courses at or above the q-quantile of both in-degree and enrolment count
std::set<std::string> identify_bottlenecks(const CurriculumGraph& g,
                                           const std::map<std::string, int>& enrolment,
                                           double q);
std::set<std::string> identify_bottlenecks(const CurriculumGraph& g, const Dataset& ds, double q);

struct StudentSnapshot {
    std::string student_id;
    std::set<std::string> passed;
    std::set<std::string> attempted;
    std::map<std::string, int> failure_counts; // failed events per course
    int credits_earned = 0;
};

// events with term <= vot only
StudentSnapshot snapshot_at_vot(const Dataset& ds, const std::string& student_id, int vot);

struct GraphFeatures {
    int blocked_credits = 0;
    double backbone_completion_rate = 1.0;
    double bottleneck_approval_ratio = 1.0;
    bool no_bottleneck_attempted = true;
    int distance_to_graduation = 0;
    double prereq_satisfaction_index = 1.0;
};

GraphFeatures compute_graph_features(const CurriculumGraph& g, const StudentSnapshot& snap,
                                     const std::set<std::string>& bottlenecks);

std::string graph_stats_json(const CurriculumGraph& g, const std::set<std::string>& bottlenecks);

} // namespace edm
