#pragma once

#include "edm/dataset.hpp"

#include <map>
#include <string>
#include <vector>

namespace edm {

// Student-student projection of shared (course, section, term, kind) events
// for one cohort. Undirected, integer weights, no self-loops. Every cohort
// member is a node even when isolated.
struct CooccurrenceGraph {
    int cohort_year = 0;
    int term = 0; // 0 = pooled window, otherwise a single term
    std::vector<std::string> nodes; // sorted student ids
    std::map<std::string, int> node_index;
    std::vector<std::map<int, double>> adj; // symmetric

    int n() const { return static_cast<int>(nodes.size()); }
    double weighted_degree(int v) const;
    double total_weight() const; // each undirected edge counted once
    double edge_weight(int a, int b) const;
};

// term == 0 pools every event with term <= vot; term == t keeps that term only
CooccurrenceGraph build_cooccurrence(const Dataset& ds, int cohort_year, int vot, int term = 0);

// one graph per term 1..vot
std::vector<CooccurrenceGraph> build_per_term(const Dataset& ds, int cohort_year, int vot);

} // namespace edm
