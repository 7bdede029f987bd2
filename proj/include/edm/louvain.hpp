#pragma once

#include "edm/cooccurrence.hpp"

#include <cstdint>
#include <vector>

namespace edm {

struct Partition {
    std::vector<int> community; // node -> community id, ids 0..k-1
    std::vector<int> sizes;     // per community id
    double modularity = 0.0;    // Q of this partition on the source graph

    int n_communities() const { return static_cast<int>(sizes.size()); }
};

// Newman-Girvan modularity of an assignment on g; 0 when g has no edges.
double modularity(const CooccurrenceGraph& g, const std::vector<int>& assignment);

// Louvain with a pinned deterministic schedule: nodes are scanned in
// ascending id order, a node moves only on strictly positive gain, gain ties
// break to the smallest community id, and phases of local moves followed by
// aggregation repeat until no move happens. The seed parameter is accepted
// for interface stability; with the pinned schedule it does not influence
// the result.
Partition louvain(const CooccurrenceGraph& g, std::uint64_t seed = 0);

} // namespace edm
