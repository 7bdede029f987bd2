#include "edm/cooccurrence.hpp"

#include <algorithm>
#include <tuple>

namespace edm {

double CooccurrenceGraph::weighted_degree(int v) const {
    double d = 0.0;
    for (const auto& [u, w] : adj[v]) {
        (void)u;
        d += w;
    }
    return d;
}

double CooccurrenceGraph::total_weight() const {
    double total = 0.0;
    for (int v = 0; v < n(); ++v)
        for (const auto& [u, w] : adj[v])
            if (u > v) total += w;
    return total;
}

double CooccurrenceGraph::edge_weight(int a, int b) const {
    const auto it = adj[a].find(b);
    return it == adj[a].end() ? 0.0 : it->second;
}

CooccurrenceGraph build_cooccurrence(const Dataset& ds, int cohort_year, int vot, int term) {
    CooccurrenceGraph g;
    g.cohort_year = cohort_year;
    g.term = term;
    for (const auto& s : ds.students)
        if (s.cohort_year == cohort_year) g.nodes.push_back(s.student_id);
    if (g.nodes.empty())
        throw DanglingReferenceError("unknown cohort year " + std::to_string(cohort_year));
    std::sort(g.nodes.begin(), g.nodes.end());
    for (int i = 0; i < g.n(); ++i) g.node_index.emplace(g.nodes[i], i);
    g.adj.assign(g.n(), {});

    // event identity -> cohort participants
    std::map<std::tuple<std::string, std::string, int, EventKind>, std::vector<int>> participants;
    for (const auto& e : ds.events) {
        if (e.term > vot) continue;
        if (term != 0 && e.term != term) continue;
        const auto it = g.node_index.find(e.student_id);
        if (it == g.node_index.end()) continue;
        participants[{e.course_id, e.section_id, e.term, e.kind}].push_back(it->second);
    }
    for (auto& [key, members] : participants) {
        (void)key;
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        for (std::size_t i = 0; i < members.size(); ++i)
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                g.adj[members[i]][members[j]] += 1.0;
                g.adj[members[j]][members[i]] += 1.0;
            }
    }
    return g;
}

std::vector<CooccurrenceGraph> build_per_term(const Dataset& ds, int cohort_year, int vot) {
    std::vector<CooccurrenceGraph> out;
    out.reserve(vot);
    for (int t = 1; t <= vot; ++t) out.push_back(build_cooccurrence(ds, cohort_year, vot, t));
    return out;
}

} // namespace edm
