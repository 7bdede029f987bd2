#include "edm/louvain.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace edm {

double modularity(const CooccurrenceGraph& g, const std::vector<int>& assignment) {
    const double m = g.total_weight();
    if (m <= 0.0) return 0.0;
    std::map<int, double> intra, degree;
    for (int v = 0; v < g.n(); ++v) {
        for (const auto& [u, w] : g.adj[v]) {
            degree[assignment[v]] += w;
            if (u > v && assignment[u] == assignment[v]) intra[assignment[v]] += w;
        }
    }
    double q = 0.0;
    for (const auto& [c, d] : degree) {
        const auto it = intra.find(c);
        const double within = it == intra.end() ? 0.0 : it->second;
        q += within / m - (d / (2.0 * m)) * (d / (2.0 * m));
    }
    return q;
}

namespace {

// aggregated working graph; self-loops hold internal weight counted once
struct LevelGraph {
    std::vector<std::map<int, double>> adj; // off-diagonal
    std::vector<double> self_loop;
    std::vector<double> strength; // 2*self_loop + incident weight
    double two_m = 0.0;

    int n() const { return static_cast<int>(adj.size()); }
};

// Sweeps until a full pass makes no move. Returns true when anything moved.
bool local_moves(const LevelGraph& g, std::vector<int>& comm) {
    const int n = g.n();
    std::vector<double> tot(n, 0.0);
    for (int v = 0; v < n; ++v) tot[comm[v]] += g.strength[v];

    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (int v = 0; v < n; ++v) {
            const int old_comm = comm[v];
            if (g.strength[v] == 0.0) continue; // isolated: stays a singleton
            // weight from v to each adjacent community
            std::map<int, double> links;
            links[old_comm] += 0.0;
            for (const auto& [u, w] : g.adj[v]) links[comm[u]] += w;

            tot[old_comm] -= g.strength[v];
            const double scale = g.strength[v] / g.two_m;
            auto gain_of = [&](int c) { return links.at(c) - tot[c] * scale; };
            // links iterates in ascending community id, so keeping the first
            // strict maximum realises the smallest-id tie rule
            int best = old_comm;
            double best_gain = gain_of(old_comm);
            for (const auto& [c, w] : links) {
                (void)w;
                if (c == old_comm) continue;
                const double gain = gain_of(c);
                if (gain > best_gain + 1e-12) {
                    best = c;
                    best_gain = gain;
                }
            }
            comm[v] = best;
            tot[best] += g.strength[v];
            if (best != old_comm) {
                moved = true;
                any_move = true;
            }
        }
    }
    return any_move;
}

// renumber communities by ascending smallest member, build the quotient graph
LevelGraph aggregate(const LevelGraph& g, std::vector<int>& comm, int& n_communities) {
    const int n = g.n();
    std::vector<int> renumber(n, -1);
    int next = 0;
    for (int v = 0; v < n; ++v) {
        if (renumber[comm[v]] == -1) renumber[comm[v]] = next++;
        comm[v] = renumber[comm[v]];
    }
    n_communities = next;

    LevelGraph q;
    q.adj.assign(next, {});
    q.self_loop.assign(next, 0.0);
    q.strength.assign(next, 0.0);
    q.two_m = g.two_m;
    for (int v = 0; v < n; ++v) {
        q.self_loop[comm[v]] += g.self_loop[v];
        for (const auto& [u, w] : g.adj[v]) {
            if (comm[u] == comm[v]) {
                if (u > v) q.self_loop[comm[v]] += w;
            } else {
                q.adj[comm[v]][comm[u]] += w;
            }
        }
    }
    for (int c = 0; c < next; ++c) {
        q.strength[c] = 2.0 * q.self_loop[c];
        for (const auto& [u, w] : q.adj[c]) {
            (void)u;
            q.strength[c] += w;
        }
    }
    return q;
}

} // namespace

Partition louvain(const CooccurrenceGraph& g, std::uint64_t seed) {
    (void)seed;
    Partition part;
    if (g.n() == 0) return part; // empty graph: empty partition, Q = 0

    LevelGraph level;
    level.adj.assign(g.n(), {});
    level.self_loop.assign(g.n(), 0.0);
    level.strength.assign(g.n(), 0.0);
    for (int v = 0; v < g.n(); ++v) {
        level.adj[v] = g.adj[v];
        level.strength[v] = g.weighted_degree(v);
        level.two_m += level.strength[v];
    }

    // node -> community through all levels
    std::vector<int> flat(g.n());
    for (int v = 0; v < g.n(); ++v) flat[v] = v;

    if (level.two_m > 0.0) {
        std::vector<int> comm(level.n());
        for (int v = 0; v < level.n(); ++v) comm[v] = v;
        for (;;) {
            const bool improved = local_moves(level, comm);
            int n_communities = 0;
            LevelGraph next = aggregate(level, comm, n_communities);
            for (int v = 0; v < g.n(); ++v) flat[v] = comm[flat[v]];
            if (!improved || n_communities == level.n()) break;
            level = std::move(next);
            comm.resize(level.n());
            for (int v = 0; v < level.n(); ++v) comm[v] = v;
        }
    }

    // stable ids: communities ordered by their smallest original node
    std::map<int, int> first_seen;
    for (int v = 0; v < g.n(); ++v)
        if (!first_seen.count(flat[v])) {
            const int id = static_cast<int>(first_seen.size());
            first_seen[flat[v]] = id;
        }
    part.community.resize(g.n());
    part.sizes.assign(first_seen.size(), 0);
    for (int v = 0; v < g.n(); ++v) {
        part.community[v] = first_seen.at(flat[v]);
        part.sizes[part.community[v]] += 1;
    }
    part.modularity = modularity(g, part.community);
    return part;
}

} // namespace edm
