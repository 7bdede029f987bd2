#include "edm/net_features.hpp"

#include "edm/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace edm {

namespace {

// community member-set of `student` in one term, student excluded
std::set<std::string> community_members(const CooccurrenceGraph& g, const Partition& p,
                                        const std::string& student_id) {
    std::set<std::string> out;
    const auto it = g.node_index.find(student_id);
    if (it == g.node_index.end()) return out;
    const int c = p.community[it->second];
    for (int v = 0; v < g.n(); ++v)
        if (p.community[v] == c && g.nodes[v] != student_id) out.insert(g.nodes[v]);
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0; // no peers in either term: no stability evidence
    std::size_t inter = 0;
    for (const auto& x : a)
        if (b.count(x)) ++inter;
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace

NetFeatures net_features(const CooccurrenceGraph& pooled, const Partition& pooled_partition,
                         const std::vector<CooccurrenceGraph>& term_graphs,
                         const std::vector<Partition>& term_partitions,
                         const std::string& student_id, double low_degree_threshold) {
    const auto it = pooled.node_index.find(student_id);
    if (it == pooled.node_index.end())
        throw DanglingReferenceError("unknown student '" + student_id + "' in net_features");
    const int v = it->second;

    NetFeatures f;
    const int comm = pooled_partition.community[v];
    f.community_size = pooled_partition.sizes[comm];
    f.weighted_degree = pooled.weighted_degree(v);

    if (f.weighted_degree > 0.0) {
        double within = 0.0;
        for (const auto& [u, w] : pooled.adj[v])
            if (pooled_partition.community[u] == comm) within += w;
        f.belonging_score = within / f.weighted_degree;
    }

    double stability_sum = 0.0;
    int pairs = 0;
    for (std::size_t t = 0; t + 1 < term_graphs.size(); ++t) {
        const auto now = community_members(term_graphs[t], term_partitions[t], student_id);
        const auto next = community_members(term_graphs[t + 1], term_partitions[t + 1], student_id);
        stability_sum += jaccard(now, next);
        ++pairs;
    }
    f.community_stability = pairs > 0 ? stability_sum / pairs : 0.0;

    f.solitary_flag = f.community_size <= 1 || f.weighted_degree <= low_degree_threshold;
    return f;
}

std::vector<double> standardize_within_cohort(const std::vector<double>& values) {
    std::vector<double> z(values.size(), 0.0);
    if (values.empty()) return z;
    const double m = mean_of(values);
    const double sd = population_std(values);
    if (sd == 0.0) return z;
    for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - m) / sd;
    return z;
}

int CohortNetBlock::index_of(const std::string& student_id) const {
    const auto it = std::lower_bound(students.begin(), students.end(), student_id);
    if (it == students.end() || *it != student_id) return -1;
    return static_cast<int>(it - students.begin());
}

CohortNetBlock compute_net_block(const Dataset& ds, int cohort_year, int vot, std::uint64_t seed) {
    CohortNetBlock block;
    block.cohort_year = cohort_year;
    const CooccurrenceGraph pooled = build_cooccurrence(ds, cohort_year, vot, 0);
    const std::vector<CooccurrenceGraph> term_graphs = build_per_term(ds, cohort_year, vot);
    block.pooled_partition = louvain(pooled, seed);
    std::vector<Partition> term_partitions;
    term_partitions.reserve(term_graphs.size());
    for (const auto& g : term_graphs) term_partitions.push_back(louvain(g, seed));

    std::vector<double> degrees;
    degrees.reserve(pooled.n());
    for (int v = 0; v < pooled.n(); ++v) degrees.push_back(pooled.weighted_degree(v));
    const double low_cut = lower_quantile(degrees, 0.05);

    block.students = pooled.nodes;
    block.raw.reserve(pooled.n());
    std::vector<double> sizes, belonging, stability;
    for (int v = 0; v < pooled.n(); ++v) {
        const NetFeatures f = net_features(pooled, block.pooled_partition, term_graphs,
                                           term_partitions, pooled.nodes[v], low_cut);
        sizes.push_back(f.community_size);
        belonging.push_back(f.belonging_score);
        stability.push_back(f.community_stability);
        block.raw.push_back(f);
    }
    block.z_community_size = standardize_within_cohort(sizes);
    block.z_belonging = standardize_within_cohort(belonging);
    block.z_stability = standardize_within_cohort(stability);
    block.z_weighted_degree = standardize_within_cohort(degrees);
    return block;
}

std::string net_stats_json(const Dataset& ds, int vot, std::uint64_t seed) {
    nlohmann::json cohorts = nlohmann::json::array();
    for (int year : ds.cohort_years()) {
        const CooccurrenceGraph g = build_cooccurrence(ds, year, vot, 0);
        const Partition p = louvain(g, seed);
        nlohmann::json sizes = nlohmann::json::array();
        for (int s : p.sizes) sizes.push_back(s);
        cohorts.push_back({{"year", year},
                           {"students", g.n()},
                           {"total_edge_weight", g.total_weight()},
                           {"communities", p.n_communities()},
                           {"community_sizes", std::move(sizes)},
                           {"modularity", p.modularity}});
    }
    nlohmann::json doc;
    doc["vot"] = vot;
    doc["cohorts"] = std::move(cohorts);
    return doc.dump(2);
}

} // namespace edm
