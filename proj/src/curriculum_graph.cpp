#include "edm/curriculum_graph.hpp"

#include "edm/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <limits>
#include <sstream>

namespace edm {

CycleError::CycleError(std::vector<std::string> nodes)
    : DataError([&nodes] {
          std::ostringstream msg;
          msg << "curriculum has a prerequisite cycle: [";
          for (std::size_t i = 0; i < nodes.size(); ++i) msg << (i ? ", " : "") << nodes[i];
          msg << "]";
          return msg.str();
      }()),
      cycle(std::move(nodes)) {}

int CurriculumGraph::node(const std::string& id) const {
    const auto it = index.find(id);
    if (it == index.end())
        throw DanglingReferenceError("unknown course '" + id + "' referenced against curriculum graph");
    return it->second;
}

namespace {

// one concrete cycle among the nodes Kahn's algorithm could not order
std::vector<std::string> find_cycle(const CurriculumGraph& g, const std::vector<bool>& in_cycle_set) {
    const int n = g.n();
    std::vector<int> state(n, 0); // 0 unvisited, 1 on stack, 2 done
    std::vector<int> parent(n, -1);
    for (int start = 0; start < n; ++start) {
        if (!in_cycle_set[start] || state[start] != 0) continue;
        std::vector<int> stack{start};
        while (!stack.empty()) {
            const int v = stack.back();
            if (state[v] == 0) {
                state[v] = 1;
                for (int w : g.unlocks[v]) {
                    if (!in_cycle_set[w]) continue;
                    if (state[w] == 1) {
                        std::vector<std::string> cycle{g.course_ids[w]};
                        for (int u = v; u != w && u != -1; u = parent[u])
                            cycle.push_back(g.course_ids[u]);
                        std::reverse(cycle.begin() + 1, cycle.end());
                        return cycle;
                    }
                    if (state[w] == 0) {
                        parent[w] = v;
                        stack.push_back(w);
                    }
                }
            } else {
                state[v] = 2;
                stack.pop_back();
            }
        }
    }
    return {};
}

} // namespace

CurriculumGraph build_graph(const CurriculumSpec& spec) {
    CurriculumGraph g;
    for (const auto& c : spec.courses) {
        if (g.index.count(c.course_id))
            throw DuplicateKeyError("duplicate course_id '" + c.course_id + "' in curriculum");
        g.index.emplace(c.course_id, g.n());
        g.course_ids.push_back(c.course_id);
        g.credits.push_back(c.credits);
        g.backbone_flag.push_back(c.backbone);
        g.foundational_flag.push_back(c.foundational);
    }
    const int n = g.n();
    g.prereqs_of.assign(n, {});
    g.unlocks.assign(n, {});
    for (const auto& c : spec.courses) {
        const int v = g.index.at(c.course_id);
        for (const auto& p : c.prerequisites) {
            const auto it = g.index.find(p);
            if (it == g.index.end())
                throw DanglingReferenceError("course '" + c.course_id + "' requires unknown course '" +
                                             p + "'");
            g.prereqs_of[v].push_back(it->second);
            g.unlocks[it->second].push_back(v);
        }
    }
    for (int v = 0; v < n; ++v) {
        std::sort(g.prereqs_of[v].begin(), g.prereqs_of[v].end());
        std::sort(g.unlocks[v].begin(), g.unlocks[v].end());
    }
    g.in_degree.resize(n);
    g.out_degree.resize(n);
    for (int v = 0; v < n; ++v) {
        g.in_degree[v] = static_cast<int>(g.prereqs_of[v].size());
        g.out_degree[v] = static_cast<int>(g.unlocks[v].size());
    }

    // Kahn's algorithm; leftovers are on a cycle
    std::vector<int> remaining = g.in_degree;
    std::deque<int> ready;
    for (int v = 0; v < n; ++v)
        if (remaining[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
        const int v = ready.front();
        ready.pop_front();
        g.topo_order.push_back(v);
        for (int w : g.unlocks[v])
            if (--remaining[w] == 0) ready.push_back(w);
    }
    if (static_cast<int>(g.topo_order.size()) != n) {
        std::vector<bool> leftover(n, false);
        for (int v = 0; v < n; ++v) leftover[v] = remaining[v] > 0;
        throw CycleError(find_cycle(g, leftover));
    }

    for (int v = 0; v < n; ++v)
        if (g.out_degree[v] == 0) g.terminals.push_back(v);

    for (int v = 0; v < n; ++v)
        if (g.backbone_flag[v]) g.backbone_set.push_back(v);
    if (g.backbone_set.empty() && n > 0) {
        // fallback: top quartile of total degree
        std::vector<double> totals;
        totals.reserve(n);
        for (int v = 0; v < n; ++v)
            totals.push_back(static_cast<double>(g.in_degree[v] + g.out_degree[v]));
        const double cut = lower_quantile(totals, 0.75);
        for (int v = 0; v < n; ++v)
            if (static_cast<double>(g.in_degree[v] + g.out_degree[v]) >= cut)
                g.backbone_set.push_back(v);
    }

    g.longest_chain_to.assign(n, 0);
    for (int v : g.topo_order)
        for (int p : g.prereqs_of[v])
            g.longest_chain_to[v] = std::max(g.longest_chain_to[v], g.longest_chain_to[p] + 1);

    return g;
}

std::map<std::string, int> enrolment_counts(const Dataset& ds, const std::set<std::string>* students) {
    std::map<std::string, std::set<std::string>> seen;
    for (const auto& e : ds.events) {
        if (students && !students->count(e.student_id)) continue;
        seen[e.course_id].insert(e.student_id);
    }
    std::map<std::string, int> counts;
    for (const auto& c : ds.curriculum.courses) {
        const auto it = seen.find(c.course_id);
        counts[c.course_id] = it == seen.end() ? 0 : static_cast<int>(it->second.size());
    }
    return counts;
}

std::set<std::string> identify_bottlenecks(const CurriculumGraph& g,
                                           const std::map<std::string, int>& enrolment, double q) {
    std::set<std::string> out;
    if (g.n() == 0) return out;
    std::vector<double> degrees, enrols;
    for (int v = 0; v < g.n(); ++v) {
        degrees.push_back(static_cast<double>(g.in_degree[v]));
        const auto it = enrolment.find(g.course_ids[v]);
        enrols.push_back(it == enrolment.end() ? 0.0 : static_cast<double>(it->second));
    }
    const double deg_cut = lower_quantile(degrees, q);
    const double enr_cut = lower_quantile(enrols, q);
    for (int v = 0; v < g.n(); ++v)
        if (degrees[v] >= deg_cut && enrols[v] >= enr_cut) out.insert(g.course_ids[v]);
    return out;
}

std::set<std::string> identify_bottlenecks(const CurriculumGraph& g, const Dataset& ds, double q) {
    return identify_bottlenecks(g, enrolment_counts(ds), q);
}

StudentSnapshot snapshot_at_vot(const Dataset& ds, const std::string& student_id, int vot) {
    if (!ds.find_student(student_id))
        throw DanglingReferenceError("unknown student '" + student_id + "' in snapshot_at_vot");
    StudentSnapshot snap;
    snap.student_id = student_id;
    for (const auto& e : ds.events) {
        if (e.student_id != student_id || e.term > vot) continue;
        snap.attempted.insert(e.course_id);
        if (e.result == EventResult::passed) snap.passed.insert(e.course_id);
        if (e.result == EventResult::failed) snap.failure_counts[e.course_id] += 1;
    }
    for (const auto& id : snap.passed) {
        const CourseSpec* c = ds.curriculum.find(id);
        snap.credits_earned += c ? c->credits : 0;
    }
    return snap;
}

GraphFeatures compute_graph_features(const CurriculumGraph& g, const StudentSnapshot& snap,
                                     const std::set<std::string>& bottlenecks) {
    const int n = g.n();
    std::vector<bool> passed(n, false), attempted(n, false);
    for (const auto& id : snap.passed) passed[g.node(id)] = true;
    for (const auto& id : snap.attempted) attempted[g.node(id)] = true;

    GraphFeatures f;

    // blocked credits: unpassed courses with at least one unpassed direct prerequisite
    for (int v = 0; v < n; ++v) {
        if (passed[v]) continue;
        bool blocked = false;
        for (int p : g.prereqs_of[v])
            if (!passed[p]) { blocked = true; break; }
        if (blocked) f.blocked_credits += g.credits[v];
    }

    // backbone completion
    if (!g.backbone_set.empty()) {
        int done = 0;
        for (int v : g.backbone_set)
            if (passed[v]) ++done;
        f.backbone_completion_rate = static_cast<double>(done) / g.backbone_set.size();
    } else {
        f.backbone_completion_rate = 1.0; // empty curriculum
    }

    // bottleneck approval over attempted bottlenecks; neutral when none attempted
    {
        int att = 0, ok = 0;
        for (const auto& id : bottlenecks) {
            const auto it = g.index.find(id);
            if (it == g.index.end()) continue;
            const int v = it->second;
            if (attempted[v]) {
                ++att;
                if (passed[v]) ++ok;
            }
        }
        f.no_bottleneck_attempted = att == 0;
        f.bottleneck_approval_ratio = att == 0 ? 1.0 : static_cast<double>(ok) / att;
    }

    // distance to graduation: Σ over unpassed terminals of the shortest
    // directed path (in edges) from any passed course, with the longest
    // prerequisite chain + 1 as the fallback when nothing passed reaches it.
    {
        constexpr int kUnreached = std::numeric_limits<int>::max();
        std::vector<int> dist(n, kUnreached);
        std::deque<int> queue;
        for (int v = 0; v < n; ++v)
            if (passed[v]) {
                dist[v] = 0;
                queue.push_back(v);
            }
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int w : g.unlocks[v])
                if (dist[w] == kUnreached) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
        }
        long total = 0;
        for (int t : g.terminals) {
            if (passed[t]) continue;
            total += dist[t] == kUnreached ? g.longest_chain_to[t] + 1 : dist[t];
        }
        f.distance_to_graduation = static_cast<int>(total);
    }

    // prerequisite satisfaction, credit-weighted over unpassed courses;
    // a course with no prerequisites counts as fully satisfied
    {
        double num = 0.0;
        long den = 0;
        for (int v = 0; v < n; ++v) {
            if (passed[v]) continue;
            den += g.credits[v];
            const auto& pre = g.prereqs_of[v];
            double ratio = 1.0;
            if (!pre.empty()) {
                int ok = 0;
                for (int p : pre)
                    if (passed[p]) ++ok;
                ratio = static_cast<double>(ok) / pre.size();
            }
            num += g.credits[v] * ratio;
        }
        f.prereq_satisfaction_index = den == 0 ? 1.0 : num / den;
    }

    return f;
}

std::string graph_stats_json(const CurriculumGraph& g, const std::set<std::string>& bottlenecks) {
    nlohmann::json doc;
    doc["courses"] = g.n();
    int edges = 0;
    for (int v = 0; v < g.n(); ++v) edges += g.out_degree[v];
    doc["prerequisite_edges"] = edges;
    nlohmann::json terminals = nlohmann::json::array();
    for (int t : g.terminals) terminals.push_back(g.course_ids[t]);
    doc["terminals"] = std::move(terminals);
    nlohmann::json backbone = nlohmann::json::array();
    for (int v : g.backbone_set) backbone.push_back(g.course_ids[v]);
    doc["backbone"] = std::move(backbone);
    doc["bottlenecks"] = bottlenecks;
    return doc.dump(2);
}

} // namespace edm
