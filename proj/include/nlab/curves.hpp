#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlab/cover.hpp"
#include "nlab/gradient.hpp"
#include "nlab/parallel.hpp"
#include "nlab/space.hpp"

namespace nlab {

/// Polygonal chain through space points under the arc-length convention:
/// segment i has length d(v_i, v_{i+1}) > 0.
struct Curve {
    std::vector<int> vertices;
    std::vector<double> segment_lengths;
    double length = 0.0;

    int first() const { return vertices.front(); }
    int last() const { return vertices.back(); }
};

inline Curve make_curve(const MetricMeasureSpace& space, std::vector<int> vertices) {
    if (vertices.size() < 2) throw std::invalid_argument("curve needs at least two vertices");
    Curve c;
    c.vertices = std::move(vertices);
    c.segment_lengths.reserve(c.vertices.size() - 1);
    for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i) {
        double d = space.distance(c.vertices[i], c.vertices[i + 1]);
        if (!(d > 0.0)) throw std::invalid_argument("zero-length curve segment");
        c.segment_lengths.push_back(d);
        c.length += d;
    }
    return c;
}

enum class FamilyGenerator { explicit_list, all_simple_paths, k_shortest, grid_rows };

struct CurveFamily {
    std::vector<Curve> curves;
    FamilyGenerator generator = FamilyGenerator::explicit_list;
    std::vector<int> sources, sinks;
    bool truncated = false;  // enumeration hit the curve cap
};

/// Trapezoid-rule line integral on vertex values of rho.
inline double line_integral(const MetricMeasureSpace& space, const Curve& curve,
                            const DiscreteFunction& rho) {
    check_function(space, rho);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < curve.vertices.size(); ++i)
        acc += curve.segment_lengths[i] *
               (rho.values[curve.vertices[i]] + rho.values[curve.vertices[i + 1]]) / 2.0;
    return acc;
}

struct SlackReport {
    int checked = 0;
    int violations = 0;
    int skipped = 0;  // curves failing the endpoint-distance precondition
    double min_slack = std::numeric_limits<double>::infinity();
    std::vector<int> violating;    // indices into the family
    std::vector<double> slacks;    // per curve; NaN where skipped
    double tolerance = 1e-9;
};

/// Upper-gradient slack per curve: integral of g minus the endpoint
/// difference of u. Negative slack below -tol marks a violation.
inline SlackReport check_upper_gradient(const MetricMeasureSpace& space,
                                        const DiscreteFunction& u, const DiscreteFunction& g,
                                        const CurveFamily& family, double tol = 1e-9) {
    check_function(space, u);
    check_function(space, g);
    SlackReport report;
    report.tolerance = tol;
    report.slacks.assign(family.curves.size(), 0.0);
    parallel_for(family.curves.size(), [&](std::size_t i) {
        const Curve& c = family.curves[i];
        report.slacks[i] =
            line_integral(space, c, g) - std::abs(u.values[c.first()] - u.values[c.last()]);
    });
    for (std::size_t i = 0; i < family.curves.size(); ++i) {
        ++report.checked;
        report.min_slack = std::min(report.min_slack, report.slacks[i]);
        if (report.slacks[i] < -tol) {
            ++report.violations;
            report.violating.push_back(static_cast<int>(i));
        }
    }
    return report;
}

/// Slack of the averaged-function chain inequality at generation k:
/// 4 * integral of |T_k u|_p minus |S_k u(x) - S_k u(y)|. Curves whose
/// endpoints are closer than 2^-k breach the precondition and are
/// skipped (counted).
inline SlackReport check_S_k_inequality(const MetricMeasureSpace& space,
                                        const DiscreteFunction& u, const BallCover& cover,
                                        double p, const CurveFamily& family,
                                        double tol = 1e-9) {
    TkField field = T_k(space, u, cover, p);
    DiscreteFunction rho = pointwise_norm(space, field);
    DiscreteFunction s = S_k(space, u, cover);
    SlackReport report;
    report.tolerance = tol;
    report.slacks.assign(family.curves.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<char> ok(family.curves.size(), 0);
    parallel_for(family.curves.size(), [&](std::size_t i) {
        const Curve& c = family.curves[i];
        if (space.distance(c.first(), c.last()) < cover.radius) return;
        ok[i] = 1;
        report.slacks[i] = 4.0 * line_integral(space, c, rho) -
                           std::abs(s.values[c.first()] - s.values[c.last()]);
    });
    for (std::size_t i = 0; i < family.curves.size(); ++i) {
        if (!ok[i]) {
            ++report.skipped;
            continue;
        }
        ++report.checked;
        report.min_slack = std::min(report.min_slack, report.slacks[i]);
        if (report.slacks[i] < -tol) {
            ++report.violations;
            report.violating.push_back(static_cast<int>(i));
        }
    }
    return report;
}

/// Adjacency used for path enumeration: stored edges in graph mode, or
/// all pairs within adjacency_scale otherwise.
inline std::vector<std::vector<std::pair<int, double>>> adjacency(
    const MetricMeasureSpace& space, double adjacency_scale = 0.0) {
    std::vector<std::vector<std::pair<int, double>>> adj(space.size());
    if (space.mode() == MetricMode::graph_shortest_path) {
        for (const Edge& e : space.edges()) {
            adj[e.a].emplace_back(e.b, e.len);
            adj[e.b].emplace_back(e.a, e.len);
        }
    } else {
        if (!(adjacency_scale > 0.0))
            throw std::invalid_argument("non-graph space needs a positive adjacency scale");
        for (int i = 0; i < space.size(); ++i)
            for (int j = 0; j < space.size(); ++j) {
                double d = space.distance(i, j);
                if (j != i && d > 0.0 && d <= adjacency_scale) adj[i].emplace_back(j, d);
            }
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
}

/// Every stored or scale-induced edge as a two-vertex curve.
inline CurveFamily edge_family(const MetricMeasureSpace& space, double adjacency_scale = 0.0) {
    CurveFamily family;
    auto adj = adjacency(space, adjacency_scale);
    for (int a = 0; a < space.size(); ++a)
        for (auto [b, len] : adj[a])
            if (a < b) family.curves.push_back(make_curve(space, {a, b}));
    return family;
}

namespace detail {

inline void simple_paths_dfs(const std::vector<std::vector<std::pair<int, double>>>& adj,
                             const std::vector<char>& is_sink, std::vector<int>& path,
                             std::vector<char>& used, int hop_limit, std::size_t max_curves,
                             std::vector<std::vector<int>>& out, bool& truncated) {
    int v = path.back();
    if (is_sink[v] && path.size() >= 2) {
        if (out.size() >= max_curves) {
            truncated = true;
            return;
        }
        out.push_back(path);
    }
    if (static_cast<int>(path.size()) - 1 >= hop_limit) return;
    for (auto [w, len] : adj[v]) {
        if (used[w] || truncated) continue;
        used[w] = 1;
        path.push_back(w);
        simple_paths_dfs(adj, is_sink, path, used, hop_limit, max_curves, out, truncated);
        path.pop_back();
        used[w] = 0;
    }
}

struct PathResult {
    std::vector<int> vertices;
    double length = std::numeric_limits<double>::infinity();
    bool found = false;
};

/// Deterministic Dijkstra with (distance, id) tie-break; optional bans
/// support the spur steps of the k-shortest enumeration.
inline PathResult shortest_path(const std::vector<std::vector<std::pair<int, double>>>& adj,
                                int s, int t, const std::set<std::pair<int, int>>& banned_edges = {},
                                const std::vector<char>& banned_nodes = {}) {
    int n = static_cast<int>(adj.size());
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n, -1);
    auto banned = [&](int v) { return !banned_nodes.empty() && banned_nodes[v]; };
    if (banned(s) || banned(t)) return {};
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> q;
    dist[s] = 0.0;
    q.emplace(0.0, s);
    while (!q.empty()) {
        auto [d, v] = q.top();
        q.pop();
        if (d > dist[v]) continue;
        for (auto [w, len] : adj[v]) {
            if (banned(w) || banned_edges.count({v, w}) || banned_edges.count({w, v})) continue;
            double nd = d + len;
            if (nd < dist[w] - 1e-15 ||
                (std::abs(nd - dist[w]) <= 1e-15 && parent[w] > v && parent[w] >= 0)) {
                dist[w] = nd;
                parent[w] = v;
                q.emplace(nd, w);
            }
        }
    }
    PathResult res;
    if (!std::isfinite(dist[t])) return res;
    res.found = true;
    res.length = dist[t];
    for (int v = t; v >= 0; v = parent[v]) res.vertices.push_back(v);
    std::reverse(res.vertices.begin(), res.vertices.end());
    return res;
}

/// Yen's loopless k-shortest paths between a fixed pair.
inline std::vector<std::vector<int>> yen_k_shortest(
    const std::vector<std::vector<std::pair<int, double>>>& adj, int s, int t, int K) {
    std::vector<std::vector<int>> A;
    auto path_len = [&](const std::vector<int>& p) {
        double L = 0.0;
        for (std::size_t i = 0; i + 1 < p.size(); ++i)
            for (auto [w, len] : adj[p[i]])
                if (w == p[i + 1]) {
                    L += len;
                    break;
                }
        return L;
    };
    PathResult first = shortest_path(adj, s, t);
    if (!first.found) return A;
    A.push_back(first.vertices);
    // candidates ordered by (length, lexicographic vertex sequence)
    auto cmp = [&](const std::vector<int>& a, const std::vector<int>& b) {
        double la = path_len(a), lb = path_len(b);
        if (la != lb) return la < lb;
        return a < b;
    };
    std::vector<std::vector<int>> B;
    while (static_cast<int>(A.size()) < K) {
        const std::vector<int>& prev = A.back();
        for (std::size_t i = 0; i + 1 < prev.size(); ++i) {
            std::vector<int> root(prev.begin(), prev.begin() + i + 1);
            std::set<std::pair<int, int>> banned_edges;
            for (const auto& p : A)
                if (p.size() > i && std::equal(root.begin(), root.end(), p.begin()))
                    banned_edges.insert({p[i], p[i + 1]});
            std::vector<char> banned_nodes(adj.size(), 0);
            for (std::size_t j = 0; j + 1 < root.size(); ++j) banned_nodes[root[j]] = 1;
            PathResult spur = shortest_path(adj, prev[i], t, banned_edges, banned_nodes);
            if (!spur.found) continue;
            std::vector<int> total = root;
            total.insert(total.end(), spur.vertices.begin() + 1, spur.vertices.end());
            if (std::find_if(B.begin(), B.end(), [&](const auto& p) { return p == total; }) ==
                    B.end() &&
                std::find_if(A.begin(), A.end(), [&](const auto& p) { return p == total; }) ==
                    A.end())
                B.push_back(std::move(total));
        }
        if (B.empty()) break;
        std::sort(B.begin(), B.end(), cmp);
        A.push_back(B.front());
        B.erase(B.begin());
    }
    return A;
}

}  // namespace detail

struct FamilyOptions {
    int hop_limit = 8;
    int k_shortest = 4;
    std::size_t max_curves = 10000;
    double adjacency_scale = 0.0;  // required for non-graph spaces
};

/// Deterministic curve family enumeration. all-simple-paths is bounded by
/// the hop limit; k-shortest orders by length with lexicographic
/// tie-break; grid-rows emits one polyline per lattice row.
inline CurveFamily enumerate_family(const MetricMeasureSpace& space, FamilyGenerator generator,
                                    std::vector<int> sources, std::vector<int> sinks,
                                    const FamilyOptions& opts = {}) {
    CurveFamily family;
    family.generator = generator;
    family.sources = sources;
    family.sinks = sinks;
    if (generator == FamilyGenerator::grid_rows) {
        if (!space.has_coords() || space.coords()[0].size() != 2)
            throw std::invalid_argument("grid-rows needs 2-d coordinates");
        std::map<double, std::vector<int>> rows;
        for (int i = 0; i < space.size(); ++i) rows[space.coords()[i][0]].push_back(i);
        for (auto& [key, ids] : rows) {
            std::sort(ids.begin(), ids.end(), [&](int a, int b) {
                return space.coords()[a][1] < space.coords()[b][1];
            });
            if (ids.size() >= 2) family.curves.push_back(make_curve(space, ids));
        }
        return family;
    }
    if (sources.empty() || sinks.empty()) throw std::invalid_argument("empty terminal sets");
    auto adj = adjacency(space, opts.adjacency_scale);
    std::sort(sources.begin(), sources.end());
    std::sort(sinks.begin(), sinks.end());
    if (generator == FamilyGenerator::all_simple_paths) {
        if (opts.hop_limit < 1) throw std::invalid_argument("hop limit must be >= 1");
        std::vector<char> is_sink(space.size(), 0);
        for (int t : sinks) is_sink[t] = 1;
        std::vector<std::vector<int>> raw;
        for (int s : sources) {
            std::vector<int> path{s};
            std::vector<char> used(space.size(), 0);
            used[s] = 1;
            detail::simple_paths_dfs(adj, is_sink, path, used, opts.hop_limit, opts.max_curves,
                                     raw, family.truncated);
        }
        for (auto& p : raw) family.curves.push_back(make_curve(space, std::move(p)));
        return family;
    }
    if (generator == FamilyGenerator::k_shortest) {
        std::vector<std::vector<int>> all;
        for (int s : sources)
            for (int t : sinks) {
                if (s == t) continue;
                for (auto& p : detail::yen_k_shortest(adj, s, t, opts.k_shortest))
                    all.push_back(std::move(p));
            }
        std::sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
            double la = 0.0, lb = 0.0;
            for (std::size_t i = 0; i + 1 < a.size(); ++i) la += space.distance(a[i], a[i + 1]);
            for (std::size_t i = 0; i + 1 < b.size(); ++i) lb += space.distance(b[i], b[i + 1]);
            if (la != lb) return la < lb;
            return a < b;
        });
        all.erase(std::unique(all.begin(), all.end()), all.end());
        if (all.size() > opts.max_curves) {
            all.resize(opts.max_curves);
            family.truncated = true;
        }
        for (auto& p : all) family.curves.push_back(make_curve(space, std::move(p)));
        return family;
    }
    throw std::invalid_argument("explicit families are constructed directly");
}

/// Seeded random walks over the adjacency structure, kept only when the
/// endpoints are at least min_endpoint_distance apart. Steps avoid the
/// immediate predecessor when possible so walks make progress.
inline CurveFamily random_walk_family(const MetricMeasureSpace& space, int count,
                                      double min_endpoint_distance, int max_hops,
                                      std::uint64_t seed, double adjacency_scale = 0.0) {
    auto adj = adjacency(space, adjacency_scale);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_start(0, space.size() - 1);
    CurveFamily family;
    int attempts = 0;
    while (static_cast<int>(family.curves.size()) < count && attempts < 50 * count) {
        ++attempts;
        int v = pick_start(rng);
        std::vector<int> path{v};
        int prev = -1;
        for (int hop = 0; hop < max_hops; ++hop) {
            const auto& nb = adj[path.back()];
            if (nb.empty()) break;
            std::vector<int> options;
            for (auto [w, len] : nb)
                if (w != prev) options.push_back(w);
            if (options.empty()) options.push_back(prev);
            std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
            prev = path.back();
            path.push_back(options[pick(rng)]);
            if (space.distance(path.front(), path.back()) >= min_endpoint_distance &&
                path.size() >= 2) {
                // random continuation keeps curve lengths varied
                std::uniform_real_distribution<double> cont(0.0, 1.0);
                if (cont(rng) < 0.3) break;
            }
        }
        if (path.size() >= 2 &&
            space.distance(path.front(), path.back()) >= min_endpoint_distance)
            family.curves.push_back(make_curve(space, std::move(path)));
    }
    return family;
}

/// Concatenation at a shared endpoint (used by the additivity property).
inline Curve concatenate(const MetricMeasureSpace& space, const Curve& a, const Curve& b) {
    if (a.last() != b.first()) throw std::invalid_argument("curves do not share an endpoint");
    std::vector<int> v = a.vertices;
    v.insert(v.end(), b.vertices.begin() + 1, b.vertices.end());
    return make_curve(space, std::move(v));
}

}  // namespace nlab
