#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace nlab {

enum class MetricMode { euclidean, explicit_matrix, graph_shortest_path };

struct Edge {
    int a = 0;
    int b = 0;
    double len = 0.0;
};

/// Real values attached to the points of one space. Carries the role of
/// u, g, h and rho; finite unless explicitly flagged extended-real.
struct DiscreteFunction {
    std::vector<double> values;
    std::uint64_t space_id = 0;
    bool extended_real = false;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

/// Doubling and overlap statistics measured on a space. C_d comes from
/// ratio scans over the dyadic radius ladder; C_0 and N_max are filled in
/// from constructed covers.
struct DoublingStats {
    double C_d_estimate = 1.0;
    int C_0_estimate = 1;
    int N_max = 0;
    std::vector<std::tuple<int, double, double>> sample_log;  // (center, radius, ratio)
};

/// Finite metric-measure space: weighted points with one of three metric
/// backends. Immutable after construction; all queries are pure reads.
class MetricMeasureSpace {
public:
    static MetricMeasureSpace from_coords(std::vector<std::vector<double>> coords,
                                          std::vector<double> weights) {
        MetricMeasureSpace s;
        s.mode_ = MetricMode::euclidean;
        s.coords_ = std::move(coords);
        s.weights_ = std::move(weights);
        s.n_ = static_cast<int>(s.weights_.size());
        if (s.coords_.size() != s.weights_.size())
            throw std::invalid_argument("coords/weights size mismatch");
        s.dist_.assign(static_cast<std::size_t>(s.n_) * s.n_, 0.0);
        for (int i = 0; i < s.n_; ++i)
            for (int j = i + 1; j < s.n_; ++j) {
                double d2 = 0.0;
                if (s.coords_[i].size() != s.coords_[j].size())
                    throw std::invalid_argument("inconsistent coordinate dimensions");
                for (std::size_t c = 0; c < s.coords_[i].size(); ++c) {
                    double t = s.coords_[i][c] - s.coords_[j][c];
                    d2 += t * t;
                }
                double d = std::sqrt(d2);
                s.dist_[s.idx(i, j)] = d;
                s.dist_[s.idx(j, i)] = d;
            }
        s.finalize();
        return s;
    }

    static MetricMeasureSpace from_matrix(std::vector<std::vector<double>> matrix,
                                          std::vector<double> weights,
                                          std::uint64_t triangle_check_seed = 0) {
        MetricMeasureSpace s;
        s.mode_ = MetricMode::explicit_matrix;
        s.weights_ = std::move(weights);
        s.n_ = static_cast<int>(s.weights_.size());
        if (matrix.size() != s.weights_.size())
            throw std::invalid_argument("matrix/weights size mismatch");
        s.dist_.assign(static_cast<std::size_t>(s.n_) * s.n_, 0.0);
        for (int i = 0; i < s.n_; ++i) {
            if (matrix[i].size() != s.weights_.size())
                throw std::invalid_argument("matrix is not square");
            for (int j = 0; j < s.n_; ++j) s.dist_[s.idx(i, j)] = matrix[i][j];
        }
        s.validate_matrix(triangle_check_seed);
        s.finalize();
        return s;
    }

    static MetricMeasureSpace from_graph(int n, std::vector<Edge> edges,
                                         std::vector<double> weights,
                                         std::vector<std::vector<double>> coords = {}) {
        MetricMeasureSpace s;
        s.mode_ = MetricMode::graph_shortest_path;
        s.n_ = n;
        s.edges_ = std::move(edges);
        s.weights_ = std::move(weights);
        s.coords_ = std::move(coords);
        if (static_cast<int>(s.weights_.size()) != n)
            throw std::invalid_argument("weights size mismatch");
        for (const Edge& e : s.edges_) {
            if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n)
                throw std::invalid_argument("edge endpoint out of range");
            if (!(e.len > 0.0)) throw std::invalid_argument("non-positive edge length");
        }
        s.all_pairs_shortest_paths();
        s.finalize();
        return s;
    }

    int size() const { return n_; }
    MetricMode mode() const { return mode_; }
    std::uint64_t id() const { return id_; }
    double weight(int i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    double total_mass() const { return total_mass_; }
    const std::vector<Edge>& edges() const { return edges_; }
    bool has_coords() const { return !coords_.empty(); }
    const std::vector<std::vector<double>>& coords() const { return coords_; }

    double distance(int i, int j) const { return dist_[idx(i, j)]; }

    /// Largest pairwise distance.
    double diameter() const { return diameter_; }

    /// Smallest positive pairwise distance (0 for a single point).
    double resolution() const { return resolution_; }

    /// Point ids of {y : d(center,y) <= r}. Balls are closed; r = 0 gives
    /// the singleton (plus exact duplicates).
    std::vector<int> ball(int center, double r) const {
        check_point(center);
        if (r < 0.0) throw std::invalid_argument("negative radius");
        std::vector<int> out;
        const int* order = sorted_order(center);
        for (int k = 0; k < n_; ++k) {
            int y = order[k];
            if (distance(center, y) > r) break;
            out.push_back(y);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    double ball_mass(int center, double r) const {
        check_point(center);
        double m = 0.0;
        const int* order = sorted_order(center);
        for (int k = 0; k < n_; ++k) {
            int y = order[k];
            if (distance(center, y) > r) break;
            m += weights_[y];
        }
        return m;
    }

    /// Point ids in ascending distance from center (ties by id).
    const int* sorted_order(int center) const { return &order_[static_cast<std::size_t>(center) * n_]; }

private:
    void check_point(int i) const {
        if (i < 0 || i >= n_) throw std::out_of_range("point id out of range");
    }

    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

    void validate_matrix(std::uint64_t seed) {
        for (int i = 0; i < n_; ++i) {
            if (dist_[idx(i, i)] != 0.0) throw std::invalid_argument("nonzero diagonal in metric matrix");
            for (int j = i + 1; j < n_; ++j) {
                if (std::abs(dist_[idx(i, j)] - dist_[idx(j, i)]) > 1e-12)
                    throw std::invalid_argument("asymmetric metric matrix");
                if (dist_[idx(i, j)] < 0.0) throw std::invalid_argument("negative distance");
            }
        }
        auto check_triple = [&](int a, int b, int c) {
            if (dist_[idx(a, c)] > dist_[idx(a, b)] + dist_[idx(b, c)] + 1e-9)
                throw std::invalid_argument(
                    "triangle inequality violated at triple (" + std::to_string(a) + "," +
                    std::to_string(b) + "," + std::to_string(c) + ")");
        };
        if (n_ <= 64) {
            for (int a = 0; a < n_; ++a)
                for (int b = 0; b < n_; ++b)
                    for (int c = 0; c < n_; ++c) check_triple(a, b, c);
        } else {
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<int> pick(0, n_ - 1);
            for (int t = 0; t < 200000; ++t) check_triple(pick(rng), pick(rng), pick(rng));
        }
    }

    void all_pairs_shortest_paths() {
        std::vector<std::vector<std::pair<int, double>>> adj(n_);
        for (const Edge& e : edges_) {
            adj[e.a].emplace_back(e.b, e.len);
            adj[e.b].emplace_back(e.a, e.len);
        }
        const double inf = std::numeric_limits<double>::infinity();
        dist_.assign(static_cast<std::size_t>(n_) * n_, inf);
        for (int src = 0; src < n_; ++src) {
            std::vector<double> d(n_, inf);
            d[src] = 0.0;
            using Item = std::pair<double, int>;
            std::priority_queue<Item, std::vector<Item>, std::greater<Item>> q;
            q.emplace(0.0, src);
            while (!q.empty()) {
                auto [dd, v] = q.top();
                q.pop();
                if (dd > d[v]) continue;
                for (auto [w, len] : adj[v])
                    if (d[v] + len < d[w]) {
                        d[w] = d[v] + len;
                        q.emplace(d[w], w);
                    }
            }
            for (int j = 0; j < n_; ++j) {
                if (!std::isfinite(d[j]))
                    throw std::invalid_argument("graph is disconnected; metric undefined");
                dist_[idx(src, j)] = d[j];
            }
        }
    }

    void finalize() {
        if (n_ <= 0) throw std::invalid_argument("space must contain at least one point");
        for (double w : weights_)
            if (!(w > 0.0)) throw std::invalid_argument("non-positive point weight");
        total_mass_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
        diameter_ = 0.0;
        resolution_ = 0.0;
        double res = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) {
                double d = dist_[idx(i, j)];
                diameter_ = std::max(diameter_, d);
                if (d > 0.0) res = std::min(res, d);
            }
        if (std::isfinite(res)) resolution_ = res;
        order_.resize(static_cast<std::size_t>(n_) * n_);
        for (int i = 0; i < n_; ++i) {
            int* row = &order_[static_cast<std::size_t>(i) * n_];
            std::iota(row, row + n_, 0);
            std::sort(row, row + n_, [&](int a, int b) {
                double da = dist_[idx(i, a)], db = dist_[idx(i, b)];
                return da != db ? da < db : a < b;
            });
        }
        static std::atomic<std::uint64_t> next_id{1};
        id_ = next_id.fetch_add(1);
    }

    MetricMode mode_ = MetricMode::euclidean;
    int n_ = 0;
    std::uint64_t id_ = 0;
    std::vector<double> weights_;
    std::vector<std::vector<double>> coords_;
    std::vector<Edge> edges_;
    std::vector<double> dist_;
    std::vector<int> order_;
    double total_mass_ = 0.0;
    double diameter_ = 0.0;
    double resolution_ = 0.0;
};

inline DiscreteFunction make_function(const MetricMeasureSpace& space, std::vector<double> values) {
    if (static_cast<int>(values.size()) != space.size())
        throw std::invalid_argument("value count does not match point count");
    DiscreteFunction f;
    f.values = std::move(values);
    f.space_id = space.id();
    return f;
}

inline void check_function(const MetricMeasureSpace& space, const DiscreteFunction& f) {
    if (static_cast<int>(f.size()) != space.size())
        throw std::invalid_argument("function defined on a different point count");
    if (f.space_id != 0 && f.space_id != space.id())
        throw std::invalid_argument("function belongs to a different space");
    if (!f.extended_real)
        for (double v : f.values)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in function");
}

/// Weighted mean of u over a ball given as a point set.
inline double ball_average(const MetricMeasureSpace& space, const DiscreteFunction& u,
                           const std::vector<int>& ball_points) {
    if (ball_points.empty()) throw std::invalid_argument("average over empty ball");
    double num = 0.0, den = 0.0;
    for (int y : ball_points) {
        num += u.values[y] * space.weight(y);
        den += space.weight(y);
    }
    return num / den;
}

/// Dyadic radii 2^-k intersected with [resolution, diameter], coarse to
/// fine. Empty for a single point.
inline std::vector<double> dyadic_ladder(const MetricMeasureSpace& space) {
    std::vector<double> out;
    double res = space.resolution(), diam = space.diameter();
    if (!(diam > 0.0) || !(res > 0.0)) return out;
    int k_lo = static_cast<int>(std::ceil(-std::log2(diam) - 1e-9));
    int k_hi = static_cast<int>(std::floor(-std::log2(res) + 1e-9));
    for (int k = k_lo; k <= k_hi; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

/// Generation window [k_lo, k_hi] where covers are meaningful: radius at
/// most the diameter and at least 4x the resolution (below that balls
/// degenerate to singletons and T_k collapses to zero).
inline std::pair<int, int> admissible_k_window(const MetricMeasureSpace& space) {
    double res = space.resolution(), diam = space.diameter();
    if (!(diam > 0.0) || !(res > 0.0)) return {0, 0};
    int k_lo = static_cast<int>(std::ceil(-std::log2(diam) - 1e-9));
    int k_hi = static_cast<int>(std::floor(-std::log2(4.0 * res) + 1e-9));
    if (k_hi < k_lo) k_hi = k_lo;
    return {k_lo, k_hi};
}

inline double doubling_ratio(const MetricMeasureSpace& space, int center, double r) {
    double small = space.ball_mass(center, r);
    return space.ball_mass(center, 2.0 * r) / small;
}

/// Max of mu(B(x,2r))/mu(B(x,r)) over sampled (x, r) pairs drawn from the
/// dyadic ladder. Exhaustive when sample_count covers the whole grid.
inline DoublingStats estimate_doubling(const MetricMeasureSpace& space, int sample_count,
                                       std::uint64_t seed = 0) {
    if (sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
    DoublingStats stats;
    std::vector<double> ladder = dyadic_ladder(space);
    if (ladder.empty()) return stats;  // single point: C_d = 1
    std::size_t grid = static_cast<std::size_t>(space.size()) * ladder.size();
    auto probe = [&](int x, double r) {
        double ratio = doubling_ratio(space, x, r);
        stats.C_d_estimate = std::max(stats.C_d_estimate, ratio);
        stats.sample_log.emplace_back(x, r, ratio);
    };
    if (static_cast<std::size_t>(sample_count) >= grid) {
        for (int x = 0; x < space.size(); ++x)
            for (double r : ladder) probe(x, r);
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> px(0, space.size() - 1);
        std::uniform_int_distribution<std::size_t> pr(0, ladder.size() - 1);
        for (int t = 0; t < sample_count; ++t) probe(px(rng), ladder[pr(rng)]);
    }
    return stats;
}

/// Hardy-Littlewood maximal operator over the dyadic radius ladder plus
/// the singleton ball (the r -> 0 limit on finite data).
inline DiscreteFunction maximal_function(const MetricMeasureSpace& space,
                                         const DiscreteFunction& g) {
    check_function(space, g);
    std::vector<double> ladder = dyadic_ladder(space);
    DiscreteFunction out = make_function(space, std::vector<double>(space.size(), 0.0));
    for (int x = 0; x < space.size(); ++x) {
        const int* order = space.sorted_order(x);
        // prefix sums over ascending distance
        double best = 0.0, mass = 0.0, acc = 0.0;
        std::size_t pos = 0;
        // singleton ball: all points at distance 0
        while (pos < static_cast<std::size_t>(space.size()) &&
               space.distance(x, order[pos]) == 0.0) {
            mass += space.weight(order[pos]);
            acc += std::abs(g.values[order[pos]]) * space.weight(order[pos]);
            ++pos;
        }
        best = acc / mass;
        for (auto it = ladder.rbegin(); it != ladder.rend(); ++it) {  // ascending radii
            while (pos < static_cast<std::size_t>(space.size()) &&
                   space.distance(x, order[pos]) <= *it) {
                mass += space.weight(order[pos]);
                acc += std::abs(g.values[order[pos]]) * space.weight(order[pos]);
                ++pos;
            }
            best = std::max(best, acc / mass);
        }
        out.values[x] = best;
    }
    return out;
}

struct LipEstimate {
    DiscreteFunction values;
    int degenerate_points = 0;  // points where every ladder ball was a singleton
};

/// Finite-ladder surrogate of the pointwise lower Lipschitz constant:
/// per point, min over ladder radii of sup |u(x)-u(y)| normalized by the
/// attained ball radius. Singleton balls contribute nothing; if all balls
/// are singletons the value is 0 by convention and the point is flagged.
inline LipEstimate lip_estimate(const MetricMeasureSpace& space, const DiscreteFunction& u,
                                const std::vector<double>& radius_ladder) {
    check_function(space, u);
    if (radius_ladder.empty()) throw std::invalid_argument("empty radius ladder");
    LipEstimate est;
    est.values = make_function(space, std::vector<double>(space.size(), 0.0));
    for (int x = 0; x < space.size(); ++x) {
        const int* order = space.sorted_order(x);
        // running sup of |u(x)-u(y)| along the ascending-distance prefix
        std::vector<double> prefix_sup(space.size(), 0.0);
        std::vector<double> prefix_rad(space.size(), 0.0);
        double sup = 0.0;
        for (int k = 0; k < space.size(); ++k) {
            sup = std::max(sup, std::abs(u.values[x] - u.values[order[k]]));
            prefix_sup[k] = sup;
            prefix_rad[k] = space.distance(x, order[k]);
        }
        double best = std::numeric_limits<double>::infinity();
        for (double r : radius_ladder) {
            // last prefix index within the closed ball
            int lo = -1;
            for (int k = space.size() - 1; k >= 0; --k)
                if (prefix_rad[k] <= r) {
                    lo = k;
                    break;
                }
            if (lo < 0 || prefix_rad[lo] <= 0.0) continue;  // singleton: skip
            best = std::min(best, prefix_sup[lo] / prefix_rad[lo]);
        }
        if (std::isfinite(best)) {
            est.values.values[x] = best;
        } else {
            est.values.values[x] = 0.0;
            ++est.degenerate_points;
        }
    }
    return est;
}

/// Weighted L^p norm on the point measure.
inline double lp_norm(const MetricMeasureSpace& space, const DiscreteFunction& f, double p) {
    double acc = 0.0;
    for (int i = 0; i < space.size(); ++i)
        acc += std::pow(std::abs(f.values[i]), p) * space.weight(i);
    return std::pow(acc, 1.0 / p);
}

}  // namespace nlab
