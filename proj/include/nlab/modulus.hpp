#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

#include "nlab/curves.hpp"
#include "nlab/parallel.hpp"
#include "nlab/space.hpp"

namespace nlab {

struct SolverOptions {
    int max_iterations = 100000;
    double feasibility_tol = 1e-8;
    double objective_tol = 1e-6;
    int polish_every = 400;
};

namespace opt {

/// Sparse constraint row over point indices; coefficients are trapezoid
/// weights, so a row dotted with rho is the curve integral.
struct Row {
    std::vector<std::pair<int, double>> entries;

    double dot(const std::vector<double>& x) const {
        double acc = 0.0;
        for (auto [i, c] : entries) acc += c * x[i];
        return acc;
    }
    double norm2() const {
        double acc = 0.0;
        for (auto [i, c] : entries) acc += c * c;
        return acc;
    }
};

inline Row curve_row(const Curve& curve) {
    Row row;
    std::map<int, double> acc;
    for (std::size_t i = 0; i + 1 < curve.vertices.size(); ++i) {
        acc[curve.vertices[i]] += curve.segment_lengths[i] / 2.0;
        acc[curve.vertices[i + 1]] += curve.segment_lengths[i] / 2.0;
    }
    row.entries.assign(acc.begin(), acc.end());
    return row;
}

struct SolveResult {
    std::vector<double> x;
    double value = 0.0;  // sum w x^p
    std::vector<double> duals;
    std::vector<int> active;
    int iterations = 0;
    double dual_gap = 0.0;
    double min_row_value = std::numeric_limits<double>::infinity();
    bool converged = false;
};

/// Dense two-phase primal simplex with Bland's rule for
///   min w.x  s.t.  R x >= 1, x >= 0.
/// Desk-scale instances only; duals are read off the final tableau.
inline SolveResult simplex_covering(const std::vector<Row>& rows, const std::vector<double>& w) {
    const int m = static_cast<int>(rows.size());
    const int n = static_cast<int>(w.size());
    // columns: x(n) | surplus(m) | artificial(m) | rhs
    const int cols = n + 2 * m + 1;
    std::vector<std::vector<double>> T(m, std::vector<double>(cols, 0.0));
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) {
        for (auto [j, c] : rows[i].entries) T[i][j] = c;
        T[i][n + i] = -1.0;       // surplus
        T[i][n + m + i] = 1.0;    // artificial
        T[i][cols - 1] = 1.0;     // rhs
        basis[i] = n + m + i;
    }
    std::vector<double> obj(cols, 0.0);

    auto pivot = [&](int pr, int pc) {
        double pv = T[pr][pc];
        for (double& v : T[pr]) v /= pv;
        for (int i = 0; i < m; ++i) {
            if (i == pr || T[i][pc] == 0.0) continue;
            double f = T[i][pc];
            for (int j = 0; j < cols; ++j) T[i][j] -= f * T[pr][j];
        }
        double f = obj[pc];
        if (f != 0.0)
            for (int j = 0; j < cols; ++j) obj[j] -= f * T[pr][j];
        basis[pr] = pc;
    };

    auto run = [&](int active_cols) {
        for (int guard = 0; guard < 20000; ++guard) {
            int pc = -1;  // Bland: smallest index with negative reduced cost
            for (int j = 0; j < active_cols; ++j)
                if (obj[j] < -1e-11) {
                    pc = j;
                    break;
                }
            if (pc < 0) return true;
            int pr = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i)
                if (T[i][pc] > 1e-11) {
                    double ratio = T[i][cols - 1] / T[i][pc];
                    if (ratio < best - 1e-12 || (ratio < best + 1e-12 && (pr < 0 || basis[i] < basis[pr]))) {
                        best = ratio;
                        pr = i;
                    }
                }
            if (pr < 0) return false;  // unbounded (cannot happen for covering LPs)
            pivot(pr, pc);
        }
        return false;
    };

    // phase 1: minimize the artificial sum
    for (int j = 0; j < cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += T[i][j];
        obj[j] = (j >= n + m && j < n + 2 * m ? 1.0 : 0.0) - s;
    }
    obj[cols - 1] = 0.0;
    for (int i = 0; i < m; ++i) obj[cols - 1] -= T[i][cols - 1];
    run(n + 2 * m);

    // phase 2 objective: reduced costs of w against the current basis
    std::fill(obj.begin(), obj.end(), 0.0);
    for (int j = 0; j < n; ++j) obj[j] = w[j];
    for (int i = 0; i < m; ++i) {
        int b = basis[i];
        double cb = b < n ? w[b] : 0.0;
        if (cb != 0.0)
            for (int j = 0; j < cols; ++j) obj[j] -= cb * T[i][j];
    }
    run(n + m);  // artificial columns stay out

    SolveResult res;
    res.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (basis[i] < n) res.x[basis[i]] = T[i][cols - 1];
    res.value = 0.0;
    for (int j = 0; j < n; ++j) res.value += w[j] * res.x[j];
    // dual of row i is the reduced cost of its surplus column
    res.duals.assign(m, 0.0);
    for (int i = 0; i < m; ++i) res.duals[i] = std::max(0.0, obj[n + i]);
    for (int i = 0; i < m; ++i) {
        double v = rows[i].dot(res.x);
        res.min_row_value = std::min(res.min_row_value, v);
        if (v <= 1.0 + 1e-7) res.active.push_back(i);
    }
    double dual_value = std::accumulate(res.duals.begin(), res.duals.end(), 0.0);
    res.dual_gap = std::abs(res.value - dual_value);
    res.converged = res.min_row_value >= 1.0 - 1e-8;
    res.iterations = 0;
    return res;
}

/// Small dense SPD solve with ridge fallback (Cholesky).
inline bool cholesky_solve(std::vector<std::vector<double>> A, std::vector<double> b,
                           std::vector<double>& out) {
    const int n = static_cast<int>(A.size());
    for (int ridge_pass = 0; ridge_pass < 6; ++ridge_pass) {
        std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = A[i][j];
                for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
                if (i == j) {
                    if (s <= 0.0) {
                        ok = false;
                        break;
                    }
                    L[i][i] = std::sqrt(s);
                } else {
                    L[i][j] = s / L[j][j];
                }
            }
        }
        if (ok) {
            std::vector<double> y(n);
            for (int i = 0; i < n; ++i) {
                double s = b[i];
                for (int k = 0; k < i; ++k) s -= L[i][k] * y[k];
                y[i] = s / L[i][i];
            }
            out.assign(n, 0.0);
            for (int i = n - 1; i >= 0; --i) {
                double s = y[i];
                for (int k = i + 1; k < n; ++k) s -= L[k][i] * out[k];
                out[i] = s / L[i][i];
            }
            return true;
        }
        double ridge = std::pow(10.0, ridge_pass - 10);
        for (int i = 0; i < n; ++i) A[i][i] += ridge;
    }
    return false;
}

/// Stationarity map of the covering program for p > 1: the primal point
/// induced by multipliers lambda on the working set.
inline std::vector<double> primal_from_duals(const std::vector<Row>& rows,
                                             const std::vector<int>& work,
                                             const std::vector<double>& lambda,
                                             const std::vector<double>& w, double p, int n) {
    std::vector<double> s(n, 0.0);
    for (std::size_t t = 0; t < work.size(); ++t)
        for (auto [i, c] : rows[work[t]].entries) s[i] += lambda[t] * c;
    std::vector<double> x(n, 0.0);
    for (int i = 0; i < n; ++i)
        if (s[i] > 0.0) x[i] = std::pow(s[i] / (p * w[i]), 1.0 / (p - 1.0));
    return x;
}

/// Lagrangian dual value at lambda >= 0 (any working set).
inline double dual_value(const std::vector<Row>& rows, const std::vector<int>& work,
                         const std::vector<double>& lambda, const std::vector<double>& w,
                         double p, int n) {
    std::vector<double> s(n, 0.0);
    double sum_lambda = 0.0;
    for (std::size_t t = 0; t < work.size(); ++t) {
        sum_lambda += lambda[t];
        for (auto [i, c] : rows[work[t]].entries) s[i] += lambda[t] * c;
    }
    double penalty = 0.0;
    for (int i = 0; i < n; ++i)
        if (s[i] > 0.0)
            penalty += (p - 1.0) * w[i] * std::pow(s[i] / (p * w[i]), p / (p - 1.0));
    return sum_lambda - penalty;
}

/// Working-set KKT refinement: Newton on lambda over the active rows,
/// expanding the set with the most violated row until all rows satisfy
/// R x >= 1 - tol and lambda >= 0.
inline bool kkt_polish(const std::vector<Row>& rows, const std::vector<double>& w, double p,
                       std::vector<double>& x_out, std::vector<double>& duals_out,
                       std::vector<int>& active_out, double tol) {
    const int m = static_cast<int>(rows.size());
    const int n = static_cast<int>(w.size());
    std::vector<int> work = active_out.empty() ? std::vector<int>{0} : active_out;
    std::sort(work.begin(), work.end());
    work.erase(std::unique(work.begin(), work.end()), work.end());
    std::vector<double> lambda;
    for (int round = 0; round < 80; ++round) {
        lambda.assign(work.size(), 1.0);
        // scale the uniform start so the working rows are near 1
        {
            std::vector<double> x = primal_from_duals(rows, work, lambda, w, p, n);
            double mean = 0.0;
            for (int t : work) mean += rows[t].dot(x);
            mean /= static_cast<double>(work.size());
            if (mean > 0.0)
                for (double& l : lambda) l *= std::pow(1.0 / mean, p - 1.0);
        }
        bool newton_ok = false;
        for (int it = 0; it < 200; ++it) {
            std::vector<double> s(n, 0.0);
            for (std::size_t t = 0; t < work.size(); ++t)
                for (auto [i, c] : rows[work[t]].entries) s[i] += lambda[t] * c;
            std::vector<double> x(n, 0.0), dxds(n, 0.0);
            for (int i = 0; i < n; ++i)
                if (s[i] > 0.0) {
                    x[i] = std::pow(s[i] / (p * w[i]), 1.0 / (p - 1.0));
                    dxds[i] = x[i] / ((p - 1.0) * s[i]);
                }
            std::vector<double> G(work.size());
            double gmax = 0.0;
            for (std::size_t t = 0; t < work.size(); ++t) {
                G[t] = rows[work[t]].dot(x) - 1.0;
                gmax = std::max(gmax, std::abs(G[t]));
            }
            if (gmax < 1e-12) {
                newton_ok = true;
                break;
            }
            std::vector<std::vector<double>> J(work.size(), std::vector<double>(work.size(), 0.0));
            for (std::size_t a = 0; a < work.size(); ++a)
                for (std::size_t b = a; b < work.size(); ++b) {
                    double acc = 0.0;
                    // rows are sparse; accumulate over shared support
                    for (auto [i, ca] : rows[work[a]].entries)
                        for (auto [j, cb] : rows[work[b]].entries)
                            if (i == j) acc += ca * cb * dxds[i];
                    J[a][b] = acc;
                    J[b][a] = acc;
                }
            std::vector<double> nG(G.size());
            for (std::size_t t = 0; t < G.size(); ++t) nG[t] = -G[t];
            std::vector<double> delta;
            if (!cholesky_solve(J, nG, delta)) break;
            double step = 1.0;
            for (int ls = 0; ls < 40; ++ls) {
                std::vector<double> cand(lambda);
                bool neg = false;
                for (std::size_t t = 0; t < cand.size(); ++t) {
                    cand[t] += step * delta[t];
                    if (cand[t] < 0.0) cand[t] = 0.0;
                    if (cand[t] < 0.0) neg = true;
                }
                std::vector<double> xc = primal_from_duals(rows, work, cand, w, p, n);
                double gc = 0.0;
                for (std::size_t t = 0; t < work.size(); ++t)
                    gc = std::max(gc, std::abs(rows[work[t]].dot(xc) - 1.0));
                if (!neg && gc < gmax * (1.0 - 0.25 * step)) {
                    lambda = std::move(cand);
                    break;
                }
                step /= 2.0;
                if (ls == 39) {
                    lambda = std::move(cand);
                }
            }
        }
        if (!newton_ok) return false;
        // drop rows pinned at lambda = 0, then look for violated rows
        std::vector<int> keep;
        std::vector<double> lkeep;
        for (std::size_t t = 0; t < work.size(); ++t)
            if (lambda[t] > 1e-14) {
                keep.push_back(work[t]);
                lkeep.push_back(lambda[t]);
            }
        if (keep.empty()) {
            keep.push_back(work[0]);
            lkeep.push_back(0.0);
        }
        std::vector<double> x = primal_from_duals(rows, keep, lkeep, w, p, n);
        int worst = -1;
        double worst_v = 1.0 - tol;
        for (int i = 0; i < m; ++i) {
            double v = rows[i].dot(x);
            if (v < worst_v - 1e-15) {
                worst_v = v;
                worst = i;
            }
        }
        if (worst < 0) {
            x_out = std::move(x);
            duals_out.assign(m, 0.0);
            for (std::size_t t = 0; t < keep.size(); ++t) duals_out[keep[t]] = lkeep[t];
            active_out = keep;
            return true;
        }
        work = keep;
        work.push_back(worst);
        std::sort(work.begin(), work.end());
        work.erase(std::unique(work.begin(), work.end()), work.end());
    }
    return false;
}

/// Projected subgradient with Polyak steps for p > 1, polished by the
/// working-set KKT solve. Infeasible iterates take the exact projection
/// step onto the most violated half-space; feasible iterates descend the
/// objective toward the best dual bound seen so far.
inline SolveResult subgradient_covering(const std::vector<Row>& rows,
                                        const std::vector<double>& w, double p,
                                        const SolverOptions& opts) {
    const int m = static_cast<int>(rows.size());
    const int n = static_cast<int>(w.size());
    SolveResult res;

    double min_len = std::numeric_limits<double>::infinity();
    for (const Row& r : rows) {
        double s = 0.0;
        for (auto [i, c] : r.entries) s += c;
        min_len = std::min(min_len, s);
    }
    std::vector<double> x(n, 1.0 / min_len);  // feasible start
    auto objective = [&](const std::vector<double>& v) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += w[i] * std::pow(v[i], p);
        return acc;
    };

    std::vector<double> best_x = x;
    double best_f = objective(x);
    double dual_lb = 0.0;
    std::vector<int> active_guess;

    int t = 0;
    for (; t < opts.max_iterations; ++t) {
        int worst = 0;
        double vmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            double v = rows[i].dot(x);
            if (v < vmin) {
                vmin = v;
                worst = i;
            }
        }
        if (vmin < 1.0 - opts.feasibility_tol) {
            // Polyak step on the violated constraint = projection onto it
            double viol = 1.0 - vmin;
            double nrm = rows[worst].norm2();
            for (auto [i, c] : rows[worst].entries) x[i] += viol * c / nrm;
        } else {
            std::vector<double> scaled(x);
            if (vmin < 1.0)
                for (double& v : scaled) v /= vmin;
            double f = objective(scaled);
            if (f < best_f) {
                best_f = f;
                best_x = scaled;
            }
            double target = dual_lb > 0.0 ? dual_lb : best_f * (1.0 - 0.2 / (1.0 + t / 200.0));
            if (best_f - target <= opts.objective_tol * std::max(1.0, best_f)) break;
            std::vector<double> grad(n);
            double gn = 0.0;
            for (int i = 0; i < n; ++i) {
                grad[i] = p * w[i] * std::pow(x[i], p - 1.0);
                gn += grad[i] * grad[i];
            }
            if (gn <= 0.0) break;
            double alpha = std::max(0.0, objective(x) - target) / gn;
            for (int i = 0; i < n; ++i) x[i] = std::max(0.0, x[i] - alpha * grad[i]);
        }
        if ((t + 1) % opts.polish_every == 0 || t + 1 == opts.max_iterations) {
            active_guess.clear();
            for (int i = 0; i < m; ++i)
                if (rows[i].dot(best_x) <= 1.0 + 1e-6) active_guess.push_back(i);
            std::vector<double> px, pduals;
            std::vector<int> pactive = active_guess;
            if (kkt_polish(rows, w, p, px, pduals, pactive, opts.feasibility_tol)) {
                double pf = objective(px);
                std::vector<int> wset;
                std::vector<double> lam;
                for (int i = 0; i < m; ++i)
                    if (pduals[i] > 0.0) {
                        wset.push_back(i);
                        lam.push_back(pduals[i]);
                    }
                dual_lb = std::max(dual_lb, dual_value(rows, wset, lam, w, p, n));
                if (pf < best_f) {
                    best_f = pf;
                    best_x = px;
                    res.duals = pduals;
                    res.active = pactive;
                }
                if (best_f - dual_lb <= opts.objective_tol * std::max(1.0, best_f)) {
                    ++t;
                    break;
                }
            }
        }
    }

    res.x = best_x;
    res.value = best_f;
    res.iterations = t;
    res.dual_gap = std::max(0.0, best_f - dual_lb);
    res.min_row_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
        res.min_row_value = std::min(res.min_row_value, rows[i].dot(best_x));
    if (res.active.empty())
        for (int i = 0; i < m; ++i)
            if (rows[i].dot(best_x) <= 1.0 + 1e-6) res.active.push_back(i);
    if (res.duals.empty()) res.duals.assign(m, 0.0);
    res.converged = res.min_row_value >= 1.0 - opts.feasibility_tol &&
                    res.dual_gap <= opts.objective_tol * std::max(1.0, res.value);
    return res;
}

inline SolveResult solve_covering(const std::vector<Row>& rows, const std::vector<double>& w,
                                  double p, const SolverOptions& opts) {
    if (p == 1.0) return simplex_covering(rows, w);
    return subgradient_covering(rows, w, p, opts);
}

}  // namespace opt

/// Optimal p-modulus data: the extremal density, the modulus value, the
/// worst curve integral, and the solver certificate.
struct ModulusSolution {
    double p = 2.0;
    double value = 0.0;
    DiscreteFunction density;
    double min_curve_integral = std::numeric_limits<double>::infinity();
    int iterations = 0;
    double dual_gap = 0.0;
    bool converged = true;
    std::vector<int> active_constraints;
    std::vector<double> duals;
};

/// Mod_p of a finite curve family: minimize the weighted p-energy of a
/// nonnegative density subject to unit trapezoid mass on every curve.
inline ModulusSolution p_modulus(const MetricMeasureSpace& space, const CurveFamily& family,
                                 double p, const SolverOptions& opts = {}) {
    if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
    ModulusSolution sol;
    sol.p = p;
    sol.density = make_function(space, std::vector<double>(space.size(), 0.0));
    if (family.curves.empty()) return sol;  // empty family has modulus 0
    std::vector<opt::Row> rows;
    rows.reserve(family.curves.size());
    for (const Curve& c : family.curves) rows.push_back(opt::curve_row(c));
    opt::SolveResult res = opt::solve_covering(rows, space.weights(), p, opts);
    sol.value = res.value;
    sol.density.values = res.x;
    sol.min_curve_integral = res.min_row_value;
    sol.iterations = res.iterations;
    sol.dual_gap = res.dual_gap;
    sol.converged = res.converged;
    sol.active_constraints = res.active;
    sol.duals = res.duals;
    return sol;
}

enum class GradientMode { edge_oracle, vertex_optimized };

/// Minimal gradient data: either the exact per-edge difference quotient
/// or the vertex-valued convex-program optimum over a curve family.
struct GradientSolution {
    GradientMode mode = GradientMode::edge_oracle;
    std::vector<double> edge_values;  // edge oracle: per stored edge
    DiscreteFunction vertex_values;   // vertex mode: per point
    double objective = 0.0;           // ||g||_p in the relevant measure
    std::vector<int> binding_constraints;
    bool converged = true;
    double dual_gap = 0.0;
    int iterations = 0;
};

/// Exact minimal edge gradient g(e) = |u(a)-u(b)| / len(e); its L^p norm
/// uses the arc-length measure on edges.
inline GradientSolution minimal_upper_gradient_edge(const MetricMeasureSpace& space,
                                                    const DiscreteFunction& u, double p = 2.0) {
    if (space.mode() != MetricMode::graph_shortest_path)
        throw std::invalid_argument("edge oracle requires a graph-mode space");
    check_function(space, u);
    GradientSolution sol;
    sol.mode = GradientMode::edge_oracle;
    double acc = 0.0;
    for (const Edge& e : space.edges()) {
        double g = std::abs(u.values[e.a] - u.values[e.b]) / e.len;
        sol.edge_values.push_back(g);
        acc += std::pow(g, p) * e.len;
    }
    sol.objective = std::pow(acc, 1.0 / p);
    return sol;
}

/// Vertex values induced by an edge gradient: the max over incident
/// edges, the natural pointwise surrogate.
inline DiscreteFunction edge_gradient_to_vertices(const MetricMeasureSpace& space,
                                                  const GradientSolution& sol) {
    std::vector<double> g(space.size(), 0.0);
    for (std::size_t e = 0; e < space.edges().size(); ++e) {
        const Edge& ed = space.edges()[e];
        g[ed.a] = std::max(g[ed.a], sol.edge_values[e]);
        g[ed.b] = std::max(g[ed.b], sol.edge_values[e]);
    }
    return make_function(space, std::move(g));
}

/// Minimal vertex-valued upper gradient over the given family: minimize
/// ||g||_{L^p(mu)} subject to the trapezoid upper-gradient inequality on
/// every curve. Curves with equal endpoint values impose nothing.
inline GradientSolution minimal_upper_gradient_vertex(const MetricMeasureSpace& space,
                                                      const DiscreteFunction& u, double p,
                                                      const CurveFamily& family,
                                                      const SolverOptions& opts = {}) {
    if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
    check_function(space, u);
    GradientSolution sol;
    sol.mode = GradientMode::vertex_optimized;
    std::vector<opt::Row> rows;
    std::vector<int> row_to_curve;
    for (std::size_t i = 0; i < family.curves.size(); ++i) {
        const Curve& c = family.curves[i];
        double gap = std::abs(u.values[c.first()] - u.values[c.last()]);
        if (gap <= 0.0) continue;
        opt::Row row = opt::curve_row(c);
        for (auto& [idx, coeff] : row.entries) coeff /= gap;
        rows.push_back(std::move(row));
        row_to_curve.push_back(static_cast<int>(i));
    }
    if (rows.empty()) {
        sol.vertex_values = make_function(space, std::vector<double>(space.size(), 0.0));
        return sol;
    }
    opt::SolveResult res = opt::solve_covering(rows, space.weights(), p, opts);
    sol.vertex_values = make_function(space, res.x);
    sol.objective = std::pow(res.value, 1.0 / p);
    for (int r : res.active) sol.binding_constraints.push_back(row_to_curve[r]);
    sol.converged = res.converged;
    sol.dual_gap = res.dual_gap;
    sol.iterations = res.iterations;
    return sol;
}

/// Result of the rho-weighted shortest-path oracle between terminal sets.
struct SeparationResult {
    bool connected = false;
    bool admissible = false;  // integral >= 1 - tol certifies the whole family
    double integral = std::numeric_limits<double>::infinity();
    Curve worst;
};

/// The rho-shortest terminal-connecting path under trapezoid edge masses.
/// If even this path has integral >= 1, every terminal-connecting path
/// does, certifying admissibility of rho.
inline SeparationResult separation_oracle(const MetricMeasureSpace& space,
                                          const DiscreteFunction& rho,
                                          const std::vector<int>& sources,
                                          const std::vector<int>& sinks, double tol = 1e-8,
                                          double adjacency_scale = 0.0) {
    check_function(space, rho);
    for (double v : rho.values)
        if (v < 0.0) throw std::invalid_argument("rho must be nonnegative");
    if (sources.empty() || sinks.empty()) throw std::invalid_argument("empty terminal sets");
    for (int s : sources)
        for (int t : sinks)
            if (s == t) throw std::invalid_argument("terminal sets must be disjoint");
    auto adj = adjacency(space, adjacency_scale);
    const int n = space.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> q;
    for (int s : sources) {
        dist[s] = 0.0;
        q.emplace(0.0, s);
    }
    while (!q.empty()) {
        auto [d, v] = q.top();
        q.pop();
        if (d > dist[v]) continue;
        for (auto [w, len] : adj[v]) {
            double mass = len * (rho.values[v] + rho.values[w]) / 2.0;
            if (dist[v] + mass < dist[w] - 1e-18) {
                dist[w] = dist[v] + mass;
                parent[w] = v;
                q.emplace(dist[w], w);
            }
        }
    }
    SeparationResult res;
    int best_sink = -1;
    for (int t : sinks)
        if (dist[t] < res.integral || (dist[t] == res.integral && (best_sink < 0 || t < best_sink))) {
            res.integral = dist[t];
            best_sink = t;
        }
    if (best_sink < 0 || !std::isfinite(res.integral)) return res;  // disconnected: Mod = 0
    res.connected = true;
    std::vector<int> path;
    for (int v = best_sink; v >= 0; v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    res.worst = make_curve(space, std::move(path));
    res.admissible = res.integral >= 1.0 - tol;
    return res;
}

/// Column-generation modulus over ALL terminal-connecting paths: solve on
/// a growing family, adding the oracle's worst path until it certifies
/// admissibility. Disconnected terminals yield the Mod = 0 certificate.
struct ConnectingModulus {
    ModulusSolution solution;
    CurveFamily generated;
    bool certified = false;
    int oracle_calls = 0;
};

inline ConnectingModulus p_modulus_connecting(const MetricMeasureSpace& space,
                                              const std::vector<int>& sources,
                                              const std::vector<int>& sinks, double p,
                                              const SolverOptions& opts = {},
                                              double adjacency_scale = 0.0) {
    ConnectingModulus out;
    DiscreteFunction zero = make_function(space, std::vector<double>(space.size(), 0.0));
    SeparationResult first = separation_oracle(space, zero, sources, sinks, 1e-8, adjacency_scale);
    ++out.oracle_calls;
    if (!first.connected) {
        out.solution.p = p;
        out.solution.density = zero;
        out.solution.value = 0.0;
        out.certified = true;  // Mod = 0 certificate
        return out;
    }
    out.generated.curves.push_back(first.worst);
    for (int round = 0; round < 200; ++round) {
        out.solution = p_modulus(space, out.generated, p, opts);
        SeparationResult sep = separation_oracle(space, out.solution.density, sources, sinks,
                                                 1e-8, adjacency_scale);
        ++out.oracle_calls;
        if (sep.admissible) {
            out.certified = true;
            out.solution.min_curve_integral = std::min(out.solution.min_curve_integral, sep.integral);
            return out;
        }
        out.generated.curves.push_back(sep.worst);
    }
    return out;
}

}  // namespace nlab
