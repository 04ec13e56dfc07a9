#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nlab/cover.hpp"
#include "nlab/parallel.hpp"
#include "nlab/space.hpp"

namespace nlab {

/// Discretized averaging operator: S_k u(x) = u_{B[x]}.
inline DiscreteFunction S_k(const MetricMeasureSpace& space, const DiscreteFunction& u,
                            const BallCover& cover) {
    check_function(space, u);
    std::vector<double> avg(cover.ball_count());
    for (int i = 0; i < cover.ball_count(); ++i) avg[i] = ball_average(space, u, cover.members[i]);
    std::vector<double> out(space.size());
    for (int x = 0; x < space.size(); ++x) out[x] = avg[cover.cell_of[x]];
    return make_function(space, std::move(out));
}

/// The vector field T_k u of scaled ball-average differences. Vectors are
/// constant on each cell; padded components are exactly zero. The stored
/// pointwise norm is 2^k (sum_j |u_B[x] - u_B[x,j]|^p)^(1/p).
struct TkField {
    int k = 0;
    double p = 2.0;
    double scale = 1.0;  // 2^k
    int arity = 0;       // N_k
    std::uint64_t space_id = 0;
    std::vector<double> ball_avg;                  // u_{B_i}
    std::vector<std::vector<double>> ball_vectors;  // per ball, length N_k
    std::vector<double> ball_norm;                 // |T_k u|_p per ball
    std::vector<int> cell_of;

    const std::vector<double>& vector_at(int x) const { return ball_vectors[cell_of[x]]; }
    double norm_at(int x) const { return ball_norm[cell_of[x]]; }

    /// Pointwise norm recomputed with a different component exponent.
    double norm_at_q(int x, double q) const {
        const auto& v = ball_vectors[cell_of[x]];
        double acc = 0.0;
        for (double c : v) acc += std::pow(std::abs(c), q);
        return std::pow(acc, 1.0 / q);
    }
};

inline TkField T_k(const MetricMeasureSpace& space, const DiscreteFunction& u,
                   const BallCover& cover, double p) {
    check_function(space, u);
    if (cover.space_id != space.id()) throw std::invalid_argument("cover built on another space");
    if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
    TkField f;
    f.k = cover.k;
    f.p = p;
    f.scale = std::ldexp(1.0, cover.k);
    f.arity = cover.padded_arity;
    f.space_id = space.id();
    f.cell_of = cover.cell_of;
    const int m = cover.ball_count();
    f.ball_avg.resize(m);
    for (int i = 0; i < m; ++i) f.ball_avg[i] = ball_average(space, u, cover.members[i]);
    f.ball_vectors.assign(m, std::vector<double>(f.arity, 0.0));
    f.ball_norm.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
        const auto& nbrs = cover.neighbor_lists[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < nbrs.size(); ++j) {
            double diff = f.scale * (f.ball_avg[i] - f.ball_avg[nbrs[j]]);
            f.ball_vectors[i][j] = diff;
            acc += std::pow(std::abs(diff), p);
        }
        f.ball_norm[i] = std::pow(acc, 1.0 / p);
    }
    return f;
}

/// |T_k u|_p materialized as a function on points.
inline DiscreteFunction pointwise_norm(const MetricMeasureSpace& space, const TkField& field) {
    std::vector<double> out(space.size());
    for (int x = 0; x < space.size(); ++x) out[x] = field.norm_at(x);
    return make_function(space, std::move(out));
}

/// || |T_k u|_p ||_{L^p(mu)} without materializing the point function.
inline double field_lp_norm(const MetricMeasureSpace& space, const TkField& field) {
    double acc = 0.0;
    for (int x = 0; x < space.size(); ++x)
        acc += std::pow(field.norm_at(x), field.p) * space.weight(x);
    return std::pow(acc, 1.0 / field.p);
}

struct NormStarOptions {
    int trailing = 3;
    double plateau_tol = 0.20;
    int min_plateau_generations = 3;
    std::uint64_t cover_seed = 0;
};

struct NormStarReport {
    double p = 2.0;
    std::vector<std::pair<int, double>> per_k;  // (k, || |T_k u|_p ||_Lp)
    std::vector<int> clipped_k;                 // generations dropped by the resolution guard
    int trailing = 0;
    double u_norm = 0.0;
    double limsup_estimate = 0.0;
    double liminf_estimate = 0.0;
    double xi_observed = 1.0;
    double norm_star = 0.0;
    int plateau_lo = 0;
    int plateau_hi = 0;
    bool plateau_found = false;
    double plateau_tol = 0.20;
};

/// The equivalent-norm estimate at a finite window: the k -> infinity
/// limsup is realized as the max over a trailing sub-window, with the
/// window clipped where 2^-k drops below 4x the space resolution.
inline NormStarReport norm_star(const MetricMeasureSpace& space, const DiscreteFunction& u,
                                double p, int k_lo, int k_hi,
                                const NormStarOptions& opts = {}) {
    check_function(space, u);
    if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
    if (k_hi < k_lo) throw std::invalid_argument("empty k window");
    NormStarReport report;
    report.p = p;
    report.plateau_tol = opts.plateau_tol;

    double guard = 4.0 * space.resolution();
    std::vector<int> ks;
    for (int k = k_lo; k <= k_hi; ++k) {
        if (space.resolution() > 0.0 && std::ldexp(1.0, -k) < guard)
            report.clipped_k.push_back(k);
        else
            ks.push_back(k);
    }
    if (ks.empty()) throw std::invalid_argument("k window empty after resolution clipping");

    std::vector<double> vals(ks.size());
    parallel_for(ks.size(), [&](std::size_t i) {
        BallCover cover = build_cover(space, ks[i], opts.cover_seed);
        TkField field = T_k(space, u, cover, p);
        vals[i] = field_lp_norm(space, field);
    });
    for (std::size_t i = 0; i < ks.size(); ++i) report.per_k.emplace_back(ks[i], vals[i]);

    int trailing = std::min<int>(std::max(1, opts.trailing), static_cast<int>(ks.size()));
    report.trailing = trailing;
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = ks.size() - trailing; i < ks.size(); ++i) {
        hi = std::max(hi, vals[i]);
        lo = std::min(lo, vals[i]);
    }
    report.limsup_estimate = hi;
    report.liminf_estimate = lo;
    report.xi_observed = lo > 0.0 ? hi / lo : (hi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    report.u_norm = lp_norm(space, u, p);
    report.norm_star = std::pow(std::pow(report.u_norm, p) + std::pow(hi, p), 1.0 / p);

    // longest run of successive values varying at most plateau_tol; latest wins ties
    std::size_t best_lo = 0, best_len = 1, run_lo = 0;
    for (std::size_t i = 1; i < vals.size(); ++i) {
        double denom = std::max(vals[i - 1], vals[i]);
        bool flat = std::abs(vals[i] - vals[i - 1]) <= opts.plateau_tol * denom;
        if (!flat) run_lo = i;
        if (i - run_lo + 1 >= best_len) {
            best_len = i - run_lo + 1;
            best_lo = run_lo;
        }
    }
    report.plateau_lo = ks[best_lo];
    report.plateau_hi = ks[best_lo + best_len - 1];
    report.plateau_found = static_cast<int>(best_len) >= opts.min_plateau_generations;
    return report;
}

}  // namespace nlab
