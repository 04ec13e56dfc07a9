#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "nlab/cover.hpp"
#include "nlab/curves.hpp"
#include "nlab/gradient.hpp"
#include "nlab/modulus.hpp"
#include "nlab/verify.hpp"

namespace nlab {

using ordered_json = nlohmann::ordered_json;

/// JSON cannot carry IEEE specials; reports encode them as null.
inline ordered_json json_real(double v) {
    if (std::isnan(v) || std::isinf(v)) return nullptr;
    return v;
}

inline const char* to_string(PassFlag f) {
    switch (f) {
        case PassFlag::pass: return "pass";
        case PassFlag::fail: return "fail";
        default: return "indeterminate";
    }
}

inline ordered_json cover_to_json(const BallCover& cover) {
    ordered_json j;
    j["schema_version"] = 1;
    j["k"] = cover.k;
    j["radius"] = cover.radius;
    j["centers"] = cover.centers;
    j["members"] = cover.members;
    j["cells"] = cover.cells;
    j["neighbors"] = cover.neighbor_lists;
    j["N_k"] = cover.padded_arity;
    return j;
}

inline ordered_json cover_report_to_json(const CoverReport& report) {
    ordered_json j;
    j["schema_version"] = 1;
    j["all_pass"] = report.all_pass();
    ordered_json checks = ordered_json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"witness", c.witness}});
    j["checks"] = std::move(checks);
    return j;
}

inline ordered_json norm_star_to_json(const NormStarReport& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["p"] = r.p;
    ordered_json per_k = ordered_json::array();
    for (auto [k, v] : r.per_k) per_k.push_back({{"k", k}, {"value", v}});
    j["per_k"] = std::move(per_k);
    j["clipped_k"] = r.clipped_k;
    j["trailing"] = r.trailing;
    j["u_norm"] = r.u_norm;
    j["limsup_estimate"] = r.limsup_estimate;
    j["liminf_estimate"] = r.liminf_estimate;
    j["xi_observed"] = json_real(r.xi_observed);
    j["norm_star"] = r.norm_star;
    j["plateau_window"] = {{"k_lo", r.plateau_lo}, {"k_hi", r.plateau_hi}};
    j["plateau_found"] = r.plateau_found;
    j["plateau_tolerance"] = r.plateau_tol;
    return j;
}

inline std::string norm_star_to_csv(const NormStarReport& r) {
    std::string out = "k,value\n";
    for (auto [k, v] : r.per_k) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%d,%.17g\n", k, v);
        out += buf;
    }
    return out;
}

inline ordered_json slack_report_to_json(const SlackReport& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["checked"] = r.checked;
    j["violations"] = r.violations;
    j["skipped"] = r.skipped;
    j["min_slack"] = json_real(r.min_slack);
    j["violating_curves"] = r.violating;
    j["tolerance"] = r.tolerance;
    ordered_json slacks = ordered_json::array();
    for (double s : r.slacks) slacks.push_back(json_real(s));
    j["slacks"] = std::move(slacks);
    return j;
}

inline ordered_json modulus_to_json(const ModulusSolution& s) {
    ordered_json j;
    j["schema_version"] = 1;
    j["p"] = s.p;
    j["value"] = s.value;
    j["min_curve_integral"] = json_real(s.min_curve_integral);
    j["iterations"] = s.iterations;
    j["dual_gap"] = s.dual_gap;
    j["converged"] = s.converged;
    j["active_constraints"] = s.active_constraints;
    j["duals"] = s.duals;
    j["density"] = s.density.values;
    return j;
}

inline ordered_json gradient_to_json(const GradientSolution& s) {
    ordered_json j;
    j["schema_version"] = 1;
    j["mode"] = s.mode == GradientMode::edge_oracle ? "edge-oracle" : "vertex-optimized";
    j["objective"] = s.objective;
    j["converged"] = s.converged;
    j["dual_gap"] = s.dual_gap;
    j["binding_constraints"] = s.binding_constraints;
    if (s.mode == GradientMode::edge_oracle)
        j["edge_values"] = s.edge_values;
    else
        j["vertex_values"] = s.vertex_values.values;
    return j;
}

inline ordered_json doubling_to_json(const DoublingStats& s) {
    ordered_json j;
    j["schema_version"] = 1;
    j["C_d_estimate"] = s.C_d_estimate;
    j["C_0_estimate"] = s.C_0_estimate;
    j["N_max"] = s.N_max;
    ordered_json log = ordered_json::array();
    for (auto [c, r, ratio] : s.sample_log)
        log.push_back({{"center", c}, {"radius", r}, {"ratio", ratio}});
    j["sample_log"] = std::move(log);
    return j;
}

inline ordered_json poincare_to_json(const PoincareReport& r, bool with_balls = true) {
    ordered_json j;
    j["schema_version"] = 1;
    j["p"] = r.p;
    j["lambda"] = r.lambda;
    j["c_PI_estimate"] = r.unbounded ? ordered_json(nullptr) : json_real(r.c_PI_estimate);
    j["unbounded"] = r.unbounded;
    j["balls_checked"] = r.balls_checked;
    j["balls_skipped"] = r.balls_skipped;
    if (with_balls) {
        ordered_json balls = ordered_json::array();
        for (const auto& e : r.per_ball)
            balls.push_back({{"center", e.center},
                             {"radius", e.radius},
                             {"lhs", e.lhs},
                             {"rhs_without_c", e.rhs_without_c}});
        j["per_ball"] = std::move(balls);
    }
    return j;
}

inline ordered_json tk_bound_to_json(const TkBoundReport& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["p"] = r.p;
    j["lambda"] = r.lambda;
    j["k_window"] = {{"k_lo", r.k_lo}, {"k_hi", r.k_hi}};
    j["c_PI"] = r.c_PI;
    j["c_PI_unbounded"] = r.c_PI_unbounded;
    j["chain_constant"] = r.chain_constant;
    j["C"] = r.C;
    j["N_k"] = r.N_k;
    j["violations"] = r.violations;
    j["max_excess"] = json_real(r.max_excess);
    return j;
}

inline ordered_json equivalence_to_json(const EquivalenceReport& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["u"] = r.u_descriptor;
    j["p"] = r.p;
    j["g_norm"] = r.g_norm;
    j["limsup_estimate"] = r.limsup_estimate;
    j["lower_ratio"] = r.lower_ratio;
    j["upper_ratio"] = r.upper_ratio;
    j["window"] = {{"k_lo", r.window_lo}, {"k_hi", r.window_hi}};
    j["trailing"] = r.trailing;
    j["tolerance"] = r.tolerance;
    j["plateau_found"] = r.plateau_found;
    j["pass_lower"] = to_string(r.pass_lower);
    j["pass"] = to_string(r.pass);
    j["norm_star"] = norm_star_to_json(r.norm_report);
    return j;
}

inline ordered_json pointwise_to_json(const PointwiseReport& r, bool with_points = true) {
    ordered_json j;
    j["schema_version"] = 1;
    j["p"] = r.p;
    j["q"] = r.q;
    j["window"] = {{"k_lo", r.window_lo}, {"k_hi", r.window_hi}};
    j["trailing"] = r.trailing;
    j["interior_margin"] = r.interior_margin;
    j["interior_points"] = r.interior_points;
    j["vacuous_points"] = r.vacuous_points;
    j["failure_points"] = r.failure_points;
    j["failures"] = r.failures;
    j["quantiles"] = {{"q05", r.quantile05},
                      {"q25", r.quantile25},
                      {"q50", r.quantile50},
                      {"q75", r.quantile75},
                      {"q95", r.quantile95}};
    j["C_used"] = r.C_used;
    j["C_used_l1"] = r.C_used_l1;
    j["fraction_within_C"] = r.fraction_within_C;
    j["domination_constant"] = r.domination_constant_lp;
    j["domination_constant_l1"] = r.domination_constant_l1;
    j["domination_holds"] = r.domination_holds;
    if (with_points) {
        ordered_json lp = ordered_json::array(), l1 = ordered_json::array();
        for (double v : r.ratio_lp) lp.push_back(json_real(v));
        for (double v : r.ratio_l1) l1.push_back(json_real(v));
        j["ratio_lp"] = std::move(lp);
        j["ratio_l1"] = std::move(l1);
        j["interior"] = ordered_json::array();
        for (char c : r.interior) j["interior"].push_back(static_cast<bool>(c));
    }
    return j;
}

inline ordered_json convexity_to_json(const ConvexityReport& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["p"] = r.p;
    j["k"] = r.k;
    j["pairs"] = r.pairs;
    j["epsilon_grid"] = r.epsilon_grid;
    ordered_json obs = ordered_json::array();
    for (double v : r.delta_observed) obs.push_back(json_real(v));
    j["delta_observed"] = std::move(obs);
    j["delta_analytic"] = r.delta_analytic;
    j["counterexamples"] = r.counterexamples;
    j["counterexample_pairs"] = r.counterexample_pairs;
    j["max_midpoint_norm"] = r.max_midpoint_norm;
    j["worst_margin"] = json_real(r.worst_margin);
    return j;
}

inline ordered_json almostug_to_json(const AlmostugReport& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["p"] = r.p;
    j["trials"] = r.trials;
    j["violations"] = r.violations;
    j["skipped"] = r.skipped;
    j["min_slack"] = json_real(r.min_slack);
    j["k_values"] = r.ks;
    return j;
}

inline ordered_json cross_cover_to_json(const CrossCoverReport& r) {
    ordered_json j;
    j["schema_version"] = 1;
    j["p"] = r.p;
    j["seeds"] = r.seeds;
    j["limsups"] = r.limsups;
    j["norm_stars"] = r.norm_stars;
    ordered_json xis = ordered_json::array();
    for (double x : r.xis) xis.push_back(json_real(x));
    j["xis"] = std::move(xis);
    j["relative_spread"] = r.relative_spread;
    j["tolerance"] = r.tolerance;
    j["pass"] = to_string(r.pass);
    return j;
}

inline ordered_json family_to_json(const CurveFamily& family) {
    ordered_json j = ordered_json::array();
    for (const Curve& c : family.curves) j.push_back(c.vertices);
    return j;
}

inline CurveFamily family_from_json(const MetricMeasureSpace& space, const nlohmann::json& j) {
    CurveFamily family;
    const nlohmann::json& list = j.is_object() && j.contains("curves") ? j.at("curves") : j;
    for (const auto& seq : list)
        family.curves.push_back(make_curve(space, seq.get<std::vector<int>>()));
    return family;
}

/// Atomic report write: temp file in the target directory, then rename.
inline void write_report(const std::filesystem::path& path, const std::string& payload) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << payload;
    }
    std::filesystem::rename(tmp, path);
}

inline void write_report(const std::filesystem::path& path, const ordered_json& j) {
    write_report(path, j.dump(2) + "\n");
}

}  // namespace nlab
