// nlab: covers, discrete gradients, modulus solves, and verification
// experiments on finite metric-measure spaces, with JSON/CSV reports.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlab/function_library.hpp"
#include "nlab/generators.hpp"
#include "nlab/report_json.hpp"
#include "nlab/space_io.hpp"

namespace {

using namespace nlab;

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string format = "json";
};

MetricMeasureSpace resolve_space(const std::string& spec) {
    if (spec.rfind("gen:", 0) != 0) return load_space(spec);
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(4));
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts.empty()) throw std::invalid_argument("empty generator spec");
    if (parts[0] == "grid1d") return grid1d(std::stoi(parts.at(1)));
    if (parts[0] == "grid2d") {
        std::string dims = parts.at(1);
        auto x = dims.find('x');
        if (x == std::string::npos) throw std::invalid_argument("grid2d wants RxC");
        return grid2d(std::stoi(dims.substr(0, x)), std::stoi(dims.substr(x + 1)));
    }
    if (parts[0] == "circle")
        return circle(std::stoi(parts.at(1)), parts.size() > 2 ? std::stod(parts[2]) : 1.0);
    throw std::invalid_argument("unknown generator '" + parts[0] + "'");
}

std::pair<int, int> parse_window(const std::string& w) {
    auto pos = w.find(':');
    if (pos == std::string::npos) throw std::invalid_argument("k-window wants a:b");
    return {std::stoi(w.substr(0, pos)), std::stoi(w.substr(pos + 1))};
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::pair<std::vector<int>, std::vector<int>> parse_terminals(const std::string& s) {
    auto pos = s.find(':');
    if (pos == std::string::npos) throw std::invalid_argument("terminals want src,..:dst,..");
    return {parse_int_list(s.substr(0, pos)), parse_int_list(s.substr(pos + 1))};
}

CurveFamily resolve_family(const MetricMeasureSpace& space, const std::string& spec,
                           const std::string& terminals, double adjacency_scale) {
    if (spec == "edges") return edge_family(space, adjacency_scale);
    if (spec.rfind("all-simple", 0) == 0 || spec.rfind("k-shortest", 0) == 0) {
        auto [src, dst] = parse_terminals(terminals);
        FamilyOptions opts;
        opts.adjacency_scale = adjacency_scale;
        auto colon = spec.find(':');
        if (spec.rfind("all-simple", 0) == 0) {
            if (colon != std::string::npos) opts.hop_limit = std::stoi(spec.substr(colon + 1));
            return enumerate_family(space, FamilyGenerator::all_simple_paths, src, dst, opts);
        }
        if (colon != std::string::npos) opts.k_shortest = std::stoi(spec.substr(colon + 1));
        return enumerate_family(space, FamilyGenerator::k_shortest, src, dst, opts);
    }
    if (spec == "grid-rows") return enumerate_family(space, FamilyGenerator::grid_rows, {}, {});
    std::ifstream in(spec);
    if (!in) throw std::invalid_argument("cannot open family file: " + spec);
    nlohmann::json j;
    in >> j;
    return family_from_json(space, j);
}

void emit(const GlobalOptions& g, const std::string& name, const ordered_json& j) {
    std::filesystem::path path = std::filesystem::path(g.out_dir) / (name + ".json");
    write_report(path, j);
    std::cout << path.string() << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"finite metric-measure space toolkit: dyadic ball covers, discrete "
                 "gradients, p-modulus, and verification experiments"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--seed", g.seed, "seed for all randomized steps");
    app.add_option("--out-dir", g.out_dir, "directory for report files");
    app.add_option("--format", g.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

    std::string space_spec, function_spec = "linear", gradient_spec, family_spec = "edges";
    std::string window_spec = "0:6", terminals, epsilon_spec = "0.25,0.5,1.0,1.5";
    std::string seeds_spec = "1,2,3";
    double p = 2.0, q = 1.5, lambda = 2.0, tolerance = 0.10, adjacency_scale = 0.0;
    int trailing = 3, k_fixed = 2, pairs = 10000, trials = 10000, samples = 0;
    bool dump_covers = false;

    auto add_space = [&](CLI::App* cmd) {
        cmd->add_option("--space", space_spec, "space file or gen:grid1d:N | gen:grid2d:RxC | gen:circle:N[:R]")
            ->required();
        cmd->add_option("--adjacency-scale", adjacency_scale,
                        "edge scale for non-graph spaces (path enumeration)");
    };

    CLI::App* cover = app.add_subcommand("cover", "build and validate covers over a k-window");
    add_space(cover);
    cover->add_option("--k-window", window_spec, "generations a:b");
    cover->add_flag("--dump", dump_covers, "write one cover dump per generation");

    CLI::App* nstar = app.add_subcommand("norm-star", "equivalent-norm report for a function");
    add_space(nstar);
    nstar->add_option("--function", function_spec, "named form or file:path");
    nstar->add_option("--p", p);
    nstar->add_option("--k-window", window_spec);
    nstar->add_option("--trailing", trailing);

    CLI::App* modulus = app.add_subcommand("modulus", "p-modulus solves");
    CLI::App* msolve = modulus->add_subcommand("solve", "solve Mod_p of a curve family");
    add_space(msolve);
    msolve->add_option("--family", family_spec,
                       "family file, 'edges', 'all-simple[:hops]', 'k-shortest[:K]'");
    msolve->add_option("--terminals", terminals, "src,..:dst,.. (for generators / column generation)");
    msolve->add_option("--p", p);
    bool column_generation = false;
    msolve->add_flag("--column-generation", column_generation,
                     "generate the family from the separation oracle");

    CLI::App* curves_cmd = app.add_subcommand("curves", "curve-family slack checks");
    CLI::App* check_ug = curves_cmd->add_subcommand("check-ug", "upper-gradient slacks");
    add_space(check_ug);
    check_ug->add_option("--function", function_spec);
    check_ug->add_option("--gradient", gradient_spec,
                         "named form, file:path, or 'edge-oracle'");
    check_ug->add_option("--family", family_spec);
    check_ug->add_option("--terminals", terminals);
    CLI::App* check_sk = curves_cmd->add_subcommand("check-sk", "averaged-chain slacks");
    add_space(check_sk);
    check_sk->add_option("--function", function_spec);
    check_sk->add_option("--k", k_fixed);
    check_sk->add_option("--p", p);
    check_sk->add_option("--family", family_spec);
    check_sk->add_option("--terminals", terminals);

    CLI::App* poincare = app.add_subcommand("poincare", "Poincare ratio sweep");
    add_space(poincare);
    poincare->add_option("--function", function_spec);
    poincare->add_option("--gradient", gradient_spec, "defaults to the edge oracle");
    poincare->add_option("--p", p);
    poincare->add_option("--lambda", lambda);
    poincare->add_option("--samples", samples, "0 = all admissible ladder balls");

    CLI::App* verify = app.add_subcommand("verify", "theorem-level experiments");
    verify->require_subcommand(1);
    CLI::App* veq = verify->add_subcommand("equivalence", "norm comparability against the edge oracle");
    add_space(veq);
    veq->add_option("--function", function_spec);
    veq->add_option("--p", p);
    veq->add_option("--k-window", window_spec);
    veq->add_option("--trailing", trailing);
    veq->add_option("--tol", tolerance);
    CLI::App* vpt = verify->add_subcommand("pointwise", "pointwise gradient comparison");
    add_space(vpt);
    vpt->add_option("--function", function_spec);
    vpt->add_option("--q", q);
    vpt->add_option("--p", p);
    vpt->add_option("--k-window", window_spec);
    vpt->add_option("--trailing", trailing);
    CLI::App* vcx = verify->add_subcommand("convexity", "product-norm convexity probe");
    add_space(vcx);
    vcx->add_option("--p", p);
    vcx->add_option("--k", k_fixed);
    vcx->add_option("--pairs", pairs);
    vcx->add_option("--epsilon-grid", epsilon_spec);
    CLI::App* vau = verify->add_subcommand("almostug", "randomized chain-inequality trials");
    add_space(vau);
    vau->add_option("--k-window", window_spec);
    vau->add_option("--trials", trials);
    vau->add_option("--p", p);
    CLI::App* vcc = verify->add_subcommand("cross-cover", "cover-choice sensitivity of the norm");
    add_space(vcc);
    vcc->add_option("--function", function_spec);
    vcc->add_option("--p", p);
    vcc->add_option("--k-window", window_spec);
    vcc->add_option("--trailing", trailing);
    vcc->add_option("--seeds", seeds_spec, "comma-separated traversal seeds");
    vcc->add_option("--tol", tolerance);

    // let global flags appear after any subcommand
    std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* cmd) {
        cmd->fallthrough();
        for (CLI::App* sub : cmd->get_subcommands({})) enable_fallthrough(sub);
    };
    for (CLI::App* sub : app.get_subcommands({})) enable_fallthrough(sub);

    CLI11_PARSE(app, argc, argv);

    auto gradient_of = [&](const MetricMeasureSpace& space, const DiscreteFunction& u) {
        if (gradient_spec.empty() || gradient_spec == "edge-oracle")
            return edge_gradient_to_vertices(space, minimal_upper_gradient_edge(space, u, p));
        return make_named_function(space, gradient_spec);
    };

    if (cover->parsed()) {
        MetricMeasureSpace space = resolve_space(space_spec);
        auto [k_lo, k_hi] = parse_window(window_spec);
        ordered_json summary;
        summary["schema_version"] = 1;
        summary["space_points"] = space.size();
        bool all_ok = true;
        ordered_json per_k = ordered_json::array();
        for (int k = k_lo; k <= k_hi; ++k) {
            BallCover c = build_cover(space, k, g.seed);
            CoverReport rep = validate_cover(space, c);
            all_ok = all_ok && rep.all_pass();
            ordered_json e;
            e["k"] = k;
            e["balls"] = c.ball_count();
            e["N_k"] = c.padded_arity;
            e["validation"] = cover_report_to_json(rep);
            per_k.push_back(std::move(e));
            if (dump_covers) emit(g, "cover_k" + std::to_string(k), cover_to_json(c));
        }
        summary["per_k"] = std::move(per_k);
        summary["all_pass"] = all_ok;
        emit(g, "cover_summary", summary);
        return all_ok ? 0 : 1;
    }
    if (nstar->parsed()) {
        MetricMeasureSpace space = resolve_space(space_spec);
        DiscreteFunction u = make_named_function(space, function_spec);
        auto [k_lo, k_hi] = parse_window(window_spec);
        NormStarOptions opts;
        opts.trailing = trailing;
        opts.cover_seed = g.seed;
        NormStarReport rep = norm_star(space, u, p, k_lo, k_hi, opts);
        emit(g, "norm_star", norm_star_to_json(rep));
        if (g.format == "csv") {
            std::filesystem::path csv = std::filesystem::path(g.out_dir) / "norm_star_per_k.csv";
            write_report(csv, norm_star_to_csv(rep));
            std::cout << csv.string() << "\n";
        }
        return 0;
    }
    if (msolve->parsed()) {
        MetricMeasureSpace space = resolve_space(space_spec);
        if (column_generation) {
            auto [src, dst] = parse_terminals(terminals);
            ConnectingModulus cm =
                p_modulus_connecting(space, src, dst, p, {}, adjacency_scale);
            ordered_json j = modulus_to_json(cm.solution);
            j["certified"] = cm.certified;
            j["oracle_calls"] = cm.oracle_calls;
            j["family"] = family_to_json(cm.generated);
            emit(g, "modulus", j);
            return cm.certified ? 0 : 1;
        }
        CurveFamily family = resolve_family(space, family_spec, terminals, adjacency_scale);
        ModulusSolution sol = p_modulus(space, family, p);
        emit(g, "modulus", modulus_to_json(sol));
        return sol.converged ? 0 : 1;
    }
    if (check_ug->parsed()) {
        MetricMeasureSpace space = resolve_space(space_spec);
        DiscreteFunction u = make_named_function(space, function_spec);
        DiscreteFunction grad = gradient_of(space, u);
        CurveFamily family = resolve_family(space, family_spec, terminals, adjacency_scale);
        SlackReport rep = check_upper_gradient(space, u, grad, family);
        emit(g, "ug_slack", slack_report_to_json(rep));
        return rep.violations == 0 ? 0 : 1;
    }
    if (check_sk->parsed()) {
        MetricMeasureSpace space = resolve_space(space_spec);
        DiscreteFunction u = make_named_function(space, function_spec);
        CurveFamily family = resolve_family(space, family_spec, terminals, adjacency_scale);
        BallCover c = build_cover(space, k_fixed, g.seed);
        SlackReport rep = check_S_k_inequality(space, u, c, p, family);
        emit(g, "sk_slack", slack_report_to_json(rep));
        return rep.violations == 0 ? 0 : 1;
    }
    if (poincare->parsed()) {
        MetricMeasureSpace space = resolve_space(space_spec);
        DiscreteFunction u = make_named_function(space, function_spec);
        DiscreteFunction grad = gradient_of(space, u);
        std::vector<BallSpec> balls =
            samples > 0 ? sampled_balls(space, samples, g.seed) : admissible_ladder_balls(space);
        PoincareReport rep = poincare_sweep(space, u, grad, p, lambda, balls);
        emit(g, "poincare", poincare_to_json(rep));
        return rep.unbounded ? 1 : 0;
    }
    if (veq->parsed()) {
        MetricMeasureSpace space = resolve_space(space_spec);
        DiscreteFunction u = make_named_function(space, function_spec);
        auto [k_lo, k_hi] = parse_window(window_spec);
        EquivalenceReport rep =
            equivalence_experiment(space, u, function_spec, p, k_lo, k_hi, trailing, tolerance);
        emit(g, "equivalence", equivalence_to_json(rep));
        return rep.pass == PassFlag::pass ? 0 : 1;
    }
    if (vpt->parsed()) {
        MetricMeasureSpace space = resolve_space(space_spec);
        DiscreteFunction u = make_named_function(space, function_spec);
        auto [k_lo, k_hi] = parse_window(window_spec);
        PointwiseReport rep = pointwise_experiment(space, u, q, p, k_lo, k_hi, trailing);
        emit(g, "pointwise", pointwise_to_json(rep));
        bool ok = rep.failure_points == 0 && rep.domination_holds;
        return ok ? 0 : 1;
    }
    if (vcx->parsed()) {
        MetricMeasureSpace space = resolve_space(space_spec);
        std::vector<double> eps;
        {
            std::stringstream ss(epsilon_spec);
            std::string tok;
            while (std::getline(ss, tok, ',')) eps.push_back(std::stod(tok));
        }
        ConvexityReport rep = convexity_probe(space, p, k_fixed, pairs, eps, g.seed);
        emit(g, "convexity", convexity_to_json(rep));
        if (p == 1.0) return rep.max_midpoint_norm >= 1.0 - 1e-12 ? 0 : 1;
        return rep.counterexamples == 0 ? 0 : 1;
    }
    if (vau->parsed()) {
        MetricMeasureSpace space = resolve_space(space_spec);
        auto [k_lo, k_hi] = parse_window(window_spec);
        AlmostugReport rep =
            almostug_experiment(space, k_lo, k_hi, trials, g.seed, p, adjacency_scale);
        emit(g, "almostug", almostug_to_json(rep));
        return rep.violations == 0 ? 0 : 1;
    }
    if (vcc->parsed()) {
        MetricMeasureSpace space = resolve_space(space_spec);
        DiscreteFunction u = make_named_function(space, function_spec);
        auto [k_lo, k_hi] = parse_window(window_spec);
        std::vector<std::uint64_t> seeds;
        {
            std::stringstream ss(seeds_spec);
            std::string tok;
            while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
        }
        CrossCoverReport rep =
            cross_cover_experiment(space, u, p, k_lo, k_hi, seeds, trailing, tolerance);
        emit(g, "cross_cover", cross_cover_to_json(rep));
        return rep.pass == PassFlag::pass ? 0 : 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
