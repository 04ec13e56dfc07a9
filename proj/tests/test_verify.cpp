#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "nlab/generators.hpp"
#include "nlab/verify.hpp"

using namespace nlab;

TEST_CASE("poincare sweep on constant and linear data") {
    MetricMeasureSpace g = grid1d(256);
    DiscreteFunction c = make_named_function(g, "const:2");
    DiscreteFunction one = make_named_function(g, "const:1");
    PoincareReport rc = poincare_sweep(g, c, one, 2.0, 2.0, all_ladder_balls(g));
    REQUIRE(rc.c_PI_estimate == Catch::Approx(0.0));
    REQUIRE_FALSE(rc.unbounded);

    DiscreteFunction u = make_named_function(g, "linear");
    PoincareReport ru = poincare_sweep(g, u, one, 2.0, 2.0, admissible_ladder_balls(g));
    REQUIRE(ru.c_PI_estimate > 0.0);
    REQUIRE(std::isfinite(ru.c_PI_estimate));
    // stability of the per-radius worst ratio across dyadic radii
    std::map<double, double> per_radius;
    for (const auto& e : ru.per_ball)
        if (e.rhs_without_c > 0.0)
            per_radius[e.radius] = std::max(per_radius[e.radius], e.lhs / e.rhs_without_c);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (auto& [r, v] : per_radius) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    REQUIRE(hi / lo <= 1.5);

    // degenerate: g = 0 under a nonconstant u is reported, not hidden
    DiscreteFunction zero = make_named_function(g, "const:0");
    PoincareReport rz = poincare_sweep(g, u, zero, 2.0, 2.0, all_ladder_balls(g));
    REQUIRE(rz.unbounded);

    // skipped balls are exactly the both-zero ones
    PoincareReport rcz = poincare_sweep(g, c, zero, 2.0, 2.0, all_ladder_balls(g));
    REQUIRE(rcz.balls_skipped == static_cast<int>(rcz.per_ball.size()));
}

TEST_CASE("Tk bound check against the measured Poincare constant") {
    MetricMeasureSpace g = grid1d(128);
    DiscreteFunction u = make_named_function(g, "linear");
    DiscreteFunction one = make_named_function(g, "const:1");
    auto [k_lo, k_hi] = admissible_k_window(g);
    TkBoundReport rep = tk_poincare_bound_check(g, u, one, 2.0, 2.0, k_lo, k_hi);
    REQUIRE(rep.violations == 0);
    REQUIRE(rep.max_excess <= 1e-9);
    REQUIRE(std::isfinite(rep.C));
    REQUIRE(rep.C > 0.0);

    DiscreteFunction c = make_named_function(g, "const:5");
    TkBoundReport rc = tk_poincare_bound_check(g, c, one, 2.0, 2.0, k_lo, k_hi);
    REQUIRE(rc.violations == 0);

    DiscreteFunction zero = make_named_function(g, "const:0");
    TkBoundReport bad = tk_poincare_bound_check(g, u, zero, 2.0, 2.0, k_lo, k_hi);
    REQUIRE(bad.violations > 0);
}

TEST_CASE("equivalence experiment") {
    MetricMeasureSpace g = grid1d(256);
    DiscreteFunction c = make_named_function(g, "const:3");
    EquivalenceReport rc = equivalence_experiment(g, c, "const:3", 2.0, 1, 5, 3);
    REQUIRE(rc.pass_lower == PassFlag::pass);
    REQUIRE(rc.g_norm == Catch::Approx(0.0));

    DiscreteFunction u = make_named_function(g, "linear");
    EquivalenceReport ru = equivalence_experiment(g, u, "linear", 2.0, 1, 5, 3);
    REQUIRE(ru.g_norm == Catch::Approx(1.0));
    REQUIRE(ru.lower_ratio >= 0.25 * 0.9);
    REQUIRE(ru.pass == PassFlag::pass);
    REQUIRE(std::isfinite(ru.upper_ratio));

    DiscreteFunction a = make_named_function(g, "abs:0.5");
    EquivalenceReport ra = equivalence_experiment(g, a, "abs:0.5", 1.5, 1, 5, 3);
    REQUIRE(ra.pass_lower == PassFlag::pass);
}

TEST_CASE("pointwise experiment on the linear function") {
    MetricMeasureSpace g = grid1d(512);
    DiscreteFunction u = make_named_function(g, "linear");
    REQUIRE_THROWS_AS(pointwise_experiment(g, u, 2.0, 2.0, 1, 5, 3), std::invalid_argument);

    PointwiseReport rep = pointwise_experiment(g, u, 1.5, 2.0, 2, 7, 3);
    REQUIRE(rep.failure_points == 0);
    REQUIRE(rep.interior_points > 250);
    REQUIRE(rep.C_used <= 10.0);
    REQUIRE(rep.fraction_within_C >= 0.95);
    REQUIRE(rep.domination_holds);
    REQUIRE(std::isfinite(rep.domination_constant_lp));
    REQUIRE(std::isfinite(rep.domination_constant_l1));
    // the l1 route carries the same information up to norm equivalence
    REQUIRE(rep.C_used_l1 >= rep.C_used);

    DiscreteFunction c = make_named_function(g, "const:1");
    PointwiseReport rc = pointwise_experiment(g, c, 1.5, 2.0, 1, 6, 3);
    REQUIRE(rc.vacuous_points == g.size());
    REQUIRE(rc.failure_points == 0);
}

TEST_CASE("pointwise experiment isolates a jump") {
    MetricMeasureSpace g = grid1d(16);
    DiscreteFunction u = make_named_function(g, "jump:0.5");
    PointwiseReport rep = pointwise_experiment(g, u, 1.5, 2.0, 0, 2, 2);
    // the sharp edge sits between coordinates 7/15 and 8/15
    double jump_at = 0.5;
    double reach = 3.0 * std::ldexp(1.0, -1);  // neighbor reach at the coarsest trailing k
    for (int x : rep.failures) {
        double d = std::abs(g.coords()[x][0] - jump_at);
        REQUIRE(d <= reach);
    }
    // far from the jump everything is vacuous: numerator and gradient both zero
    REQUIRE(rep.vacuous_points == 0);  // n=16 is small; every cell sees the jump at k<=2
}

TEST_CASE("convexity probe finds no counterexample at p=2") {
    MetricMeasureSpace g = grid1d(32);
    std::vector<double> eps = {0.1, 0.5, 1.0, 1.5};
    ConvexityReport rep = convexity_probe(g, 2.0, 2, 500, eps, 99);
    REQUIRE(rep.pairs > 400);
    REQUIRE(rep.counterexamples == 0);
    REQUIRE(rep.worst_margin >= 0.0);
    // parallelogram identity makes the bound exactly tight at p=2
    REQUIRE(rep.worst_margin <= 1e-6);
    for (std::size_t e = 0; e < eps.size(); ++e)
        if (!std::isnan(rep.delta_observed[e]))
            REQUIRE(rep.delta_observed[e] >= rep.delta_analytic[e] - 1e-9);
}

TEST_CASE("orthogonal pair attains the analytic L2 modulus") {
    // two far points: no neighbors at k=0, the product norm is plain L^2
    MetricMeasureSpace two = MetricMeasureSpace::from_coords({{0.0}, {3.0}}, {1.0, 1.0});
    BallCover cover = build_cover(two, 0);
    DiscreteFunction u = make_function(two, {1.0, 0.0});
    DiscreteFunction v = make_function(two, {0.0, 1.0});
    TkField fu = T_k(two, u, cover, 2.0);
    REQUIRE(fu.arity == 0);
    std::vector<double> diff = {1.0, -1.0}, mid = {0.5, 0.5};
    REQUIRE(lp_norm(two, make_function(two, diff), 2.0) == Catch::Approx(std::sqrt(2.0)));
    double m = lp_norm(two, make_function(two, mid), 2.0);
    REQUIRE(m == Catch::Approx(std::sqrt(2.0) / 2.0));
    REQUIRE(1.0 - m == Catch::Approx(1.0 - std::sqrt(0.5)).epsilon(1e-12));
    REQUIRE(analytic_lp_modulus(2.0, std::sqrt(2.0)) == Catch::Approx(1.0 - std::sqrt(0.5)));
}

TEST_CASE("convexity fails at p=1 on the disjoint-support pair") {
    MetricMeasureSpace two = MetricMeasureSpace::from_coords({{0.0}, {3.0}}, {1.0, 1.0});
    ConvexityReport rep = convexity_probe(two, 1.0, 0, 1, {0.5, 1.0, 1.9}, 1);
    REQUIRE(rep.max_midpoint_norm >= 1.0 - 1e-12);
}

TEST_CASE("equal functions never witness a counterexample") {
    MetricMeasureSpace g = grid1d(32);
    BallCover cover = build_cover(g, 2);
    DiscreteFunction u = random_gaussian(g, 5);
    TkField f = T_k(g, u, cover, 2.0);
    double phi = std::pow(std::pow(lp_norm(g, u, 2.0), 2.0) +
                              std::pow(field_lp_norm(g, f), 2.0),
                          0.5);
    for (auto& t : u.values) t /= phi;
    TkField fn = T_k(g, u, cover, 2.0);
    double phi_sum = std::pow(std::pow(lp_norm(g, u, 2.0) * 2.0, 2.0) +
                                  std::pow(field_lp_norm(g, fn) * 2.0, 2.0),
                              0.5);
    REQUIRE(phi_sum / 2.0 <= 1.0 + 1e-12);  // u = v: midpoint stays in the ball
}

TEST_CASE("cross-cover spread stays within the liminf/limsup gap") {
    MetricMeasureSpace g = grid1d(256);
    DiscreteFunction c = make_named_function(g, "const:2");
    CrossCoverReport rc = cross_cover_experiment(g, c, 2.0, 1, 5, {0, 1}, 3);
    REQUIRE(rc.relative_spread == Catch::Approx(0.0));
    REQUIRE(rc.pass == PassFlag::pass);

    DiscreteFunction u = make_named_function(g, "linear");
    CrossCoverReport ru = cross_cover_experiment(g, u, 2.0, 1, 5, {0, 1, 2, 3, 4}, 3);
    REQUIRE(ru.limsups.size() == 5);
    REQUIRE(ru.pass == PassFlag::pass);

    REQUIRE_THROWS_AS(cross_cover_experiment(g, u, 2.0, 1, 5, {0}, 3), std::invalid_argument);
}

TEST_CASE("function library forms") {
    MetricMeasureSpace g = grid1d(16);
    REQUIRE(make_named_function(g, "const:2.5").values[3] == Catch::Approx(2.5));
    REQUIRE(make_named_function(g, "linear").values[15] == Catch::Approx(1.0));
    REQUIRE(make_named_function(g, "abs:0.5").values[0] == Catch::Approx(0.5));
    REQUIRE(make_named_function(g, "jump:0.5").values[0] == 0.0);
    REQUIRE(make_named_function(g, "jump:0.5").values[15] == 1.0);
    REQUIRE(make_named_function(g, "sin:1").values[0] == Catch::Approx(0.0).margin(1e-12));
    DiscreteFunction r1 = make_named_function(g, "randlip:2:7");
    DiscreteFunction r2 = make_named_function(g, "randlip:2:7");
    REQUIRE(r1.values == r2.values);
    // Lipschitz bound holds along edges
    for (int i = 0; i + 1 < g.size(); ++i)
        REQUIRE(std::abs(r1.values[i + 1] - r1.values[i]) <= 2.0 * g.distance(i, i + 1) + 1e-12);
    REQUIRE_THROWS_AS(make_named_function(g, "nope:1"), std::invalid_argument);

    MetricMeasureSpace g2 = grid2d(4, 4);
    DiscreteFunction lin2 = make_named_function(g2, "linear:1,2");
    REQUIRE(lin2.values[15] == Catch::Approx(1.0 + 2.0));
}

TEST_CASE("randomized chain trials stay nonnegative on the circle") {
    MetricMeasureSpace s = circle(128);
    auto [k_lo, k_hi] = admissible_k_window(s);
    AlmostugReport rep = almostug_experiment(s, k_lo, k_hi, 500, 3);
    REQUIRE(rep.trials >= 500);
    REQUIRE(rep.violations == 0);
    REQUIRE(rep.min_slack >= -1e-9);
}

TEST_CASE("cross-cover on a single point is degenerate but defined") {
    MetricMeasureSpace one = MetricMeasureSpace::from_coords({{0.0}}, {1.0});
    DiscreteFunction u = make_function(one, {3.0});
    CrossCoverReport rep = cross_cover_experiment(one, u, 2.0, 0, 2, {0, 1}, 2);
    REQUIRE(rep.relative_spread == 0.0);
    REQUIRE(rep.pass == PassFlag::pass);
}
