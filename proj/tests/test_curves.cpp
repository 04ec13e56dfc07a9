#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nlab/curves.hpp"
#include "nlab/function_library.hpp"
#include "nlab/modulus.hpp"
#include "nlab/generators.hpp"

using namespace nlab;

namespace {
MetricMeasureSpace three_point_line() {
    return MetricMeasureSpace::from_coords({{0.0}, {0.6}, {1.2}}, {1.0, 1.0, 1.0});
}

MetricMeasureSpace unit_path(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
    return weighted_graph(n, std::move(edges), std::vector<double>(n, 1.0));
}
}  // namespace

TEST_CASE("line integral basics") {
    MetricMeasureSpace line = three_point_line();
    Curve c = make_curve(line, {0, 1, 2});
    REQUIRE(c.length == Catch::Approx(1.2));

    DiscreteFunction one = make_function(line, {1.0, 1.0, 1.0});
    REQUIRE(line_integral(line, c, one) == Catch::Approx(c.length));

    // rho = |T_0 u|_1 of the worked example
    DiscreteFunction rho = make_function(line, {0.9, 0.9, 0.6});
    REQUIRE(line_integral(line, c, rho) == Catch::Approx(0.99));

    Curve rev = make_curve(line, {2, 1, 0});
    REQUIRE(line_integral(line, rev, rho) == Catch::Approx(0.99));
}

TEST_CASE("line integral is additive under concatenation") {
    MetricMeasureSpace g = grid1d(16);
    Curve a = make_curve(g, {0, 1, 2, 3});
    Curve b = make_curve(g, {3, 4, 5});
    Curve ab = concatenate(g, a, b);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> pick(0.0, 2.0);
    std::vector<double> rv(g.size());
    for (auto& t : rv) t = pick(rng);
    DiscreteFunction rho = make_function(g, rv);
    REQUIRE(line_integral(g, ab, rho) ==
            Catch::Approx(line_integral(g, a, rho) + line_integral(g, b, rho)).epsilon(1e-14));
}

TEST_CASE("make_curve rejects degenerate chains") {
    MetricMeasureSpace line = three_point_line();
    REQUIRE_THROWS_AS(make_curve(line, {0}), std::invalid_argument);
    REQUIRE_THROWS_AS(make_curve(line, {0, 0}), std::invalid_argument);
}

TEST_CASE("upper-gradient slack report") {
    MetricMeasureSpace path = unit_path(3);
    DiscreteFunction u = make_function(path, {0.0, 1.0, 2.0});
    CurveFamily family;
    family.curves.push_back(make_curve(path, {0, 1}));
    family.curves.push_back(make_curve(path, {1, 2}));
    family.curves.push_back(make_curve(path, {0, 1, 2}));

    DiscreteFunction one = make_function(path, {1.0, 1.0, 1.0});
    SlackReport eq = check_upper_gradient(path, u, one, family);
    REQUIRE(eq.violations == 0);
    REQUIRE(eq.min_slack == Catch::Approx(0.0).margin(1e-12));

    DiscreteFunction constant = make_function(path, {5.0, 5.0, 5.0});
    DiscreteFunction zero = make_function(path, {0.0, 0.0, 0.0});
    SlackReport cz = check_upper_gradient(path, constant, zero, family);
    REQUIRE(cz.min_slack == Catch::Approx(0.0));

    DiscreteFunction half = make_function(path, {0.5, 0.5, 0.5});
    SlackReport viol = check_upper_gradient(path, u, half, family);
    REQUIRE(viol.violations == 3);
    REQUIRE(viol.slacks[2] == Catch::Approx(-0.5 * 2.0));
}

TEST_CASE("S_k chain inequality on the three-point line") {
    MetricMeasureSpace line = three_point_line();
    BallCover cover = build_cover(line, 0);
    DiscreteFunction u = make_function(line, {0.0, 0.6, 1.2});
    CurveFamily family;
    family.curves.push_back(make_curve(line, {0, 1, 2}));
    SlackReport rep = check_S_k_inequality(line, u, cover, 1.0, family);
    REQUIRE(rep.checked == 1);
    REQUIRE(rep.violations == 0);
    // 4 * 0.99 - |0.3 - 0.6|
    REQUIRE(rep.slacks[0] == Catch::Approx(3.66));

    DiscreteFunction c = make_function(line, {3.0, 3.0, 3.0});
    SlackReport czero = check_S_k_inequality(line, c, cover, 1.0, family);
    REQUIRE(czero.min_slack == Catch::Approx(0.0).margin(1e-12));

    // endpoint distance below 2^-k is a precondition breach: skipped
    CurveFamily close;
    close.curves.push_back(make_curve(line, {0, 1}));
    SlackReport skip = check_S_k_inequality(line, u, cover, 1.0, close);
    REQUIRE(skip.skipped == 1);
    REQUIRE(skip.checked == 0);
}

TEST_CASE("random monotone lattice paths satisfy the chain inequality") {
    MetricMeasureSpace g = grid2d(16, 16);
    std::mt19937_64 rng(42);
    // u smooth on the unit square
    std::vector<double> uv(g.size());
    for (int i = 0; i < g.size(); ++i) {
        double x = g.coords()[i][0], y = g.coords()[i][1];
        uv[i] = x + 0.5 * y + 0.2 * std::sin(3.0 * x) * std::cos(2.0 * y);
    }
    DiscreteFunction u = make_function(g, uv);
    auto at = [&](int r, int c) { return r * 16 + c; };
    for (int k : {1, 2, 3}) {
        BallCover cover = build_cover(g, k);
        CurveFamily family;
        std::uniform_int_distribution<int> coin(0, 1);
        while (family.curves.size() < 1000) {
            int r = 0, c = 0;
            std::vector<int> path{at(0, 0)};
            std::uniform_int_distribution<int> start(0, 7);
            r = start(rng);
            c = start(rng);
            path = {at(r, c)};
            while (r < 15 || c < 15) {
                if (r == 15 || (c < 15 && coin(rng))) ++c;
                else ++r;
                path.push_back(at(r, c));
                if (path.size() > 20) break;
            }
            Curve curve = make_curve(g, std::move(path));
            if (g.distance(curve.first(), curve.last()) >= std::ldexp(1.0, -k))
                family.curves.push_back(std::move(curve));
        }
        SlackReport rep = check_S_k_inequality(g, u, cover, 2.0, family);
        INFO("k=" << k);
        REQUIRE(rep.violations == 0);
    }
}

TEST_CASE("enumerate_family all-simple-paths") {
    MetricMeasureSpace path = unit_path(3);
    CurveFamily fam =
        enumerate_family(path, FamilyGenerator::all_simple_paths, {0}, {2});
    REQUIRE(fam.curves.size() == 1);
    REQUIRE(fam.curves[0].length == Catch::Approx(2.0));

    // 2 x 3 grid graph: unit edges along rows and columns
    std::vector<Edge> edges;
    auto at = [](int r, int c) { return r * 3 + c; };
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c + 1 < 3; ++c) edges.push_back({at(r, c), at(r, c + 1), 1.0});
    for (int c = 0; c < 3; ++c) edges.push_back({at(0, c), at(1, c), 1.0});
    MetricMeasureSpace grid = weighted_graph(6, std::move(edges), std::vector<double>(6, 1.0));
    FamilyOptions opts;
    opts.hop_limit = 2;
    CurveFamily rows = enumerate_family(grid, FamilyGenerator::all_simple_paths, {0, 3}, {2, 5}, opts);
    REQUIRE(rows.curves.size() == 2);
    for (const Curve& c : rows.curves) REQUIRE(c.length == Catch::Approx(2.0));

    REQUIRE_THROWS_AS(enumerate_family(grid, FamilyGenerator::all_simple_paths, {}, {2}),
                      std::invalid_argument);
    FamilyOptions zero_hops;
    zero_hops.hop_limit = 0;
    REQUIRE_THROWS_AS(
        enumerate_family(grid, FamilyGenerator::all_simple_paths, {0}, {2}, zero_hops),
        std::invalid_argument);
}

TEST_CASE("k-shortest enumeration is deterministic with lexicographic ties") {
    std::vector<Edge> edges = {{0, 1, 1.0}, {1, 3, 1.0}, {0, 2, 1.0}, {2, 3, 1.0}, {0, 3, 3.0}};
    MetricMeasureSpace g = weighted_graph(4, std::move(edges), std::vector<double>(4, 1.0));
    FamilyOptions opts;
    opts.k_shortest = 3;
    CurveFamily fam = enumerate_family(g, FamilyGenerator::k_shortest, {0}, {3}, opts);
    REQUIRE(fam.curves.size() == 3);
    // two length-2 paths, lexicographically ordered, then the direct edge
    REQUIRE(fam.curves[0].vertices == std::vector<int>{0, 1, 3});
    REQUIRE(fam.curves[1].vertices == std::vector<int>{0, 2, 3});
    REQUIRE(fam.curves[2].vertices == std::vector<int>{0, 3});
}

TEST_CASE("grid-rows generator emits one polyline per lattice row") {
    MetricMeasureSpace g = grid2d(4, 6);
    CurveFamily fam = enumerate_family(g, FamilyGenerator::grid_rows, {}, {});
    REQUIRE(fam.curves.size() == 4);
    for (const Curve& c : fam.curves) REQUIRE(c.vertices.size() == 6);
}

TEST_CASE("random walk family respects the endpoint-distance filter") {
    MetricMeasureSpace g = grid1d(64);
    CurveFamily fam = random_walk_family(g, 50, 0.25, 40, 7);
    REQUIRE(fam.curves.size() == 50);
    for (const Curve& c : fam.curves)
        REQUIRE(g.distance(c.first(), c.last()) >= 0.25);
    CurveFamily fam2 = random_walk_family(g, 50, 0.25, 40, 7);
    REQUIRE(fam2.curves.size() == fam.curves.size());
    for (std::size_t i = 0; i < fam.curves.size(); ++i)
        REQUIRE(fam2.curves[i].vertices == fam.curves[i].vertices);
}

TEST_CASE("edge-oracle gradient is admissible on every enumerated path") {
    MetricMeasureSpace g = grid1d(32);
    DiscreteFunction u = random_lipschitz(g, 2.0, 77);
    DiscreteFunction vg = edge_gradient_to_vertices(g, minimal_upper_gradient_edge(g, u));
    FamilyOptions opts;
    opts.k_shortest = 3;
    CurveFamily fam = enumerate_family(g, FamilyGenerator::k_shortest, {0, 5}, {20, 31}, opts);
    for (const Curve& c : edge_family(g).curves) fam.curves.push_back(c);
    SlackReport rep = check_upper_gradient(g, u, vg, fam);
    REQUIRE(rep.violations == 0);
    REQUIRE(rep.min_slack >= -1e-9);
}
