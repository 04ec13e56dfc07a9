#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <numbers>

#include "nlab/generators.hpp"
#include "nlab/space.hpp"
#include "nlab/space_io.hpp"

using namespace nlab;

namespace {

MetricMeasureSpace three_point_line() {
    return MetricMeasureSpace::from_coords({{0.0}, {0.6}, {1.2}}, {1.0, 1.0, 1.0});
}

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                       "/" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_space ingests a JSON point list") {
    std::string path = write_temp("pts.json", R"({
        "mode": "euclidean",
        "points": [
            {"id": 0, "coord": [0.0], "weight": 1.0},
            {"id": 1, "coord": [0.6], "weight": 1.0},
            {"id": 2, "coord": [1.2], "weight": 1.0}
        ]})");
    MetricMeasureSpace s = load_space(path);
    REQUIRE(s.size() == 3);
    REQUIRE(s.total_mass() == Catch::Approx(3.0));
    REQUIRE(s.distance(0, 2) == Catch::Approx(1.2));
    std::remove(path.c_str());
}

TEST_CASE("load_space graph mode uses the shortest-path metric") {
    std::string path = write_temp("graph.json", R"({
        "mode": "graph",
        "points": [{"id": 0}, {"id": 1}, {"id": 2}],
        "edges": [{"a": 0, "b": 1, "len": 1.0}, {"a": 1, "b": 2, "len": 1.0}]
    })");
    MetricMeasureSpace s = load_space(path);
    REQUIRE(s.distance(0, 2) == Catch::Approx(2.0));
    std::remove(path.c_str());
}

TEST_CASE("load_space rejects triangle-inequality violations") {
    std::string path = write_temp("bad.json", R"({
        "mode": "matrix",
        "points": [{"id": 0}, {"id": 1}, {"id": 2}],
        "matrix": [[0, 1, 3], [1, 0, 1], [3, 1, 0]]
    })");
    REQUIRE_THROWS_AS(load_space(path), std::invalid_argument);
    std::remove(path.c_str());
}

TEST_CASE("load_space rejects non-positive weights and asymmetry") {
    std::string bad_w = write_temp("badw.json", R"({
        "mode": "euclidean",
        "points": [{"id": 0, "coord": [0], "weight": 0.0}, {"id": 1, "coord": [1], "weight": 1}]
    })");
    REQUIRE_THROWS_AS(load_space(bad_w), std::invalid_argument);
    std::remove(bad_w.c_str());
    std::string asym = write_temp("asym.json", R"({
        "mode": "matrix",
        "points": [{"id": 0}, {"id": 1}],
        "matrix": [[0, 1], [2, 0]]
    })");
    REQUIRE_THROWS_AS(load_space(asym), std::invalid_argument);
    std::remove(asym.c_str());
}

TEST_CASE("load_space ingests CSV point clouds") {
    std::string path = write_temp("cloud.csv", "x1,x2,weight\n0,0,1\n1,0,2\n0,1,1\n");
    MetricMeasureSpace s = load_space(path);
    REQUIRE(s.size() == 3);
    REQUIRE(s.weight(1) == Catch::Approx(2.0));
    REQUIRE(s.distance(1, 2) == Catch::Approx(std::sqrt(2.0)));
    std::remove(path.c_str());
}

TEST_CASE("generate_space canonical spaces") {
    MetricMeasureSpace g2 = grid1d(2);
    REQUIRE(g2.size() == 2);
    REQUIRE(g2.weight(0) == Catch::Approx(0.5));
    REQUIRE(g2.distance(0, 1) == Catch::Approx(1.0));
    REQUIRE_THROWS_AS(grid1d(1), std::invalid_argument);

    MetricMeasureSpace c4 = circle(4, 1.0);
    double q = std::numbers::pi / 2.0;
    REQUIRE(c4.distance(0, 1) == Catch::Approx(q));
    REQUIRE(c4.distance(0, 2) == Catch::Approx(2 * q));
    REQUIRE(c4.distance(0, 3) == Catch::Approx(q));

    MetricMeasureSpace g16 = grid2d(4, 4);
    REQUIRE(g16.size() == 16);
    REQUIRE(g16.distance(0, 15) == Catch::Approx(std::sqrt(2.0)));
}

TEST_CASE("closed balls") {
    MetricMeasureSpace line = three_point_line();
    REQUIRE(line.ball(0, 1.0) == std::vector<int>{0, 1});
    REQUIRE(line.ball(1, 0.0) == std::vector<int>{1});
    MetricMeasureSpace g2 = grid1d(2);
    REQUIRE(g2.ball(0, 2.0).size() == 2);
}

TEST_CASE("ball monotonicity in the radius") {
    MetricMeasureSpace g = grid2d(6, 6);
    for (int x : {0, 7, 35})
        for (double r1 : dyadic_ladder(g))
            for (double r2 : dyadic_ladder(g)) {
                if (r1 > r2) continue;
                auto b1 = g.ball(x, r1), b2 = g.ball(x, r2);
                REQUIRE(std::includes(b2.begin(), b2.end(), b1.begin(), b1.end()));
            }
}

TEST_CASE("ball_average agrees with the hand oracle") {
    MetricMeasureSpace line = three_point_line();
    DiscreteFunction u = make_function(line, {0.0, 0.6, 1.2});
    REQUIRE(ball_average(line, u, {0, 1}) == Catch::Approx(0.3));
    DiscreteFunction c = make_function(line, {2.5, 2.5, 2.5});
    REQUIRE(ball_average(line, c, {0, 1, 2}) == Catch::Approx(2.5));
    REQUIRE(ball_average(line, u, {2}) == Catch::Approx(1.2));
    REQUIRE_THROWS_AS(ball_average(line, u, {}), std::invalid_argument);
}

TEST_CASE("ball_average is affine") {
    MetricMeasureSpace g = grid1d(64);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::vector<double> uv(g.size()), vv(g.size());
    for (auto& t : uv) t = coef(rng);
    for (auto& t : vv) t = coef(rng);
    DiscreteFunction u = make_function(g, uv), v = make_function(g, vv);
    double a = coef(rng), b = coef(rng);
    std::vector<double> wv(g.size());
    for (int i = 0; i < g.size(); ++i) wv[i] = a * uv[i] + b * vv[i];
    DiscreteFunction w = make_function(g, wv);
    auto ball = g.ball(20, 0.25);
    double lhs = ball_average(g, w, ball);
    double rhs = a * ball_average(g, u, ball) + b * ball_average(g, v, ball);
    REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("doubling estimates") {
    MetricMeasureSpace one = MetricMeasureSpace::from_coords({{0.0}}, {1.0});
    REQUIRE(estimate_doubling(one, 10).C_d_estimate == Catch::Approx(1.0));

    MetricMeasureSpace g = grid1d(256);
    DoublingStats stats = estimate_doubling(g, 1 << 24);  // exhaustive
    REQUIRE(stats.C_d_estimate >= 1.0);
    REQUIRE(stats.C_d_estimate <= 4.0);

    MetricMeasureSpace two = MetricMeasureSpace::from_coords({{0.0}, {1.0}}, {1.0, 1.0});
    REQUIRE(doubling_ratio(two, 0, 0.6) == Catch::Approx(2.0));
}

TEST_CASE("doubling estimate is scale-stable") {
    MetricMeasureSpace g = grid1d(128);
    double cd = estimate_doubling(g, 1 << 24).C_d_estimate;
    double ratio_max = 1.0;
    for (double r : dyadic_ladder(g)) {
        for (int x = 0; x < g.size(); ++x) ratio_max = std::max(ratio_max, doubling_ratio(g, x, r / 2.0));
    }
    REQUIRE(ratio_max <= cd * cd);
    REQUIRE(cd <= ratio_max * ratio_max);
}

TEST_CASE("maximal function") {
    MetricMeasureSpace g = grid1d(4);
    DiscreteFunction c = make_function(g, {-1.5, -1.5, -1.5, -1.5});
    DiscreteFunction mc = maximal_function(g, c);
    for (double v : mc.values) REQUIRE(v == Catch::Approx(1.5));

    // indicator of point 1: exhaustive ladder-scan oracle
    DiscreteFunction ind = make_function(g, {0.0, 1.0, 0.0, 0.0});
    DiscreteFunction m = maximal_function(g, ind);
    std::vector<double> ladder = dyadic_ladder(g);
    for (int x = 0; x < g.size(); ++x) {
        double expect = x == 1 ? 1.0 : 0.0;  // singleton ball
        for (double r : ladder) {
            auto ball = g.ball(x, r);
            bool contains = std::find(ball.begin(), ball.end(), 1) != ball.end();
            if (!contains) continue;
            double mass = 0.0;
            for (int y : ball) mass += g.weight(y);
            expect = std::max(expect, g.weight(1) / mass);
        }
        REQUIRE(m.values[x] == Catch::Approx(expect));
    }

    // Mg >= |g| pointwise and M(cg) = |c| Mg
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pick(-3.0, 3.0);
    MetricMeasureSpace h = grid1d(32);
    std::vector<double> gv(h.size());
    for (auto& t : gv) t = pick(rng);
    DiscreteFunction gf = make_function(h, gv);
    DiscreteFunction mg = maximal_function(h, gf);
    for (int i = 0; i < h.size(); ++i) REQUIRE(mg.values[i] >= std::abs(gv[i]) - 1e-15);
    std::vector<double> sv(h.size());
    for (int i = 0; i < h.size(); ++i) sv[i] = -2.5 * gv[i];
    DiscreteFunction ms = maximal_function(h, make_function(h, sv));
    for (int i = 0; i < h.size(); ++i) REQUIRE(ms.values[i] == Catch::Approx(2.5 * mg.values[i]));
}

TEST_CASE("maximal operator is Lp bounded with a recorded constant") {
    MetricMeasureSpace g = grid1d(128);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> pick(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> gv(g.size());
        for (auto& t : gv) t = pick(rng);
        DiscreteFunction gf = make_function(g, gv);
        double ratio = lp_norm(g, maximal_function(g, gf), 2.0) / lp_norm(g, gf, 2.0);
        worst = std::max(worst, ratio);
        REQUIRE(std::isfinite(ratio));
    }
    REQUIRE(worst >= 1.0);  // singleton ball forces Mg >= |g|
    REQUIRE(worst < 50.0);
}

TEST_CASE("lip estimate") {
    MetricMeasureSpace g = grid1d(256);
    std::vector<double> ladder;
    for (int k = 3; k <= 7; ++k) ladder.push_back(std::ldexp(1.0, -k));

    DiscreteFunction c = make_function(g, std::vector<double>(g.size(), 4.2));
    LipEstimate lc = lip_estimate(g, c, ladder);
    for (double v : lc.values.values) REQUIRE(v == Catch::Approx(0.0));

    std::vector<double> xv(g.size());
    for (int i = 0; i < g.size(); ++i) xv[i] = i / 255.0;
    LipEstimate lx = lip_estimate(g, make_function(g, xv), ladder);
    for (double v : lx.values.values) {
        REQUIRE(v >= 0.9);
        REQUIRE(v <= 1.1);
    }

    // L-Lipschitz input keeps every ratio at or below L
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pick(-1.0, 1.0);
    double L = 3.0;
    std::vector<double> uv(g.size());
    uv[0] = 0.0;
    for (int i = 1; i < g.size(); ++i) uv[i] = uv[i - 1] + pick(rng) * L / 255.0;
    LipEstimate lu = lip_estimate(g, make_function(g, uv), ladder);
    for (double v : lu.values.values) REQUIRE(v <= L + 1e-12);
}

TEST_CASE("admissible window and ladder") {
    MetricMeasureSpace g = grid1d(1024);
    auto [k_lo, k_hi] = admissible_k_window(g);
    REQUIRE(k_lo == 0);
    REQUIRE(k_hi == 7);  // 2^-8 < 4/1023 <= 2^-7
    std::vector<double> ladder = dyadic_ladder(g);
    REQUIRE(ladder.front() == Catch::Approx(1.0));
    REQUIRE(ladder.back() >= g.resolution());
}

TEST_CASE("estimate_doubling is deterministic given the seed") {
    MetricMeasureSpace g = grid2d(12, 12);
    DoublingStats a = estimate_doubling(g, 50, 31);
    DoublingStats b = estimate_doubling(g, 50, 31);
    REQUIRE(a.C_d_estimate == b.C_d_estimate);
    REQUIRE(a.sample_log == b.sample_log);
    DoublingStats c = estimate_doubling(g, 50, 32);
    REQUIRE(c.sample_log != a.sample_log);
}

TEST_CASE("space JSON round trip") {
    MetricMeasureSpace g = circle(8, 2.0);
    nlohmann::ordered_json j = space_to_json(g);
    REQUIRE(j["schema_version"] == 1);
    REQUIRE(j["mode"] == "graph");
    REQUIRE(j["points"].size() == 8);
    std::string path = write_temp("roundtrip.json", j.dump());
    MetricMeasureSpace back = load_space(path);
    REQUIRE(back.size() == g.size());
    for (int i = 0; i < g.size(); ++i)
        for (int k = 0; k < g.size(); ++k)
            REQUIRE(back.distance(i, k) == Catch::Approx(g.distance(i, k)));
    std::remove(path.c_str());
}
