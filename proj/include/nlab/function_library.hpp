#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlab/space.hpp"

namespace nlab {

/// Random Lipschitz function built from distance cones: a seeded
/// combination u(x) = sum_j a_j d(x, p_j) normalized to the requested
/// Lipschitz bound.
inline DiscreteFunction random_lipschitz(const MetricMeasureSpace& space, double lipschitz_bound,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_point(0, space.size() - 1);
    std::uniform_real_distribution<double> pick_coef(-1.0, 1.0);
    const int terms = 5;
    std::vector<int> anchors(terms);
    std::vector<double> coefs(terms);
    double total = 0.0;
    for (int j = 0; j < terms; ++j) {
        anchors[j] = pick_point(rng);
        coefs[j] = pick_coef(rng);
        total += std::abs(coefs[j]);
    }
    if (total <= 0.0) total = 1.0;
    std::vector<double> v(space.size(), 0.0);
    for (int i = 0; i < space.size(); ++i)
        for (int j = 0; j < terms; ++j)
            v[i] += coefs[j] / total * lipschitz_bound * space.distance(i, anchors[j]);
    return make_function(space, std::move(v));
}

/// Seeded values with no structure, used by the convexity sampler.
inline DiscreteFunction random_gaussian(const MetricMeasureSpace& space, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(space.size());
    for (auto& t : v) t = g(rng);
    return make_function(space, std::move(v));
}

/// Named test functions: "linear", "linear:a,b,..", "abs:c", "sin:f",
/// "const:c", "coord:i", "jump:c", "randlip:L:seed", "file:path".
/// Coordinate forms evaluate on the first coordinate unless stated.
inline DiscreteFunction make_named_function(const MetricMeasureSpace& space,
                                            const std::string& spec) {
    auto coord = [&](int i, int axis) {
        if (!space.has_coords()) throw std::invalid_argument("function needs coordinates");
        const auto& c = space.coords()[i];
        if (axis >= static_cast<int>(c.size()))
            throw std::invalid_argument("coordinate axis out of range");
        return c[axis];
    };
    std::string head = spec, args;
    if (auto pos = spec.find(':'); pos != std::string::npos) {
        head = spec.substr(0, pos);
        args = spec.substr(pos + 1);
    }
    std::vector<double> v(space.size());
    if (head == "linear") {
        std::vector<double> coefs;
        if (!args.empty()) {
            std::stringstream ss(args);
            std::string tok;
            while (std::getline(ss, tok, ',')) coefs.push_back(std::stod(tok));
        }
        for (int i = 0; i < space.size(); ++i) {
            if (coefs.empty()) {
                v[i] = coord(i, 0);
            } else {
                v[i] = 0.0;
                for (std::size_t a = 0; a < coefs.size(); ++a) v[i] += coefs[a] * coord(i, static_cast<int>(a));
            }
        }
    } else if (head == "abs") {
        double c = args.empty() ? 0.5 : std::stod(args);
        for (int i = 0; i < space.size(); ++i) v[i] = std::abs(coord(i, 0) - c);
    } else if (head == "sin") {
        double f = args.empty() ? 1.0 : std::stod(args);
        for (int i = 0; i < space.size(); ++i)
            v[i] = std::sin(2.0 * std::numbers::pi * f * coord(i, 0));
    } else if (head == "const") {
        double c = args.empty() ? 1.0 : std::stod(args);
        for (int i = 0; i < space.size(); ++i) v[i] = c;
    } else if (head == "coord") {
        int axis = args.empty() ? 0 : std::stoi(args);
        for (int i = 0; i < space.size(); ++i) v[i] = coord(i, axis);
    } else if (head == "jump") {
        double c = args.empty() ? 0.5 : std::stod(args);
        for (int i = 0; i < space.size(); ++i) v[i] = coord(i, 0) >= c ? 1.0 : 0.0;
    } else if (head == "randlip") {
        double L = 1.0;
        std::uint64_t seed = 1;
        if (!args.empty()) {
            std::stringstream ss(args);
            std::string tok;
            if (std::getline(ss, tok, ':')) L = std::stod(tok);
            if (std::getline(ss, tok, ':')) seed = std::stoull(tok);
        }
        return random_lipschitz(space, L, seed);
    } else if (head == "file") {
        std::ifstream in(args);
        if (!in) throw std::invalid_argument("cannot open function file: " + args);
        nlohmann::json j;
        in >> j;
        if (j.is_object() && j.contains("values")) j = j["values"];
        auto vals = j.get<std::vector<double>>();
        return make_function(space, std::move(vals));
    } else {
        throw std::invalid_argument("unknown function spec '" + spec + "'");
    }
    return make_function(space, std::move(v));
}

}  // namespace nlab
