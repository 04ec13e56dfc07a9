#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "nlab/space.hpp"

namespace nlab {

/// n uniform samples of [0,1] with weight 1/n each; path-graph metric,
/// which coincides with |x - y|.
inline MetricMeasureSpace grid1d(int n) {
    if (n < 2) throw std::invalid_argument("grid1d requires n >= 2");
    double h = 1.0 / (n - 1);
    std::vector<std::vector<double>> coords(n);
    std::vector<double> weights(n, 1.0 / n);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) coords[i] = {i * h};
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, h});
    return MetricMeasureSpace::from_graph(n, std::move(edges), std::move(weights),
                                          std::move(coords));
}

/// m x n lattice on the unit square with the Euclidean metric, row-major
/// ids, uniform weights 1/(mn).
inline MetricMeasureSpace grid2d(int rows, int cols) {
    if (rows < 2 || cols < 2) throw std::invalid_argument("grid2d requires rows, cols >= 2");
    std::vector<std::vector<double>> coords;
    coords.reserve(static_cast<std::size_t>(rows) * cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            coords.push_back({static_cast<double>(i) / (rows - 1),
                              static_cast<double>(j) / (cols - 1)});
    std::vector<double> weights(coords.size(), 1.0 / (static_cast<double>(rows) * cols));
    return MetricMeasureSpace::from_coords(std::move(coords), std::move(weights));
}

/// n equally spaced points on a circle with the geodesic (arc-length)
/// metric, realized as a cycle graph. Weights are the arc quadrature
/// 2*pi*R/n, so the total mass equals the circumference.
inline MetricMeasureSpace circle(int n, double radius = 1.0) {
    if (n < 2) throw std::invalid_argument("circle requires n >= 2");
    if (!(radius > 0.0)) throw std::invalid_argument("circle requires positive radius");
    double step = 2.0 * std::numbers::pi * radius / n;
    std::vector<std::vector<double>> coords(n);
    std::vector<double> weights(n, step);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        double th = 2.0 * std::numbers::pi * i / n;
        coords[i] = {radius * std::cos(th), radius * std::sin(th)};
        edges.push_back({i, (i + 1) % n, step});
    }
    return MetricMeasureSpace::from_graph(n, std::move(edges), std::move(weights),
                                          std::move(coords));
}

/// Explicit weighted graph with the shortest-path metric.
inline MetricMeasureSpace weighted_graph(int n, std::vector<Edge> edges,
                                         std::vector<double> weights,
                                         std::vector<std::vector<double>> coords = {}) {
    return MetricMeasureSpace::from_graph(n, std::move(edges), std::move(weights),
                                          std::move(coords));
}

/// Path graph 0-1-...-n-1 whose point weights match the trapezoid
/// quadrature of arc length (half weight at the two ends). On such a
/// space the support of a straight path has mass equal to its length.
inline MetricMeasureSpace quadrature_path(int n, double total_length) {
    if (n < 2) throw std::invalid_argument("quadrature_path requires n >= 2");
    if (!(total_length > 0.0)) throw std::invalid_argument("length must be positive");
    double h = total_length / (n - 1);
    std::vector<double> weights(n, h);
    weights.front() = h / 2.0;
    weights.back() = h / 2.0;
    std::vector<Edge> edges;
    std::vector<std::vector<double>> coords(n);
    for (int i = 0; i < n; ++i) coords[i] = {i * h};
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, h});
    return MetricMeasureSpace::from_graph(n, std::move(edges), std::move(weights),
                                          std::move(coords));
}

}  // namespace nlab
