#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlab/space.hpp"

namespace nlab {

enum class SpaceFormat { auto_detect, json, csv };

namespace detail {

inline MetricMeasureSpace space_from_json(const nlohmann::json& j) {
    if (!j.contains("mode")) throw std::invalid_argument("space file missing 'mode'");
    std::string mode = j.at("mode").get<std::string>();
    const auto& pts = j.at("points");
    int n = static_cast<int>(pts.size());
    if (n == 0) throw std::invalid_argument("space file has no points");
    std::vector<double> weights(n, 1.0);
    std::vector<std::vector<double>> coords(n);
    bool any_coord = false;
    for (int i = 0; i < n; ++i) {
        const auto& p = pts.at(i);
        int id = p.value("id", i);
        if (id != i) throw std::invalid_argument("point ids must be consecutive from 0");
        weights[i] = p.value("weight", 1.0);
        if (p.contains("coord")) {
            coords[i] = p.at("coord").get<std::vector<double>>();
            any_coord = true;
        }
    }
    if (j.value("normalize_weights", false)) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("cannot normalize non-positive mass");
        for (double& w : weights) w /= total;
    }
    if (mode == "euclidean") {
        if (!any_coord) throw std::invalid_argument("euclidean mode requires coordinates");
        return MetricMeasureSpace::from_coords(std::move(coords), std::move(weights));
    }
    if (mode == "matrix") {
        auto matrix = j.at("matrix").get<std::vector<std::vector<double>>>();
        return MetricMeasureSpace::from_matrix(std::move(matrix), std::move(weights));
    }
    if (mode == "graph") {
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges"))
            edges.push_back({e.at("a").get<int>(), e.at("b").get<int>(), e.at("len").get<double>()});
        return MetricMeasureSpace::from_graph(n, std::move(edges), std::move(weights),
                                              any_coord ? std::move(coords)
                                                        : std::vector<std::vector<double>>{});
    }
    throw std::invalid_argument("unknown mode '" + mode + "'");
}

inline MetricMeasureSpace space_from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) header.push_back(tok);
    }
    int dim = 0;
    int weight_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "weight")
            weight_col = static_cast<int>(c);
        else if (header[c].size() >= 2 && header[c][0] == 'x')
            ++dim;
        else
            throw std::invalid_argument("unexpected CSV column '" + header[c] + "'");
    }
    if (dim == 0) throw std::invalid_argument("CSV needs coordinate columns x1..xn");
    std::vector<std::vector<double>> coords;
    std::vector<double> weights;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> row;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        if (row.size() != header.size()) throw std::invalid_argument("ragged CSV row");
        std::vector<double> c;
        for (std::size_t j = 0; j < row.size(); ++j)
            if (static_cast<int>(j) != weight_col) c.push_back(row[j]);
        coords.push_back(std::move(c));
        weights.push_back(weight_col >= 0 ? row[weight_col] : 1.0);
    }
    return MetricMeasureSpace::from_coords(std::move(coords), std::move(weights));
}

}  // namespace detail

/// Loads a space from JSON ({mode, points, edges?, matrix?}) or a CSV
/// point cloud (columns x1..xn, weight).
inline MetricMeasureSpace load_space(const std::string& path,
                                     SpaceFormat format = SpaceFormat::auto_detect) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open space file: " + path);
    if (format == SpaceFormat::auto_detect) {
        format = path.size() >= 4 && path.substr(path.size() - 4) == ".csv" ? SpaceFormat::csv
                                                                            : SpaceFormat::json;
    }
    if (format == SpaceFormat::csv) return detail::space_from_csv(in);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("space file parse failure: " + std::string(e.what()));
    }
    return detail::space_from_json(j);
}

inline nlohmann::ordered_json space_to_json(const MetricMeasureSpace& space) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    switch (space.mode()) {
        case MetricMode::euclidean: j["mode"] = "euclidean"; break;
        case MetricMode::explicit_matrix: j["mode"] = "matrix"; break;
        case MetricMode::graph_shortest_path: j["mode"] = "graph"; break;
    }
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (int i = 0; i < space.size(); ++i) {
        nlohmann::ordered_json p;
        p["id"] = i;
        if (space.has_coords()) p["coord"] = space.coords()[i];
        p["weight"] = space.weight(i);
        pts.push_back(std::move(p));
    }
    j["points"] = std::move(pts);
    if (space.mode() == MetricMode::graph_shortest_path) {
        nlohmann::ordered_json es = nlohmann::ordered_json::array();
        for (const Edge& e : space.edges()) es.push_back({{"a", e.a}, {"b", e.b}, {"len", e.len}});
        j["edges"] = std::move(es);
    }
    if (space.mode() == MetricMode::explicit_matrix) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (int i = 0; i < space.size(); ++i) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (int k = 0; k < space.size(); ++k) row.push_back(space.distance(i, k));
            rows.push_back(std::move(row));
        }
        j["matrix"] = std::move(rows);
    }
    return j;
}

}  // namespace nlab
