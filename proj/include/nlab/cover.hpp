#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlab/space.hpp"

namespace nlab {

/// One generation of the dyadic ball cover: radius-2^-k balls whose
/// fifth-size shrinkings are pairwise disjoint, the greedy partition
/// cells A_i, the neighbor graph, and the padded lookup arity N_k.
struct BallCover {
    int k = 0;
    double radius = 0.0;
    std::uint64_t space_id = 0;
    std::vector<int> centers;                    // point ids, selection order
    std::vector<std::vector<int>> members;       // B_i, sorted point ids
    std::vector<std::vector<int>> cells;         // A_i = B_i \ (B_1 u ... u B_{i-1})
    std::vector<std::vector<int>> neighbor_lists;  // ball indices, ascending
    std::vector<int> cell_of;                    // per point: its cell's ball index
    int padded_arity = 0;                        // N_k = max neighbor count

    int ball_count() const { return static_cast<int>(centers.size()); }
};

/// Min pairwise point distance between two finite ball member sets.
inline double set_distance(const MetricMeasureSpace& space, const std::vector<int>& a,
                           const std::vector<int>& b) {
    double best = std::numeric_limits<double>::infinity();
    for (int x : a)
        for (int y : b) best = std::min(best, space.distance(x, y));
    return best;
}

/// Greedy maximal packing of centers at separation > 2r/5 scanned in
/// ascending id order (seed 0) or a seeded shuffle of the ids, followed
/// by closed radius-r balls, cells, and the neighbor graph.
inline BallCover build_cover(const MetricMeasureSpace& space, int k, std::uint64_t seed = 0) {
    BallCover cover;
    cover.k = k;
    cover.radius = std::ldexp(1.0, -k);
    cover.space_id = space.id();
    const double r = cover.radius;
    const double sep = 2.0 * r / 5.0;

    std::vector<int> scan(space.size());
    std::iota(scan.begin(), scan.end(), 0);
    if (seed != 0) {
        std::mt19937_64 rng(seed);
        std::shuffle(scan.begin(), scan.end(), rng);
    }
    for (int x : scan) {
        bool admissible = true;
        for (int c : cover.centers)
            if (space.distance(x, c) <= sep) {
                admissible = false;
                break;
            }
        if (admissible) cover.centers.push_back(x);
    }

    const int m = cover.ball_count();
    cover.members.resize(m);
    for (int i = 0; i < m; ++i) cover.members[i] = space.ball(cover.centers[i], r);

    cover.cell_of.assign(space.size(), -1);
    cover.cells.resize(m);
    for (int i = 0; i < m; ++i)
        for (int x : cover.members[i])
            if (cover.cell_of[x] < 0) {
                cover.cell_of[x] = i;
                cover.cells[i].push_back(x);
            }

    cover.neighbor_lists.resize(m);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            double cd = space.distance(cover.centers[i], cover.centers[j]);
            bool close;
            if (cd < r) {
                close = true;  // centers are members, so set distance <= cd
            } else if (cd - 2.0 * r >= r) {
                close = false;  // set distance >= cd - 2r
            } else {
                close = set_distance(space, cover.members[i], cover.members[j]) < r;
            }
            if (close) {
                cover.neighbor_lists[i].push_back(j);
                cover.neighbor_lists[j].push_back(i);
            }
        }
    for (auto& list : cover.neighbor_lists) std::sort(list.begin(), list.end());
    for (const auto& list : cover.neighbor_lists)
        cover.padded_arity = std::max(cover.padded_arity, static_cast<int>(list.size()));
    return cover;
}

inline const std::vector<int>& neighbors_of(const BallCover& cover, int ball_index) {
    if (ball_index < 0 || ball_index >= cover.ball_count())
        throw std::out_of_range("ball index out of range");
    return cover.neighbor_lists[ball_index];
}

struct Lookup {
    int ball = 0;                 // i with x in A_i
    std::vector<int> padded;      // B[x,1..N_k]: true neighbors then copies of i
};

/// Padded neighbor lookup B[x,j]: entries past the true neighbor count
/// repeat the ball itself, so their T_k components vanish.
inline Lookup lookup(const BallCover& cover, int x) {
    if (x < 0 || x >= static_cast<int>(cover.cell_of.size()))
        throw std::out_of_range("point id out of range");
    Lookup out;
    out.ball = cover.cell_of[x];
    out.padded = cover.neighbor_lists[out.ball];
    out.padded.resize(cover.padded_arity, out.ball);
    return out;
}

struct CoverCheck {
    std::string name;
    bool pass = true;
    std::string witness;
};

struct CoverReport {
    std::vector<CoverCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Per-invariant audit with witnesses: coverage, fifth-ball disjointness,
/// partition structure, cell minimality, neighbor symmetry, padding arity.
inline CoverReport validate_cover(const MetricMeasureSpace& space, const BallCover& cover) {
    CoverReport report;
    auto add = [&](std::string name, bool pass, std::string witness = "") {
        report.checks.push_back({std::move(name), pass, std::move(witness)});
    };

    std::vector<int> hit(space.size(), 0);
    for (const auto& b : cover.members)
        for (int x : b) ++hit[x];
    int orphan = -1;
    for (int x = 0; x < space.size(); ++x)
        if (hit[x] == 0) {
            orphan = x;
            break;
        }
    add("coverage", orphan < 0, orphan < 0 ? "" : "uncovered point " + std::to_string(orphan));

    // fifth-ball disjointness as point sets
    bool disjoint = true;
    std::string dw;
    std::vector<int> owner(space.size(), -1);
    for (int i = 0; i < cover.ball_count() && disjoint; ++i)
        for (int x : space.ball(cover.centers[i], cover.radius / 5.0)) {
            if (owner[x] >= 0) {
                disjoint = false;
                dw = "fifth-balls of " + std::to_string(owner[x]) + " and " + std::to_string(i) +
                     " share point " + std::to_string(x);
                break;
            }
            owner[x] = i;
        }
    add("fifth_ball_disjoint", disjoint, dw);

    // cells partition X, A_i subset of B_i, and match the stored cell_of
    bool partition = true;
    std::string pw;
    std::vector<int> seen(space.size(), -1);
    for (int i = 0; i < cover.ball_count() && partition; ++i)
        for (int x : cover.cells[i]) {
            if (seen[x] >= 0) {
                partition = false;
                pw = "point " + std::to_string(x) + " in two cells";
                break;
            }
            seen[x] = i;
            if (!std::binary_search(cover.members[i].begin(), cover.members[i].end(), x)) {
                partition = false;
                pw = "cell " + std::to_string(i) + " leaks point " + std::to_string(x);
                break;
            }
        }
    for (int x = 0; x < space.size() && partition; ++x)
        if (seen[x] < 0) {
            partition = false;
            pw = "point " + std::to_string(x) + " in no cell";
        } else if (seen[x] != cover.cell_of[x]) {
            partition = false;
            pw = "cell_of mismatch at point " + std::to_string(x);
        }
    add("partition", partition, pw);

    // cell_of(x) = min{i : x in B_i}
    bool minimal = true;
    std::string mw;
    for (int i = 0; i < cover.ball_count() && minimal; ++i)
        for (int x : cover.members[i])
            if (cover.cell_of[x] > i) {
                minimal = false;
                mw = "point " + std::to_string(x) + " assigned past ball " + std::to_string(i);
                break;
            }
    add("cell_minimality", minimal, mw);

    bool sym = true;
    std::string sw;
    for (int i = 0; i < cover.ball_count() && sym; ++i)
        for (int j : cover.neighbor_lists[i]) {
            if (j == i) {
                sym = false;
                sw = "ball " + std::to_string(i) + " is its own neighbor";
                break;
            }
            const auto& back = cover.neighbor_lists[j];
            if (!std::binary_search(back.begin(), back.end(), i)) {
                sym = false;
                sw = "asymmetric pair (" + std::to_string(i) + "," + std::to_string(j) + ")";
                break;
            }
        }
    add("neighbor_symmetry", sym, sw);

    bool arity = true;
    for (const auto& list : cover.neighbor_lists)
        if (static_cast<int>(list.size()) > cover.padded_arity) arity = false;
    add("padded_arity", arity);
    return report;
}

/// Max over points of the number of theta-dilated balls containing it.
inline int overlap_constant(const MetricMeasureSpace& space, const BallCover& cover,
                            double theta) {
    std::vector<int> count(space.size(), 0);
    for (int i = 0; i < cover.ball_count(); ++i)
        for (int x : space.ball(cover.centers[i], theta * cover.radius)) ++count[x];
    int c0 = 0;
    for (int x = 0; x < space.size(); ++x) c0 = std::max(c0, count[x]);
    return c0;
}

/// Fills the cover-derived fields of DoublingStats (bounded overlap at
/// dilation theta and the max neighbor count) across a k-window.
inline void fill_cover_stats(DoublingStats& stats, const MetricMeasureSpace& space, int k_lo,
                             int k_hi, double theta = 5.0) {
    for (int k = k_lo; k <= k_hi; ++k) {
        BallCover cover = build_cover(space, k);
        stats.C_0_estimate = std::max(stats.C_0_estimate, overlap_constant(space, cover, theta));
        stats.N_max = std::max(stats.N_max, cover.padded_arity);
    }
}

}  // namespace nlab
