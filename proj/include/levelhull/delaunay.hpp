#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

namespace levelhull {

/// Delaunay triangulation of distinct planar sites together with the dual
/// Voronoi edges.
///
/// Built by incremental insertion (Bowyer-Watson with ghost triangles) in
/// Hilbert order using exact orientation and in-circle predicates. Exactly
/// cocircular configurations resolve to the first triangulation produced
/// by the strict in-circle rule, which depends only on the input order.
/// Fully collinear inputs yield no triangles; consecutive sites along the
/// line are then joined by edges whose Voronoi duals are full lines.
class Delaunay2 {
public:
    /// The Voronoi edge dual to the Delaunay edge (a, b), a < b.
    ///
    /// Its points are `mid + s * normal` for `s` in `[s_lo, s_hi]`, where
    /// `normal` is the unit left normal of a->b. Unbounded sides are +-inf.
    struct Edge {
        int a = -1;
        int b = -1;
        Eigen::Vector2d mid;
        Eigen::Vector2d normal;
        double s_lo = 0.0;
        double s_hi = 0.0;
    };

    Delaunay2() = default;
    explicit Delaunay2(std::vector<Eigen::Vector2d> sites);

    const std::vector<Eigen::Vector2d>& sites() const { return sites_; }
    /// Counter-clockwise vertex triples.
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const int> incident_edges(int site) const
    {
        const auto lo = static_cast<std::size_t>(incidence_offset_[static_cast<std::size_t>(site)]);
        const auto hi = static_cast<std::size_t>(incidence_offset_[static_cast<std::size_t>(site) + 1]);
        return std::span<const int>(incidence_).subspan(lo, hi - lo);
    }
    int other_end(const Edge& e, int site) const { return e.a == site ? e.b : e.a; }
    bool collinear() const { return triangles_.empty() && sites_.size() >= 2; }

private:
    void triangulate();
    void build_edges();

    std::vector<Eigen::Vector2d> sites_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<Edge> edges_;
    std::vector<int> incidence_;
    std::vector<int> incidence_offset_;
};

/// Circumcenter of the triangle (a, b, c).
Eigen::Vector2d circumcenter(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c);

} // namespace levelhull
