#pragma once

#include "levelhull/delaunay.hpp"
#include "levelhull/grid.hpp"
#include "levelhull/kdtree.hpp"
#include "levelhull/point_cloud.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace levelhull {

/// The r-convex hull C_r(A): the complement of the union of all open balls
/// of radius r that miss A.
///
/// Membership is closed: a query whose farthest empty-ball center sits at
/// distance exactly r counts as inside, up to tolerance(). Planar hulls are
/// evaluated exactly from the Voronoi diagram of the generators; other
/// dimensions use the grid closing at cell r/20.
///
/// The radius-independent structure (Delaunay triangulation, k-d tree) is
/// shared between copies, so with_radius() is cheap.
class RHull {
public:
    RHull(PointCloud generators, double radius);

    const PointCloud& generators() const;
    double radius() const { return radius_; }
    Eigen::Index dim() const { return generators().dim(); }
    double tolerance() const;

    RHull with_radius(double radius) const;

    bool contains(const Eigen::Ref<const Eigen::VectorXd>& query) const;

    /// Planar triangulation of the generators (null unless dim() == 2).
    const Delaunay2* delaunay() const;

private:
    struct Structure;
    RHull(std::shared_ptr<const Structure> s, double radius);

    std::shared_ptr<const Structure> s_;
    double radius_ = 0.0;
    std::shared_ptr<const GridMask> grid_; // dimensions other than 2
};

/// One circular arc of a planar hull boundary, swept counter-clockwise from
/// theta0 to theta1 (theta1 - theta0 in (0, pi]). `a` and `b` index the
/// generators at its endpoints, or are -1 where the arc ends at a point
/// that is not a generator (a crossing with another empty ball).
struct BoundaryArc {
    Eigen::Vector2d center;
    double radius = 0.0;
    double theta0 = 0.0;
    double theta1 = 0.0;
    int a = -1;
    int b = -1;

    Eigen::Vector2d at(double theta) const
    {
        return center + radius * Eigen::Vector2d(std::cos(theta), std::sin(theta));
    }
};

struct HullBoundary {
    std::vector<BoundaryArc> arcs;
    /// Boundary generators that no arc ends at.
    PointCloud isolated_points{2};
    /// Number of connected arc chains (arcs linked through shared endpoints).
    int chain_count() const;
};

bool hull_contains(const RHull& hull, const Eigen::Ref<const Eigen::VectorXd>& query);

HullBoundary hull_boundary(const RHull& hull);

/// True when no point of `minus` lies in C_r(plus).
bool hull_separates(const PointCloud& plus, const PointCloud& minus, double r);
/// Same, reusing the structure of `plus_hull` at radius r.
bool hull_separates(const RHull& plus_hull, const PointCloud& minus, double r);

/// Closed convex hull of planar points, exact predicates.
class ConvexHull2 {
public:
    explicit ConvexHull2(const PointCloud& points);
    bool contains(const Eigen::Ref<const Eigen::VectorXd>& query) const;
    /// Hull vertices in counter-clockwise order.
    const std::vector<Eigen::Vector2d>& vertices() const { return hull_; }

private:
    std::vector<Eigen::Vector2d> hull_;
};

bool convex_hull_contains(const PointCloud& points, const Eigen::Ref<const Eigen::VectorXd>& query);

} // namespace levelhull
