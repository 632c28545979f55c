#include "levelhull/error.hpp"
#include "levelhull/grid.hpp"
#include "levelhull/rhull.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace levelhull;
using V = Eigen::Vector2d;

namespace {

PointCloud equilateral(double side)
{
    const double R = side / std::sqrt(3.0);
    PointCloud p(2);
    for (int k = 0; k < 3; ++k) {
        const double a = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * k / 3.0;
        p.push_back(V(R * std::cos(a), R * std::sin(a)));
    }
    return p;
}

bool grid_member(const PointCloud& pts, double r, const V& q, double cell)
{
    const GridSpec g = make_grid(pts, 2.0 * r + 2.0 * cell, cell);
    return grid_closing(pts, r, g).mask.contains(q);
}

} // namespace

TEST_CASE("membership examples")
{
    CHECK(RHull(PointCloud{{0.0, 0.0}}, 1.0).contains(V(0.0, 0.0)));

    const PointCloud pair{{0.0, 0.0}, {1.0, 0.0}};
    CHECK_FALSE(RHull(pair, 1.0).contains(V(0.5, 0.0)));
    CHECK_FALSE(grid_member(pair, 1.0, V(0.5, 0.0), 0.005));
    CHECK(support::brute_max_distance(pair, V(0.5, 0.0), 1.0) > 1.0);

    const PointCloud tri = equilateral(0.2);
    CHECK(RHull(tri, 1.0).contains(V(0.0, 0.0)));
    CHECK(grid_member(tri, 1.0, V(0.0, 0.0), 0.005));
}

TEST_CASE("generators are members at every radius")
{
    support::TestRng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        const PointCloud pts = support::uniform_points(rng, rng.integer(1, 40), -1.0, 1.0);
        const RHull h(pts, rng.uniform(0.01, 2.0));
        for (Eigen::Index i = 0; i < pts.size(); ++i)
            CHECK(h.contains(pts[i].transpose()));
    }
}

TEST_CASE("membership agrees with the brute-force maximizer")
{
    support::TestRng rng(12);
    int compared = 0;
    for (int rep = 0; rep < 150; ++rep) {
        const PointCloud pts = support::uniform_points(rng, rng.integer(1, 14), 0.0, 1.0);
        const double r = rng.uniform(0.05, 0.8);
        const RHull h(pts, r);
        for (int k = 0; k < 40; ++k) {
            const V q(rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2));
            const double m = support::brute_max_distance(pts, q, r);
            if (std::abs(m - r) < 1e-7)
                continue;
            ++compared;
            CHECK(h.contains(q) == (m < r));
        }
    }
    CHECK(compared > 5000);
}

TEST_CASE("nestedness in the radius")
{
    support::TestRng rng(13);
    for (int rep = 0; rep < 150; ++rep) {
        const PointCloud pts = support::uniform_points(rng, rng.integer(2, 30), 0.0, 1.0);
        const double r = rng.uniform(0.05, 0.8);
        const double r_small = r * rng.uniform(0.1, 1.0);
        const RHull big(pts, r);
        const RHull small = big.with_radius(r_small);
        for (int k = 0; k < 60; ++k) {
            const V q(rng.uniform(-0.1, 1.1), rng.uniform(-0.1, 1.1));
            if (small.contains(q))
                CHECK(big.contains(q));
        }
    }
}

TEST_CASE("hull lies inside the convex hull")
{
    support::TestRng rng(14);
    for (int rep = 0; rep < 150; ++rep) {
        const PointCloud pts = support::uniform_points(rng, rng.integer(1, 25), 0.0, 1.0);
        const RHull h(pts, rng.uniform(0.05, 5.0));
        const ConvexHull2 hull(pts);
        for (int k = 0; k < 60; ++k) {
            const V q(rng.uniform(-0.1, 1.1), rng.uniform(-0.1, 1.1));
            if (h.contains(q)) {
                CHECK(hull.contains(q));
                CHECK(support::brute_convex_contains(pts, q, 1e-9));
            }
        }
    }
}

TEST_CASE("with_radius matches a fresh hull")
{
    support::TestRng rng(15);
    const PointCloud pts = support::uniform_points(rng, 30, 0.0, 1.0);
    const RHull base(pts, 0.1);
    for (double r : {0.05, 0.2, 0.4}) {
        const RHull a = base.with_radius(r);
        const RHull b(pts, r);
        CHECK(a.radius() == r);
        for (int k = 0; k < 200; ++k) {
            const V q(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0));
            CHECK(a.contains(q) == b.contains(q));
        }
    }
}

TEST_CASE("duplicates are dropped before triangulation")
{
    const PointCloud pts{{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {0.5, 0.8}, {1.0, 0.0}};
    const RHull h(pts, 2.0);
    CHECK(h.generators().size() == 3);
    CHECK(h.contains(V(0.5, 0.3)));
}

TEST_CASE("singleton boundary")
{
    for (double r : {0.01, 1.0, 100.0}) {
        const HullBoundary b = hull_boundary(RHull(PointCloud{{0.3, -0.2}}, r));
        CHECK(b.arcs.empty());
        REQUIRE(b.isolated_points.size() == 1);
        CHECK(b.isolated_points[0](0) == 0.3);
        CHECK(b.isolated_points[0](1) == -0.2);
        CHECK(b.chain_count() == 0);
    }
}

TEST_CASE("two concentric circles: hole at r = 0.15, filled at r = 0.25")
{
    const PointCloud pts = support::concentric_circles({0.4, 0.2}, 200);
    const HullBoundary open = hull_boundary(RHull(pts, 0.15));
    CHECK(open.chain_count() == 2);
    CHECK(open.isolated_points.empty());
    const HullBoundary filled = hull_boundary(RHull(pts, 0.25));
    CHECK(filled.chain_count() == 1);
    for (const auto& arc : filled.arcs)
        CHECK(arc.center.norm() > 0.4);

    const GridSpec g = make_grid(pts, 0.6, 0.005);
    CHECK_FALSE(grid_closing(pts, 0.15, g).mask.contains(V(0.0, 0.0)));
    CHECK(grid_closing(pts, 0.25, g).mask.contains(V(0.0, 0.0)));
}

TEST_CASE("boundary arcs lie on the hull boundary")
{
    support::TestRng rng(16);
    for (int rep = 0; rep < 120; ++rep) {
        const PointCloud pts = support::uniform_points(rng, rng.integer(2, 30), 0.0, 1.0);
        const double r = rng.uniform(0.05, 0.6);
        const RHull h(pts, r);
        const HullBoundary b = hull_boundary(h);
        std::vector<V> ends;
        for (const auto& arc : b.arcs) {
            ends.push_back(arc.at(arc.theta0));
            ends.push_back(arc.at(arc.theta1));
        }
        for (const auto& arc : b.arcs) {
            CHECK(arc.radius == r);
            CHECK(arc.theta1 > arc.theta0);
            CHECK(arc.theta1 - arc.theta0 <= std::numbers::pi + 1e-12);
            // the ball behind the arc is empty
            CHECK(support::nearest_distance(pts, arc.center) >= r - 1e-9);
            for (int k = 0; k <= 100; ++k)
                CHECK(h.contains(arc.at(arc.theta0 + (arc.theta1 - arc.theta0) * k / 100.0)));
            // endpoints are generators or meet another arc's endpoint
            for (auto [theta, g] : {std::pair{arc.theta0, arc.a}, std::pair{arc.theta1, arc.b}}) {
                const V e = arc.at(theta);
                if (g >= 0) {
                    CHECK((e - h.generators()[g].transpose()).norm() < 1e-9);
                } else {
                    int meeting = 0;
                    for (const V& o : ends)
                        meeting += (o - e).norm() < 1e-8 ? 1 : 0;
                    CHECK(meeting >= 2);
                }
            }
        }
    }
}

TEST_CASE("every boundary generator is reached")
{
    support::TestRng rng(17);
    for (int rep = 0; rep < 120; ++rep) {
        const PointCloud pts = support::uniform_points(rng, rng.integer(1, 30), 0.0, 1.0);
        const double r = rng.uniform(0.02, 0.6);
        const HullBoundary b = hull_boundary(RHull(pts, r));
        for (Eigen::Index i = 0; i < pts.size(); ++i) {
            const V p = pts[i].transpose();
            // p is on the boundary iff some empty r-ball touches it: probe
            // centers on the circle of radius r around p.
            bool on_boundary = false;
            for (int k = 0; k < 720 && !on_boundary; ++k) {
                const double a = 2.0 * std::numbers::pi * k / 720.0;
                on_boundary = support::nearest_distance(pts, p + r * V(std::cos(a), std::sin(a))) >= r * (1.0 - 1e-6);
            }
            if (!on_boundary)
                continue;
            bool reached = false;
            for (const auto& arc : b.arcs)
                reached = reached || (arc.at(arc.theta0) - p).norm() < 1e-9 || (arc.at(arc.theta1) - p).norm() < 1e-9;
            for (Eigen::Index k = 0; k < b.isolated_points.size(); ++k)
                reached = reached || (b.isolated_points[k].transpose() - p).norm() == 0.0;
            CHECK(reached);
        }
    }
}

TEST_CASE("a pair with both discs empty reduces to two points")
{
    // Every point strictly between them is covered by some empty r-ball.
    const PointCloud pts{{0.0, 0.0}, {0.5, 0.0}};
    const RHull h(pts, 1.0);
    CHECK_FALSE(h.contains(V(0.25, 0.0)));
    CHECK(support::brute_max_distance(pts, V(0.25, 0.0), 1.0) > 1.0);
    const HullBoundary b = hull_boundary(h);
    CHECK(b.arcs.empty());
    CHECK(b.isolated_points.size() == 2);
}

TEST_CASE("separation examples")
{
    const PointCloud ring = support::deterministic_ring();
    const PointCloud origin{{0.0, 0.0}};
    CHECK(hull_separates(ring, PointCloud(2), 0.15));
    CHECK(hull_separates(ring, origin, 0.15));
    CHECK_FALSE(hull_separates(ring, origin, 0.25));

    const GridSpec g = make_grid(ring, 0.6, 0.005);
    CHECK_FALSE(grid_closing(ring, 0.15, g).mask.contains(V(0.0, 0.0)));
    CHECK(grid_closing(ring, 0.25, g).mask.contains(V(0.0, 0.0)));

    const RHull h(ring, 0.15);
    CHECK(hull_separates(h, origin, 0.15));
    CHECK_FALSE(hull_separates(h, origin, 0.25));
    CHECK_THROWS_AS(hull_separates(PointCloud(2), origin, 0.1), EstimationError);
    CHECK_THROWS_AS(hull_separates(ring, PointCloud{{0.0, 0.0, 0.0}}, 0.1), ValidationError);
}

TEST_CASE("convex hull examples")
{
    const PointCloud tri{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    CHECK(convex_hull_contains(tri, V(0.2, 0.2)));
    CHECK_FALSE(convex_hull_contains(tri, V(1.0, 1.0)));
    CHECK(convex_hull_contains(tri, V(0.5, 0.5)));

    const PointCloud line{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    CHECK(convex_hull_contains(line, V(1.5, 0.0)));
    CHECK_FALSE(convex_hull_contains(line, V(1.5, 0.1)));
    CHECK_FALSE(convex_hull_contains(line, V(2.5, 0.0)));
    CHECK(support::brute_convex_contains(line, V(1.5, 0.0)));

    CHECK(convex_hull_contains(PointCloud{{1.0, 1.0}}, V(1.0, 1.0)));
    CHECK_FALSE(convex_hull_contains(PointCloud{{1.0, 1.0}}, V(1.0, 1.1)));
    CHECK_THROWS_AS(ConvexHull2(PointCloud(2)), ValidationError);
    CHECK_THROWS_AS(ConvexHull2(PointCloud{{0.0, 0.0, 0.0}}), ValidationError);
}

TEST_CASE("convex hull agrees with brute force")
{
    support::TestRng rng(18);
    for (int rep = 0; rep < 200; ++rep) {
        const PointCloud pts = support::uniform_points(rng, rng.integer(1, 20), 0.0, 1.0);
        const ConvexHull2 hull(pts);
        for (int k = 0; k < 50; ++k) {
            const V q(rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2));
            CHECK(hull.contains(q) == support::brute_convex_contains(pts, q));
        }
    }
}

TEST_CASE("three-dimensional hulls use the grid")
{
    const PointCloud pair{{0.0, 0.0, 0.0}, {3.0, 0.0, 0.0}};
    const RHull h(pair, 1.0);
    CHECK(h.contains(Eigen::Vector3d(0.0, 0.0, 0.0)));
    CHECK(h.contains(Eigen::Vector3d(3.0, 0.0, 0.0)));
    CHECK_FALSE(h.contains(Eigen::Vector3d(1.5, 0.0, 0.0)));

    PointCloud cube(3);
    for (int i = 0; i < 8; ++i)
        cube.push_back(Eigen::Vector3d(0.1 * (i & 1), 0.1 * ((i >> 1) & 1), 0.1 * ((i >> 2) & 1)));
    const RHull c(cube, 1.0);
    CHECK(c.contains(Eigen::Vector3d(0.05, 0.05, 0.05)));
    CHECK_FALSE(c.contains(Eigen::Vector3d(0.5, 0.5, 0.5)));
    CHECK_THROWS_AS(hull_boundary(c), ValidationError);
}

TEST_CASE("invalid hulls")
{
    CHECK_THROWS_AS(RHull(PointCloud(2), 1.0), ValidationError);
    CHECK_THROWS_AS(RHull(PointCloud{{0.0, 0.0}}, 0.0), ValidationError);
    CHECK_THROWS_AS(RHull(PointCloud{{0.0, 0.0}}, -1.0), ValidationError);
    CHECK_THROWS_AS(RHull(PointCloud{{0.0, 0.0}}, std::nan("")), ValidationError);
    const RHull h(PointCloud{{0.0, 0.0}}, 1.0);
    CHECK_THROWS_AS(h.contains(Eigen::Vector3d(0.0, 0.0, 0.0)), ValidationError);
    CHECK_THROWS_AS(h.contains(V(std::nan(""), 0.0)), ValidationError);
    CHECK_THROWS_AS(h.with_radius(0.0), ValidationError);
}
