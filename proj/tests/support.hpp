#pragma once

// Seeded generators, fixtures and brute-force oracles shared by the tests.
// Nothing here calls into the geometric code under test.

#include "levelhull/point_cloud.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace support {

using levelhull::PointCloud;
using levelhull::PointMatrix;

/// splitmix64 stream; independent of the library generator.
class TestRng {
public:
    explicit TestRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

private:
    std::uint64_t state_;
};

inline PointCloud uniform_points(TestRng& rng, int n, double lo, double hi, int dim = 2)
{
    PointMatrix m(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j)
            m(i, j) = rng.uniform(lo, hi);
    return PointCloud(std::move(m));
}

/// Uniform sample of the annulus r_in <= |x| <= r_out.
inline PointCloud annulus_sample(TestRng& rng, int n, double r_in, double r_out)
{
    PointMatrix m(n, 2);
    for (int i = 0; i < n; ++i) {
        const double rho = std::sqrt(rng.uniform(r_in * r_in, r_out * r_out));
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        m(i, 0) = rho * std::cos(phi);
        m(i, 1) = rho * std::sin(phi);
    }
    return PointCloud(std::move(m));
}

/// `per_circle` evenly spaced points on each of the given radii; circle k
/// is rotated by half a step when k is odd.
inline PointCloud concentric_circles(const std::vector<double>& radii, int per_circle)
{
    PointMatrix m(static_cast<Eigen::Index>(radii.size()) * per_circle, 2);
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < radii.size(); ++k)
        for (int i = 0; i < per_circle; ++i) {
            const double phi = 2.0 * std::numbers::pi * (i + 0.5 * static_cast<double>(k % 2)) / per_circle;
            m(row, 0) = radii[k] * std::cos(phi);
            m(row, 1) = radii[k] * std::sin(phi);
            ++row;
        }
    return PointCloud(std::move(m));
}

/// The deterministic 400-point ring used for r0 checks: five circles of 80
/// points with radii 0.2, 0.25, ..., 0.4.
inline PointCloud deterministic_ring()
{
    return concentric_circles({0.2, 0.25, 0.3, 0.35, 0.4}, 80);
}

inline double nearest_distance(const PointCloud& a, const Eigen::Vector2d& c)
{
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < a.size(); ++i)
        best = std::min(best, (a.matrix().row(i).transpose().head<2>() - c).norm());
    return best;
}

/// max over the closed disc B(q, r) of the distance to `a`, by enumerating
/// every candidate maximizer: circumcenters of all triples inside the disc,
/// intersections of all pairwise bisectors with the circle, and the circle
/// point opposite each site. O(n^3); meant for small inputs.
inline double brute_max_distance(const PointCloud& a, const Eigen::Vector2d& q, double r)
{
    const Eigen::Index n = a.size();
    auto p = [&](Eigen::Index i) { return Eigen::Vector2d(a.matrix()(i, 0), a.matrix()(i, 1)); };
    double best = nearest_distance(a, q);
    auto consider = [&](const Eigen::Vector2d& c) {
        if ((c - q).norm() <= r * (1.0 + 1e-12))
            best = std::max(best, nearest_distance(a, c));
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Vector2d d = q - p(i);
        if (d.norm() > 0.0)
            consider(q + r * d / d.norm());
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            // Bisector m + s u against |x - q| = r.
            const Eigen::Vector2d m = 0.5 * (p(i) + p(j));
            Eigen::Vector2d u = p(j) - p(i);
            u = Eigen::Vector2d(-u.y(), u.x()).normalized();
            const Eigen::Vector2d w = m - q;
            const double bq = w.dot(u);
            const double disc = bq * bq - (w.squaredNorm() - r * r);
            if (disc < 0.0)
                continue;
            const double root = std::sqrt(disc);
            consider(m + (-bq - root) * u);
            consider(m + (-bq + root) * u);
        }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            for (Eigen::Index k = j + 1; k < n; ++k) {
                const Eigen::Vector2d A = p(i), B = p(j), C = p(k);
                const double d = 2.0 * (A.x() * (B.y() - C.y()) + B.x() * (C.y() - A.y()) + C.x() * (A.y() - B.y()));
                if (d == 0.0)
                    continue;
                const double a2 = A.squaredNorm(), b2 = B.squaredNorm(), c2 = C.squaredNorm();
                const Eigen::Vector2d cc((a2 * (B.y() - C.y()) + b2 * (C.y() - A.y()) + c2 * (A.y() - B.y())) / d,
                                         (a2 * (C.x() - B.x()) + b2 * (A.x() - C.x()) + c2 * (B.x() - A.x())) / d);
                consider(cc);
            }
    return best;
}

/// Convex hull membership by brute force: q is outside iff some line
/// through two sites has every site weakly on one side and q strictly on
/// the other. Degenerate (collinear) sets fall back to segment checks.
inline bool brute_convex_contains(const PointCloud& a, const Eigen::Vector2d& q, double eps = 1e-12)
{
    const Eigen::Index n = a.size();
    auto p = [&](Eigen::Index i) { return Eigen::Vector2d(a.matrix()(i, 0), a.matrix()(i, 1)); };
    auto cross = [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) { return u.x() * v.y() - u.y() * v.x(); };
    bool full = false;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || p(i) == p(j))
                continue;
            const Eigen::Vector2d e = p(j) - p(i);
            bool all_left = true, any_strict = false;
            for (Eigen::Index k = 0; k < n; ++k) {
                const double s = cross(e, p(k) - p(i));
                all_left = all_left && s >= -eps;
                any_strict = any_strict || s > eps;
            }
            if (all_left && any_strict) {
                full = true;
                if (cross(e, q - p(i)) < -eps)
                    return false;
            }
        }
    if (full)
        return true;
    // All sites on one line (or a single site): q must lie on a segment.
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Vector2d e = p(j) - p(i);
            if (std::abs(cross(e, q - p(i))) > eps)
                continue;
            const double t = e.squaredNorm() > 0.0 ? e.dot(q - p(i)) / e.squaredNorm() : 0.0;
            if (t >= -eps && t <= 1.0 + eps && (p(i) + t * e - q).norm() <= 1e-9)
                return true;
        }
    return false;
}

} // namespace support
