#include "levelhull/predicates.hpp"

#include "support.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <doctest.h>

#include <cmath>

using levelhull::predicates::incircle;
using levelhull::predicates::orient2d;
using Q = boost::multiprecision::cpp_rational;
using V = Eigen::Vector2d;

namespace {

int sign(const Q& v)
{
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

int exact_orient(const V& a, const V& b, const V& c)
{
    const Q ax(a.x()), ay(a.y()), bx(b.x()), by(b.y()), cx(c.x()), cy(c.y());
    return sign((bx - ax) * (cy - ay) - (by - ay) * (cx - ax));
}

int exact_incircle(const V& a, const V& b, const V& c, const V& d)
{
    const Q adx = Q(a.x()) - Q(d.x()), ady = Q(a.y()) - Q(d.y());
    const Q bdx = Q(b.x()) - Q(d.x()), bdy = Q(b.y()) - Q(d.y());
    const Q cdx = Q(c.x()) - Q(d.x()), cdy = Q(c.y()) - Q(d.y());
    const Q al = adx * adx + ady * ady, bl = bdx * bdx + bdy * bdy, cl = cdx * cdx + cdy * cdy;
    return sign(adx * (bdy * cl - bl * cdy) - ady * (bdx * cl - bl * cdx) + al * (bdx * cdy - bdy * cdx));
}

} // namespace

TEST_CASE("orientation of simple triples")
{
    CHECK(orient2d({0, 0}, {1, 0}, {0, 1}) == 1);
    CHECK(orient2d({0, 0}, {0, 1}, {1, 0}) == -1);
    CHECK(orient2d({0, 0}, {1, 1}, {2, 2}) == 0);
}

TEST_CASE("in-circle of simple quadruples")
{
    CHECK(incircle({0, 0}, {1, 0}, {0, 1}, {0.5, 0.5}) == 1);
    CHECK(incircle({0, 0}, {1, 0}, {0, 1}, {2, 2}) == -1);
    CHECK(incircle({0, 0}, {1, 0}, {0, 1}, {1, 1}) == 0);
}

TEST_CASE("near-degenerate orientation matches rational arithmetic")
{
    support::TestRng rng(11);
    for (int k = 0; k < 2000; ++k) {
        const V a(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const V b(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const double t = rng.uniform(-2, 2);
        V c = a + t * (b - a);
        // A few ulps off the line in a random direction.
        c.x() = std::nextafter(c.x(), rng.uniform() < 0.5 ? -10.0 : 10.0);
        CHECK(orient2d(a, b, c) == exact_orient(a, b, c));
        CHECK(orient2d(a, b, a + t * (b - a)) == exact_orient(a, b, a + t * (b - a)));
    }
}

TEST_CASE("near-cocircular in-circle matches rational arithmetic")
{
    support::TestRng rng(12);
    for (int k = 0; k < 2000; ++k) {
        const V center(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const double r = rng.uniform(0.1, 2.0);
        V p[4];
        for (auto& q : p) {
            const double phi = rng.uniform(0, 6.283185307179586);
            q = center + r * V(std::cos(phi), std::sin(phi));
        }
        if (k % 2)
            p[3].y() = std::nextafter(p[3].y(), 10.0);
        if (exact_orient(p[0], p[1], p[2]) == 0)
            continue;
        CHECK(incircle(p[0], p[1], p[2], p[3]) == exact_incircle(p[0], p[1], p[2], p[3]));
    }
}

TEST_CASE("integer lattice cocircularity is detected exactly")
{
    CHECK(incircle({0, 0}, {4, 0}, {4, 4}, {0, 4}) == 0);
    CHECK(incircle({1e8, 1e8}, {1e8 + 4, 1e8}, {1e8 + 4, 1e8 + 4}, {1e8, 1e8 + 4}) == 0);
}
