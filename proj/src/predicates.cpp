#include "levelhull/predicates.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>

namespace levelhull::predicates {

namespace {

using Rational = boost::multiprecision::cpp_rational;

// Forward error bounds for the plain double evaluation (Shewchuk's
// ccwerrboundA / iccerrboundA). Below these the sign is recomputed exactly.
constexpr double kOrientBound = 3.3306690738754716e-16;
constexpr double kIncircleBound = 1.1102230246251577e-15;

int sign_of(const Rational& v)
{
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

int orient_exact(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
{
    const Rational ax(a.x()), ay(a.y()), bx(b.x()), by(b.y()), cx(c.x()), cy(c.y());
    return sign_of((ax - cx) * (by - cy) - (ay - cy) * (bx - cx));
}

int incircle_exact(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                   const Eigen::Vector2d& d)
{
    const Rational dx(d.x()), dy(d.y());
    const Rational adx = Rational(a.x()) - dx, ady = Rational(a.y()) - dy;
    const Rational bdx = Rational(b.x()) - dx, bdy = Rational(b.y()) - dy;
    const Rational cdx = Rational(c.x()) - dx, cdy = Rational(c.y()) - dy;
    const Rational alift = adx * adx + ady * ady;
    const Rational blift = bdx * bdx + bdy * bdy;
    const Rational clift = cdx * cdx + cdy * cdy;
    const Rational det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy)
                         + clift * (adx * bdy - bdx * ady);
    return sign_of(det);
}

} // namespace

int orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
{
    const double detleft = (a.x() - c.x()) * (b.y() - c.y());
    const double detright = (a.y() - c.y()) * (b.x() - c.x());
    const double det = detleft - detright;
    const double bound = kOrientBound * (std::abs(detleft) + std::abs(detright));
    if (det > bound)
        return 1;
    if (-det > bound)
        return -1;
    return orient_exact(a, b, c);
}

int incircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
             const Eigen::Vector2d& d)
{
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();

    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;

    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift
                             + (std::abs(cdxady) + std::abs(adxcdy)) * blift
                             + (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double bound = kIncircleBound * permanent;
    if (det > bound)
        return 1;
    if (-det > bound)
        return -1;
    return incircle_exact(a, b, c, d);
}

} // namespace levelhull::predicates
