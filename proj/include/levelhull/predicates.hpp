#pragma once

#include <Eigen/Core>

namespace levelhull::predicates {

/// Sign of the orientation determinant of (a, b, c): +1 when c lies to the
/// left of the directed line a->b, -1 to the right, 0 when collinear.
/// Exact for all finite double inputs.
int orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c);

/// +1 when d lies strictly inside the circle through the counter-clockwise
/// triangle (a, b, c), -1 strictly outside, 0 on the circle. Exact.
int incircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
             const Eigen::Vector2d& d);

} // namespace levelhull::predicates
