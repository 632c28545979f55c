#pragma once

#include "levelhull/grid.hpp"
#include "levelhull/levelset.hpp"
#include "levelhull/point_cloud.hpp"
#include "levelhull/rhull.hpp"

#include <variant>

namespace levelhull {

/// Any of the set representations the distances accept.
using SetRepr = std::variant<PointCloud, GridMask, RHull>;

/// Rasterize an r-convex hull on `grid` through its closing identity. The
/// grid is extended if it does not cover the generators padded by 2r; the
/// returned mask carries the grid actually used.
GridMask rasterize(const RHull& hull, const GridSpec& grid);

/// Rasterize a level set estimate. A hull goes through its closing when
/// the grid covers the generators padded by 2 r_n; otherwise, and for the
/// convex fallback, cells are tested one by one.
GridMask rasterize(const LevelSetEstimate& est, const GridSpec& grid);

/// Comparison resolution used when the caller passes none: 1/512 of the
/// bounding-box diagonal of both operands.
double default_resolution(const SetRepr& a, const SetRepr& b);

/// Directed and symmetric Hausdorff distances between finite point sets.
double directed_hausdorff(const PointCloud& from, const PointCloud& to);
double hausdorff(const PointCloud& a, const PointCloud& b);

/// Hausdorff distance between the occupied cell centers of two masks on the
/// same grid, via exact distance transforms.
double hausdorff(const GridMask& a, const GridMask& b);

/// Hausdorff distance between arbitrary representations. Hulls are
/// rasterized at `resolution` on a common grid; point clouds are used as
/// they are. A nonpositive resolution selects default_resolution().
double hausdorff(const SetRepr& a, const SetRepr& b, double resolution = 0.0);

/// Lebesgue measure of the symmetric difference of two masks on the same grid.
double measure_distance(const GridMask& a, const GridMask& b);

} // namespace levelhull
