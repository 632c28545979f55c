#pragma once

#include "levelhull/point_cloud.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace levelhull {

/// Axis-aligned regular grid. Cell k along axis j has its center at
/// origin(j) + (k + 0.5) * cell. Flat indices run with axis 0 fastest.
struct GridSpec {
    Point origin;
    double cell = 0.0;
    std::vector<Eigen::Index> shape;

    Eigen::Index dim() const { return static_cast<Eigen::Index>(shape.size()); }
    Eigen::Index cell_count() const;
    double cell_volume() const;
    Point center(Eigen::Index flat) const;
    /// Flat index of the cell containing q, if q lies inside the grid.
    std::optional<Eigen::Index> locate(const Eigen::Ref<const Eigen::VectorXd>& q) const;
    std::vector<Eigen::Index> strides() const;
    Point upper() const;

    bool same_geometry(const GridSpec& o) const;
    void validate() const;
};

/// Occupancy over a GridSpec.
struct GridMask {
    GridSpec grid;
    std::vector<std::uint8_t> occupied;

    GridMask() = default;
    explicit GridMask(GridSpec spec);

    bool at(Eigen::Index flat) const { return occupied[static_cast<std::size_t>(flat)] != 0; }
    Eigen::Index count() const;
    double volume() const { return static_cast<double>(count()) * grid.cell_volume(); }
    /// Occupancy of the cell containing q (false outside the grid).
    bool contains(const Eigen::Ref<const Eigen::VectorXd>& q) const;
    /// Centers of all occupied cells, in flat-index order.
    PointCloud occupied_centers() const;
};

/// Grid over the bounding box of `points` enlarged by `pad` on every side.
GridSpec make_grid(const PointCloud& points, double pad, double cell);
/// Same, from explicit corners.
GridSpec make_grid(const Point& lower, const Point& upper, double pad, double cell);

/// Squared Euclidean distance, in units of cells squared, from every cell
/// center to the nearest cell center with `feature` set. Cells with no
/// feature anywhere get +inf. Separable lower-envelope transform, exact.
std::vector<double> squared_edt(const GridSpec& grid, const std::vector<std::uint8_t>& feature);

/// Cells whose center lies within distance r of some point.
GridMask dilate_points(const PointCloud& points, double r, const GridSpec& grid);

/// Cells within lattice distance r of an occupied cell.
GridMask dilate(const GridMask& mask, double r);

/// Cells every one of whose lattice neighbours within distance r is set.
GridMask erode(const GridMask& mask, double r);

struct ClosingResult {
    GridMask mask;
    /// Set when the cell is coarser than r/4.
    bool coarse = false;
};

/// Discretized r-convex hull (A + rB) - rB of `points` on `grid`. The grid
/// must cover the bounding box of the points padded by 2r. A point away
/// from every cell center may fall outside the result.
ClosingResult grid_closing(const PointCloud& points, double r, const GridSpec& grid);

/// Closing of a mask by a ball of radius r. Cells beyond the grid count as
/// empty for the dilation, so the mask should sit 2r away from the edges.
GridMask closing(const GridMask& mask, double r);

/// Convenience overload with the default resolution (cell = r/20, pad 2r).
ClosingResult grid_closing(const PointCloud& points, double r);

/// Face-connected components of the occupied cells. Labels are 0 for empty
/// cells and 1..count otherwise.
struct Components {
    int count = 0;
    std::vector<int> labels;
};
Components connected_components(const GridMask& mask);

} // namespace levelhull
