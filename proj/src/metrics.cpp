#include "levelhull/metrics.hpp"

#include "levelhull/error.hpp"
#include "levelhull/kdtree.hpp"

#include <algorithm>
#include <cmath>

namespace levelhull {

namespace {

struct Box {
    Point lo;
    Point hi;
};

Box box_of(const SetRepr& s)
{
    return std::visit(
        [](const auto& v) -> Box {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PointCloud>) {
                if (v.empty())
                    throw ValidationError("hausdorff: empty point set");
                return {v.lower(), v.upper()};
            } else if constexpr (std::is_same_v<T, GridMask>) {
                return {v.grid.origin, v.grid.upper()};
            } else {
                const auto& g = v.generators();
                return {g.lower().array() - 2.0 * v.radius(), g.upper().array() + 2.0 * v.radius()};
            }
        },
        s);
}

Eigen::Index dim_of(const SetRepr& s)
{
    return std::visit(
        [](const auto& v) -> Eigen::Index {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GridMask>)
                return v.grid.dim();
            else if constexpr (std::is_same_v<T, PointCloud>)
                return v.dim();
            else
                return v.dim();
        },
        s);
}

double mask_directed(const GridMask& from, const std::vector<double>& to_d2)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < from.occupied.size(); ++k)
        if (from.occupied[k])
            worst = std::max(worst, to_d2[k]);
    return std::sqrt(worst) * from.grid.cell;
}

} // namespace

GridMask rasterize(const RHull& hull, const GridSpec& grid)
{
    grid.validate();
    const auto& g = hull.generators();
    const double r = hull.radius();
    const Point need_lo = g.lower().array() - 2.0 * r;
    const Point need_hi = g.upper().array() + 2.0 * r;
    GridSpec use = grid;
    const Point have_hi = grid.upper();
    if ((grid.origin - need_lo).maxCoeff() > 0.0 || (need_hi - have_hi).maxCoeff() > 0.0) {
        // Extend by whole cells so existing cell centers keep their positions.
        for (Eigen::Index j = 0; j < grid.dim(); ++j) {
            const auto below = static_cast<Eigen::Index>(std::max(0.0, std::ceil((grid.origin(j) - need_lo(j)) / grid.cell)));
            const auto above = static_cast<Eigen::Index>(std::max(0.0, std::ceil((need_hi(j) - have_hi(j)) / grid.cell)));
            use.origin(j) -= static_cast<double>(below) * grid.cell;
            use.shape[static_cast<std::size_t>(j)] += below + above;
        }
    }
    return grid_closing(g, r, use).mask;
}

GridMask rasterize(const LevelSetEstimate& est, const GridSpec& grid)
{
    grid.validate();
    if (est.hull) {
        const PointCloud& g = est.hull->generators();
        const double r = est.hull->radius();
        const Point lo = g.lower().array() - 2.0 * r;
        const Point hi = g.upper().array() + 2.0 * r;
        if ((grid.origin - lo).maxCoeff() <= 0.0 && (hi - grid.upper()).maxCoeff() <= 0.0)
            return grid_closing(g, r, grid).mask;
    }
    // Cell by cell; the estimate lies in the bounding box of its generators.
    const PointCloud& plus = est.split.plus;
    const Point lo = plus.lower(), hi = plus.upper();
    GridMask mask(grid);
    for (Eigen::Index k = 0; k < grid.cell_count(); ++k) {
        const Point c = grid.center(k);
        if ((c - lo).minCoeff() < -grid.cell || (hi - c).minCoeff() < -grid.cell)
            continue;
        mask.occupied[static_cast<std::size_t>(k)] = est.contains(c) ? 1 : 0;
    }
    return mask;
}

double default_resolution(const SetRepr& a, const SetRepr& b)
{
    const Box ba = box_of(a), bb = box_of(b);
    const Point lo = ba.lo.cwiseMin(bb.lo), hi = ba.hi.cwiseMax(bb.hi);
    const double diag = (hi - lo).norm();
    return diag > 0.0 ? diag / 512.0 : 1.0 / 512.0;
}

double directed_hausdorff(const PointCloud& from, const PointCloud& to)
{
    if (from.empty() || to.empty())
        throw ValidationError("hausdorff: empty point set");
    if (from.dim() != to.dim())
        throw ValidationError("hausdorff: dimension mismatch");
    const KdTree tree(to);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < from.size(); ++i)
        worst = std::max(worst, tree.nearest(from[i].transpose()).second);
    return std::sqrt(worst);
}

double hausdorff(const PointCloud& a, const PointCloud& b)
{
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double hausdorff(const GridMask& a, const GridMask& b)
{
    if (!a.grid.same_geometry(b.grid))
        throw ValidationError("hausdorff: masks live on different grids");
    if (a.count() == 0 || b.count() == 0)
        throw ValidationError("hausdorff: empty mask");
    const auto to_b = squared_edt(b.grid, b.occupied);
    const auto to_a = squared_edt(a.grid, a.occupied);
    return std::max(mask_directed(a, to_b), mask_directed(b, to_a));
}

double hausdorff(const SetRepr& a, const SetRepr& b, double resolution)
{
    if (dim_of(a) != dim_of(b))
        throw ValidationError("hausdorff: dimension mismatch");
    if (const auto* ma = std::get_if<GridMask>(&a))
        if (const auto* mb = std::get_if<GridMask>(&b))
            return hausdorff(*ma, *mb);

    if (!(resolution > 0.0))
        resolution = default_resolution(a, b);

    const Box ba = box_of(a), bb = box_of(b);
    const GridSpec common = make_grid(ba.lo.cwiseMin(bb.lo), ba.hi.cwiseMax(bb.hi), resolution, resolution);

    auto as_mask = [&](const SetRepr& s) -> std::optional<GridMask> {
        if (const auto* h = std::get_if<RHull>(&s))
            return rasterize(*h, common);
        if (const auto* m = std::get_if<GridMask>(&s))
            return *m;
        return std::nullopt;
    };
    auto ma = as_mask(a);
    auto mb = as_mask(b);
    if (ma && mb && ma->grid.same_geometry(mb->grid))
        return hausdorff(*ma, *mb);

    auto as_points = [](const SetRepr& s, const std::optional<GridMask>& m) {
        if (m)
            return m->occupied_centers();
        return std::get<PointCloud>(s);
    };
    const PointCloud pa = as_points(a, ma);
    const PointCloud pb = as_points(b, mb);
    if (pa.empty() || pb.empty())
        throw ValidationError("hausdorff: empty operand after rasterization");
    return hausdorff(pa, pb);
}

double measure_distance(const GridMask& a, const GridMask& b)
{
    if (!a.grid.same_geometry(b.grid))
        throw ValidationError("measure distance: masks live on different grids");
    Eigen::Index diff = 0;
    for (std::size_t k = 0; k < a.occupied.size(); ++k)
        if ((a.occupied[k] != 0) != (b.occupied[k] != 0))
            ++diff;
    return static_cast<double>(diff) * a.grid.cell_volume();
}

} // namespace levelhull
