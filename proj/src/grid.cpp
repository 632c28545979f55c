#include "levelhull/grid.hpp"

#include "levelhull/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace levelhull {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Squared lattice radius shared by dilation and erosion so that the two
// stay adjoint on lattice inputs.
double lattice_threshold(double r, double cell)
{
    const double rho = r / cell;
    return rho * rho * (1.0 + 1e-9);
}

// 1-D lower envelope of parabolas (Felzenszwalb & Huttenlocher).
void edt_1d(const double* f, double* d, Eigen::Index n, std::vector<Eigen::Index>& v, std::vector<double>& z)
{
    v.assign(static_cast<std::size_t>(n), 0);
    z.assign(static_cast<std::size_t>(n) + 1, 0.0);
    Eigen::Index k = -1;
    for (Eigen::Index q = 0; q < n; ++q) {
        if (f[q] == kInf)
            continue;
        const double fq = f[q] + static_cast<double>(q) * static_cast<double>(q);
        double s = 0.0;
        while (k >= 0) {
            const Eigen::Index p = v[static_cast<std::size_t>(k)];
            s = (fq - (f[p] + static_cast<double>(p) * static_cast<double>(p))) / (2.0 * static_cast<double>(q - p));
            if (s <= z[static_cast<std::size_t>(k)])
                --k;
            else
                break;
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = k == 0 ? -kInf : s;
        z[static_cast<std::size_t>(k) + 1] = kInf;
    }
    if (k < 0) {
        std::fill(d, d + n, kInf);
        return;
    }
    Eigen::Index j = 0;
    for (Eigen::Index q = 0; q < n; ++q) {
        while (z[static_cast<std::size_t>(j) + 1] < static_cast<double>(q))
            ++j;
        const Eigen::Index p = v[static_cast<std::size_t>(j)];
        const double dq = static_cast<double>(q - p);
        d[q] = dq * dq + f[p];
    }
}

void stamp(std::vector<std::uint8_t>& occ, const GridSpec& g, const std::vector<Eigen::Index>& strides,
           const Eigen::VectorXd& u, Eigen::Index axis, double rem, Eigen::Index base)
{
    const double reach = std::sqrt(rem);
    const auto lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(u(axis) - reach)));
    const auto hi = std::min<Eigen::Index>(g.shape[static_cast<std::size_t>(axis)] - 1,
                                           static_cast<Eigen::Index>(std::floor(u(axis) + reach)));
    for (Eigen::Index k = lo; k <= hi; ++k) {
        const double dk = static_cast<double>(k) - u(axis);
        const double left = rem - dk * dk;
        if (left < 0.0)
            continue;
        const Eigen::Index at = base + k * strides[static_cast<std::size_t>(axis)];
        if (axis == 0)
            occ[static_cast<std::size_t>(at)] = 1;
        else
            stamp(occ, g, strides, u, axis - 1, left, at);
    }
}

} // namespace

Eigen::Index GridSpec::cell_count() const
{
    Eigen::Index n = 1;
    for (auto s : shape)
        n *= s;
    return n;
}

double GridSpec::cell_volume() const
{
    return std::pow(cell, static_cast<double>(shape.size()));
}

std::vector<Eigen::Index> GridSpec::strides() const
{
    std::vector<Eigen::Index> s(shape.size(), 1);
    for (std::size_t j = 1; j < shape.size(); ++j)
        s[j] = s[j - 1] * shape[j - 1];
    return s;
}

Point GridSpec::center(Eigen::Index flat) const
{
    Point c(dim());
    for (std::size_t j = 0; j < shape.size(); ++j) {
        const Eigen::Index k = flat % shape[j];
        flat /= shape[j];
        c(static_cast<Eigen::Index>(j)) = origin(static_cast<Eigen::Index>(j)) + (static_cast<double>(k) + 0.5) * cell;
    }
    return c;
}

std::optional<Eigen::Index> GridSpec::locate(const Eigen::Ref<const Eigen::VectorXd>& q) const
{
    if (q.size() != dim())
        throw ValidationError("grid lookup dimension mismatch");
    Eigen::Index flat = 0, stride = 1;
    for (std::size_t j = 0; j < shape.size(); ++j) {
        const double u = (q(static_cast<Eigen::Index>(j)) - origin(static_cast<Eigen::Index>(j))) / cell;
        if (!(u >= 0.0) || u >= static_cast<double>(shape[j]))
            return std::nullopt;
        flat += static_cast<Eigen::Index>(u) * stride;
        stride *= shape[j];
    }
    return flat;
}

Point GridSpec::upper() const
{
    Point u = origin;
    for (std::size_t j = 0; j < shape.size(); ++j)
        u(static_cast<Eigen::Index>(j)) += cell * static_cast<double>(shape[j]);
    return u;
}

bool GridSpec::same_geometry(const GridSpec& o) const
{
    return shape == o.shape && cell == o.cell && origin.size() == o.origin.size() && origin == o.origin;
}

void GridSpec::validate() const
{
    if (shape.empty())
        throw ValidationError("grid needs at least one axis");
    for (auto s : shape)
        if (s < 1)
            throw ValidationError("grid extents must be at least 1");
    if (!(cell > 0.0) || !std::isfinite(cell))
        throw ValidationError("grid cell must be positive");
    if (origin.size() != dim() || !origin.allFinite())
        throw ValidationError("grid origin has wrong dimension");
}

GridMask::GridMask(GridSpec spec) : grid(std::move(spec))
{
    grid.validate();
    occupied.assign(static_cast<std::size_t>(grid.cell_count()), 0);
}

Eigen::Index GridMask::count() const
{
    return static_cast<Eigen::Index>(std::count(occupied.begin(), occupied.end(), std::uint8_t{1}));
}

bool GridMask::contains(const Eigen::Ref<const Eigen::VectorXd>& q) const
{
    const auto at = grid.locate(q);
    return at && occupied[static_cast<std::size_t>(*at)] != 0;
}

PointCloud GridMask::occupied_centers() const
{
    PointCloud out(grid.dim());
    PointMatrix m(count(), grid.dim());
    Eigen::Index row = 0;
    for (Eigen::Index k = 0; k < grid.cell_count(); ++k)
        if (at(k))
            m.row(row++) = grid.center(k).transpose();
    if (m.rows() == 0)
        return out;
    return PointCloud(std::move(m));
}

GridSpec make_grid(const Point& lower, const Point& upper, double pad, double cell)
{
    if (!(cell > 0.0))
        throw ValidationError("grid cell must be positive");
    if (lower.size() != upper.size() || lower.size() < 1)
        throw ValidationError("grid corners have mismatched dimension");
    GridSpec g;
    g.cell = cell;
    g.origin = lower.array() - pad;
    g.shape.resize(static_cast<std::size_t>(lower.size()));
    for (Eigen::Index j = 0; j < lower.size(); ++j) {
        const double extent = upper(j) - lower(j) + 2.0 * pad;
        g.shape[static_cast<std::size_t>(j)] = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(extent / cell)));
    }
    return g;
}

GridSpec make_grid(const PointCloud& points, double pad, double cell)
{
    if (points.empty())
        throw ValidationError("cannot build a grid around an empty point set");
    return make_grid(points.lower(), points.upper(), pad, cell);
}

std::vector<double> squared_edt(const GridSpec& grid, const std::vector<std::uint8_t>& feature)
{
    grid.validate();
    const Eigen::Index total = grid.cell_count();
    if (static_cast<Eigen::Index>(feature.size()) != total)
        throw ValidationError("feature array does not match grid");
    std::vector<double> dist(static_cast<std::size_t>(total));
    for (Eigen::Index k = 0; k < total; ++k)
        dist[static_cast<std::size_t>(k)] = feature[static_cast<std::size_t>(k)] ? 0.0 : kInf;

    const auto strides = grid.strides();
    std::vector<double> line_in, line_out;
    std::vector<Eigen::Index> v;
    std::vector<double> z;
    for (std::size_t axis = 0; axis < grid.shape.size(); ++axis) {
        const Eigen::Index n = grid.shape[axis];
        const Eigen::Index stride = strides[axis];
        line_in.resize(static_cast<std::size_t>(n));
        line_out.resize(static_cast<std::size_t>(n));
        for (Eigen::Index start = 0; start < total; ++start) {
            // `start` must have coordinate 0 along `axis`.
            if ((start / stride) % n != 0)
                continue;
            for (Eigen::Index k = 0; k < n; ++k)
                line_in[static_cast<std::size_t>(k)] = dist[static_cast<std::size_t>(start + k * stride)];
            edt_1d(line_in.data(), line_out.data(), n, v, z);
            for (Eigen::Index k = 0; k < n; ++k)
                dist[static_cast<std::size_t>(start + k * stride)] = line_out[static_cast<std::size_t>(k)];
        }
    }
    return dist;
}

GridMask dilate_points(const PointCloud& points, double r, const GridSpec& grid)
{
    if (!(r > 0.0))
        throw ValidationError("dilation radius must be positive");
    GridMask mask(grid);
    if (points.empty())
        return mask;
    if (points.dim() != grid.dim())
        throw ValidationError("dilation: point and grid dimensions differ");
    const double threshold = lattice_threshold(r, grid.cell);
    const auto strides = grid.strides();
    const Eigen::Index top = grid.dim() - 1;
    for (Eigen::Index i = 0; i < points.size(); ++i) {
        const Eigen::VectorXd u = (points.point(i) - grid.origin) / grid.cell - Eigen::VectorXd::Constant(grid.dim(), 0.5);
        stamp(mask.occupied, grid, strides, u, top, threshold, 0);
    }
    return mask;
}

GridMask dilate(const GridMask& mask, double r)
{
    if (!(r > 0.0))
        throw ValidationError("dilation radius must be positive");
    const auto d2 = squared_edt(mask.grid, mask.occupied);
    const double threshold = lattice_threshold(r, mask.grid.cell);
    GridMask out(mask.grid);
    for (std::size_t k = 0; k < d2.size(); ++k)
        out.occupied[k] = d2[k] <= threshold ? 1 : 0;
    return out;
}

GridMask closing(const GridMask& mask, double r)
{
    return erode(dilate(mask, r), r);
}

GridMask erode(const GridMask& mask, double r)
{
    if (!(r > 0.0))
        throw ValidationError("erosion radius must be positive");
    std::vector<std::uint8_t> complement(mask.occupied.size());
    for (std::size_t k = 0; k < complement.size(); ++k)
        complement[k] = mask.occupied[k] ? 0 : 1;
    const auto d2 = squared_edt(mask.grid, complement);
    const double threshold = lattice_threshold(r, mask.grid.cell);
    GridMask out(mask.grid);
    for (std::size_t k = 0; k < d2.size(); ++k)
        out.occupied[k] = (mask.occupied[k] && d2[k] > threshold) ? 1 : 0;
    return out;
}

ClosingResult grid_closing(const PointCloud& points, double r, const GridSpec& grid)
{
    if (!(r > 0.0) || !std::isfinite(r))
        throw ValidationError("closing radius must be positive");
    grid.validate();
    if (points.empty())
        return {GridMask(grid), grid.cell > r / 4.0};
    if (points.dim() != grid.dim())
        throw ValidationError("closing: point and grid dimensions differ");
    const Point need_lo = points.lower().array() - 2.0 * r;
    const Point need_hi = points.upper().array() + 2.0 * r;
    const Point have_hi = grid.upper();
    const double slack = 1e-9 * (1.0 + (need_hi - need_lo).norm()) + grid.cell;
    if ((grid.origin - need_lo).maxCoeff() > slack || (need_hi - have_hi).maxCoeff() > slack)
        throw ValidationError("closing grid must cover the points padded by 2r");

    ClosingResult out;
    out.mask = erode(dilate_points(points, r, grid), r);
    out.coarse = grid.cell > r / 4.0;
    return out;
}

ClosingResult grid_closing(const PointCloud& points, double r)
{
    if (!(r > 0.0) || !std::isfinite(r))
        throw ValidationError("closing radius must be positive");
    return grid_closing(points, r, make_grid(points, 2.0 * r + r / 20.0, r / 20.0));
}

Components connected_components(const GridMask& mask)
{
    const auto& g = mask.grid;
    const auto strides = g.strides();
    const Eigen::Index total = g.cell_count();
    Components c;
    c.labels.assign(static_cast<std::size_t>(total), 0);
    std::vector<Eigen::Index> stack;
    for (Eigen::Index s = 0; s < total; ++s) {
        if (!mask.at(s) || c.labels[static_cast<std::size_t>(s)] != 0)
            continue;
        const int label = ++c.count;
        c.labels[static_cast<std::size_t>(s)] = label;
        stack.push_back(s);
        while (!stack.empty()) {
            const Eigen::Index k = stack.back();
            stack.pop_back();
            for (std::size_t axis = 0; axis < g.shape.size(); ++axis) {
                const Eigen::Index coord = (k / strides[axis]) % g.shape[axis];
                for (int dir : {-1, 1}) {
                    const Eigen::Index nc = coord + dir;
                    if (nc < 0 || nc >= g.shape[axis])
                        continue;
                    const Eigen::Index nb = k + dir * strides[axis];
                    if (mask.at(nb) && c.labels[static_cast<std::size_t>(nb)] == 0) {
                        c.labels[static_cast<std::size_t>(nb)] = label;
                        stack.push_back(nb);
                    }
                }
            }
        }
    }
    return c;
}

} // namespace levelhull
