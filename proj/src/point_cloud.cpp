#include "levelhull/point_cloud.hpp"

#include "levelhull/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace levelhull {

namespace {

void check_finite(const PointMatrix& m)
{
    if (!m.allFinite())
        throw ValidationError("point cloud contains non-finite coordinates");
}

} // namespace

PointCloud::PointCloud(Eigen::Index dim) : points_(0, dim), dim_(dim)
{
    if (dim < 1)
        throw ValidationError("point dimension must be at least 1");
}

PointCloud::PointCloud(PointMatrix points) : points_(std::move(points)), dim_(points_.cols())
{
    if (dim_ < 1)
        throw ValidationError("point dimension must be at least 1");
    check_finite(points_);
}

PointCloud::PointCloud(std::initializer_list<std::initializer_list<double>> rows)
{
    if (rows.size() == 0)
        throw ValidationError("initializer list needs at least one row to fix the dimension");
    dim_ = static_cast<Eigen::Index>(rows.begin()->size());
    if (dim_ < 1)
        throw ValidationError("point dimension must be at least 1");
    points_.resize(static_cast<Eigen::Index>(rows.size()), dim_);
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        if (static_cast<Eigen::Index>(r.size()) != dim_)
            throw ValidationError("ragged initializer list");
        Eigen::Index j = 0;
        for (double v : r)
            points_(i, j++) = v;
        ++i;
    }
    check_finite(points_);
}

PointCloud PointCloud::from_rows(const std::vector<Point>& rows, Eigen::Index dim)
{
    PointMatrix m(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != dim)
            throw ValidationError("dimension mismatch while building point cloud");
        m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    PointCloud pc(dim);
    pc.points_ = std::move(m);
    check_finite(pc.points_);
    return pc;
}

void PointCloud::push_back(const Eigen::Ref<const Eigen::VectorXd>& p)
{
    if (dim_ == 0) {
        dim_ = p.size();
        points_.resize(0, dim_);
    }
    if (p.size() != dim_)
        throw ValidationError("dimension mismatch in push_back");
    if (!p.allFinite())
        throw ValidationError("point contains non-finite coordinates");
    points_.conservativeResize(points_.rows() + 1, Eigen::NoChange);
    points_.row(points_.rows() - 1) = p.transpose();
}

PointCloud PointCloud::select(const std::vector<Eigen::Index>& idx) const
{
    PointCloud out(dim_ > 0 ? dim_ : 1);
    out.points_.resize(static_cast<Eigen::Index>(idx.size()), dim_);
    for (std::size_t k = 0; k < idx.size(); ++k)
        out.points_.row(static_cast<Eigen::Index>(k)) = points_.row(idx[k]);
    return out;
}

Point PointCloud::lower() const
{
    if (empty())
        return Point::Zero(dim_);
    return points_.colwise().minCoeff().transpose();
}

Point PointCloud::upper() const
{
    if (empty())
        return Point::Zero(dim_);
    return points_.colwise().maxCoeff().transpose();
}

double PointCloud::diameter_bound() const
{
    if (empty())
        return 0.0;
    return (upper() - lower()).norm();
}

std::size_t PointCloud::remove_duplicates()
{
    const Eigen::Index n = size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < dim_; ++j) {
            if (points_(a, j) != points_(b, j))
                return points_(a, j) < points_(b, j);
        }
        return a < b;
    };
    std::sort(order.begin(), order.end(), less);
    std::vector<char> keep(static_cast<std::size_t>(n), 1);
    for (std::size_t k = 1; k < order.size(); ++k) {
        if (points_.row(order[k]) == points_.row(order[k - 1]))
            keep[static_cast<std::size_t>(order[k])] = 0;
    }
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < n; ++i)
        if (keep[static_cast<std::size_t>(i)])
            kept.push_back(i);
    const std::size_t removed = static_cast<std::size_t>(n) - kept.size();
    if (removed > 0)
        *this = select(kept);
    return removed;
}

} // namespace levelhull
