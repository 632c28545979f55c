#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace levelhull {

using Point = Eigen::VectorXd;
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A finite, ordered set of points in R^d stored one point per row.
///
/// Every coordinate is finite and all points share the same dimension. An
/// empty cloud still carries a dimension so that it can be compared with
/// other clouds.
class PointCloud {
public:
    PointCloud() = default;
    explicit PointCloud(Eigen::Index dim);
    explicit PointCloud(PointMatrix points);
    PointCloud(std::initializer_list<std::initializer_list<double>> rows);

    static PointCloud from_rows(const std::vector<Point>& rows, Eigen::Index dim);

    Eigen::Index size() const { return points_.rows(); }
    Eigen::Index dim() const { return dim_; }
    bool empty() const { return points_.rows() == 0; }

    auto operator[](Eigen::Index i) const { return points_.row(i); }
    Point point(Eigen::Index i) const { return points_.row(i).transpose(); }
    const PointMatrix& matrix() const { return points_; }

    void push_back(const Eigen::Ref<const Eigen::VectorXd>& p);

    /// Subset by index, preserving the order of `idx`.
    PointCloud select(const std::vector<Eigen::Index>& idx) const;

    /// Lower and upper corners of the axis-aligned bounding box.
    Point lower() const;
    Point upper() const;
    /// Length of the bounding-box diagonal (0 for an empty cloud).
    double diameter_bound() const;

    /// Drops exact duplicate points, keeping the first occurrence.
    /// Returns how many points were removed.
    std::size_t remove_duplicates();

    bool operator==(const PointCloud& o) const
    {
        return dim_ == o.dim_ && points_.rows() == o.points_.rows() && points_ == o.points_;
    }

private:
    PointMatrix points_;
    Eigen::Index dim_ = 0;
};

} // namespace levelhull
