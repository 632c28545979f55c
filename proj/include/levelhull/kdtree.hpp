#pragma once

#include "levelhull/point_cloud.hpp"

#include <utility>
#include <vector>

namespace levelhull {

/// Static k-d tree over the rows of a PointCloud for nearest-neighbour
/// queries. Holds its own copy of the coordinates.
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(const PointCloud& cloud);

    bool empty() const { return index_.empty(); }

    /// Index and squared distance of the nearest point. Ties resolve to the
    /// smallest index.
    std::pair<Eigen::Index, double> nearest(const Eigen::Ref<const Eigen::VectorXd>& q) const;

    /// Indices of all points within distance `radius` (closed), ascending.
    std::vector<Eigen::Index> within(const Eigen::Ref<const Eigen::VectorXd>& q, double radius) const;

private:
    struct Node {
        int lo = 0;
        int hi = 0;
        int split_dim = -1; // -1 for a leaf
        double split = 0.0;
        int left = -1;
        int right = -1;
    };

    int build(int lo, int hi, int depth);
    void search(int node, const Eigen::Ref<const Eigen::VectorXd>& q, Eigen::Index& best, double& best_d2) const;
    void collect(int node, const Eigen::Ref<const Eigen::VectorXd>& q, double r2, std::vector<Eigen::Index>& out) const;

    PointMatrix pts_;
    std::vector<Eigen::Index> index_;
    std::vector<Node> nodes_;
};

} // namespace levelhull
