#include "levelhull/kdtree.hpp"

#include "levelhull/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace levelhull {

namespace {
constexpr int kLeafSize = 8;
}

KdTree::KdTree(const PointCloud& cloud) : pts_(cloud.matrix())
{
    index_.resize(static_cast<std::size_t>(pts_.rows()));
    std::iota(index_.begin(), index_.end(), Eigen::Index{0});
    if (!index_.empty())
        build(0, static_cast<int>(index_.size()), 0);
}

int KdTree::build(int lo, int hi, int depth)
{
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({lo, hi});
    if (hi - lo <= kLeafSize)
        return id;

    // split on the widest axis
    const Eigen::Index d = pts_.cols();
    Eigen::Index axis = 0;
    double widest = -1.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        double mn = std::numeric_limits<double>::infinity(), mx = -mn;
        for (int k = lo; k < hi; ++k) {
            const double v = pts_(index_[static_cast<std::size_t>(k)], j);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        if (mx - mn > widest) {
            widest = mx - mn;
            axis = j;
        }
    }
    if (widest <= 0.0)
        return id; // all points coincide along every axis

    const int mid = lo + (hi - lo) / 2;
    std::nth_element(index_.begin() + lo, index_.begin() + mid, index_.begin() + hi,
                     [&](Eigen::Index a, Eigen::Index b) { return pts_(a, axis) < pts_(b, axis); });
    const double split = pts_(index_[static_cast<std::size_t>(mid)], axis);
    const int left = build(lo, mid, depth + 1);
    const int right = build(mid, hi, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.split_dim = static_cast<int>(axis);
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
}

std::pair<Eigen::Index, double> KdTree::nearest(const Eigen::Ref<const Eigen::VectorXd>& q) const
{
    if (empty())
        throw ValidationError("nearest-neighbour query on an empty set");
    if (q.size() != pts_.cols())
        throw ValidationError("nearest-neighbour query dimension mismatch");
    Eigen::Index best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(0, q, best, best_d2);
    return {best, best_d2};
}

void KdTree::search(int node_id, const Eigen::Ref<const Eigen::VectorXd>& q, Eigen::Index& best, double& best_d2) const
{
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.split_dim < 0) {
        for (int k = node.lo; k < node.hi; ++k) {
            const Eigen::Index i = index_[static_cast<std::size_t>(k)];
            const double d2 = (pts_.row(i).transpose() - q).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
                best_d2 = d2;
                best = i;
            }
        }
        return;
    }
    const double diff = q(node.split_dim) - node.split;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    search(near, q, best, best_d2);
    if (diff * diff <= best_d2)
        search(far, q, best, best_d2);
}

std::vector<Eigen::Index> KdTree::within(const Eigen::Ref<const Eigen::VectorXd>& q, double radius) const
{
    std::vector<Eigen::Index> out;
    if (empty())
        return out;
    if (q.size() != pts_.cols())
        throw ValidationError("range query dimension mismatch");
    collect(0, q, radius * radius, out);
    std::sort(out.begin(), out.end());
    return out;
}

void KdTree::collect(int node_id, const Eigen::Ref<const Eigen::VectorXd>& q, double r2, std::vector<Eigen::Index>& out) const
{
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.split_dim < 0) {
        for (int k = node.lo; k < node.hi; ++k) {
            const Eigen::Index i = index_[static_cast<std::size_t>(k)];
            if ((pts_.row(i).transpose() - q).squaredNorm() <= r2)
                out.push_back(i);
        }
        return;
    }
    const double diff = q(node.split_dim) - node.split;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    collect(near, q, r2, out);
    if (diff * diff <= r2)
        collect(far, q, r2, out);
}

} // namespace levelhull
