#pragma once

#include "levelhull/point_cloud.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace levelhull {

enum class KernelFamily { epanechnikov_product, biweight_product };

/// Bounded-support product kernel. Both provided families have order 2 and
/// support [-1, 1] per coordinate.
struct KernelSpec {
    KernelFamily family = KernelFamily::epanechnikov_product;
    int order = 2;
};

KernelFamily parse_kernel_family(const std::string& name);
std::string to_string(KernelFamily family);

template <typename Scalar>
Scalar epanechnikov(Scalar u)
{
    const Scalar a = u < Scalar(0) ? -u : u;
    return a < Scalar(1) ? Scalar(0.75) * (Scalar(1) - u * u) : Scalar(0);
}

template <typename Scalar>
Scalar biweight(Scalar u)
{
    const Scalar a = u < Scalar(0) ? -u : u;
    if (!(a < Scalar(1)))
        return Scalar(0);
    const Scalar w = Scalar(1) - u * u;
    return Scalar(15) / Scalar(16) * w * w;
}

/// Product kernel K(u) = prod_j k(u_j).
template <typename Derived>
typename Derived::Scalar product_kernel(const KernelSpec& spec, const Eigen::MatrixBase<Derived>& u)
{
    using Scalar = typename Derived::Scalar;
    Scalar k(1);
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        k *= spec.family == KernelFamily::epanechnikov_product ? epanechnikov(u(j)) : biweight(u(j));
        if (k == Scalar(0))
            break;
    }
    return k;
}

/// c * (log n / n)^(1 / (d + 2p)), natural log.
double default_bandwidth(long long n, int d, int p, double c);

/// Scale constant used when the caller gives none: half the geometric mean
/// of the per-coordinate sample standard deviations.
double default_bandwidth_scale(const PointCloud& sample);

/// Kernel density estimate f_n over a fixed sample.
class DensityModel {
public:
    DensityModel(PointCloud sample, KernelSpec kernel, double bandwidth);

    const PointCloud& sample() const { return sample_; }
    const KernelSpec& kernel() const { return kernel_; }
    double bandwidth() const { return bandwidth_; }
    Eigen::Index dim() const { return sample_.dim(); }

    /// Sample indices that can contribute at q (ascending), from the
    /// bucket grid of side h.
    std::vector<Eigen::Index> candidates(const Eigen::Ref<const Eigen::VectorXd>& q) const;

private:
    struct KeyHash {
        std::size_t operator()(const std::vector<std::int64_t>& k) const noexcept;
    };
    std::vector<std::int64_t> key_of(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    PointCloud sample_;
    KernelSpec kernel_;
    double bandwidth_;
    Point origin_;
    std::unordered_map<std::vector<std::int64_t>, std::vector<Eigen::Index>, KeyHash> buckets_;
};

/// (1 / (n h^d)) sum_i K((q - X_i) / h), summed over the whole sample.
double kde_evaluate(const DensityModel& model, const Eigen::Ref<const Eigen::VectorXd>& query);

/// Elementwise kde_evaluate using the bucket grid; bitwise identical to the
/// naive sum because non-contributing terms are exact zeros.
std::vector<double> kde_evaluate_batch(const DensityModel& model, const PointCloud& queries);

} // namespace levelhull
