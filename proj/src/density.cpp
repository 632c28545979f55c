#include "levelhull/density.hpp"

#include "levelhull/error.hpp"

#include <algorithm>
#include <cmath>

namespace levelhull {

KernelFamily parse_kernel_family(const std::string& name)
{
    if (name == "epanechnikov" || name == "epanechnikov_product")
        return KernelFamily::epanechnikov_product;
    if (name == "biweight" || name == "biweight_product")
        return KernelFamily::biweight_product;
    throw ValidationError("unknown kernel family '" + name + "'");
}

std::string to_string(KernelFamily family)
{
    return family == KernelFamily::epanechnikov_product ? "epanechnikov" : "biweight";
}

double default_bandwidth(long long n, int d, int p, double c)
{
    if (n < 2)
        throw ValidationError("bandwidth rule needs n >= 2");
    if (d < 1 || p < 1)
        throw ValidationError("bandwidth rule needs d >= 1 and p >= 1");
    if (!(c > 0.0))
        throw ValidationError("bandwidth scale must be positive");
    const double nn = static_cast<double>(n);
    return c * std::pow(std::log(nn) / nn, 1.0 / static_cast<double>(d + 2 * p));
}

double default_bandwidth_scale(const PointCloud& sample)
{
    if (sample.size() < 2)
        throw ValidationError("bandwidth scale needs at least two points");
    const auto& m = sample.matrix();
    const Eigen::RowVectorXd mean = m.colwise().mean();
    double log_sum = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double var = (m.col(j).array() - mean(j)).square().sum() / static_cast<double>(m.rows() - 1);
        if (!(var > 0.0))
            throw ValidationError("bandwidth scale: sample has zero spread along an axis");
        log_sum += 0.5 * std::log(var);
    }
    return 0.5 * std::exp(log_sum / static_cast<double>(m.cols()));
}

std::size_t DensityModel::KeyHash::operator()(const std::vector<std::int64_t>& k) const noexcept
{
    std::size_t h = 1469598103934665603ull;
    for (auto v : k) {
        h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

DensityModel::DensityModel(PointCloud sample, KernelSpec kernel, double bandwidth)
    : sample_(std::move(sample)), kernel_(kernel), bandwidth_(bandwidth)
{
    if (sample_.empty())
        throw ValidationError("density model needs a nonempty sample");
    if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_))
        throw ValidationError("bandwidth must be positive");
    if (kernel_.order != 2)
        throw ValidationError("only order-2 kernels are provided");
    origin_ = sample_.lower();
    for (Eigen::Index i = 0; i < sample_.size(); ++i)
        buckets_[key_of(sample_[i].transpose())].push_back(i);
}

std::vector<std::int64_t> DensityModel::key_of(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
    std::vector<std::int64_t> k(static_cast<std::size_t>(x.size()));
    for (Eigen::Index j = 0; j < x.size(); ++j)
        k[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::floor((x(j) - origin_(j)) / bandwidth_));
    return k;
}

std::vector<Eigen::Index> DensityModel::candidates(const Eigen::Ref<const Eigen::VectorXd>& q) const
{
    std::vector<Eigen::Index> out;
    const auto centre = key_of(q);
    const std::size_t d = centre.size();
    // Guard against overflow far from the sample: nothing contributes there.
    for (auto v : centre)
        if (std::abs(v) > (std::int64_t{1} << 52))
            return out;
    std::vector<std::int64_t> key(centre);
    std::vector<int> offset(d, -1);
    while (true) {
        for (std::size_t j = 0; j < d; ++j)
            key[j] = centre[j] + offset[j];
        if (auto it = buckets_.find(key); it != buckets_.end())
            out.insert(out.end(), it->second.begin(), it->second.end());
        std::size_t j = 0;
        while (j < d && offset[j] == 1)
            offset[j++] = -1;
        if (j == d)
            break;
        ++offset[j];
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

double normaliser(const DensityModel& m)
{
    return static_cast<double>(m.sample().size()) * std::pow(m.bandwidth(), static_cast<double>(m.dim()));
}

} // namespace

double kde_evaluate(const DensityModel& model, const Eigen::Ref<const Eigen::VectorXd>& query)
{
    if (query.size() != model.dim())
        throw ValidationError("density query dimension does not match the sample");
    const auto& s = model.sample();
    const double h = model.bandwidth();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        sum += product_kernel(model.kernel(), (query - s[i].transpose()) / h);
    return sum / normaliser(model);
}

std::vector<double> kde_evaluate_batch(const DensityModel& model, const PointCloud& queries)
{
    std::vector<double> out;
    if (queries.empty())
        return out;
    if (queries.dim() != model.dim())
        throw ValidationError("density query dimension does not match the sample");
    const auto& s = model.sample();
    const double h = model.bandwidth();
    const double norm = normaliser(model);
    out.resize(static_cast<std::size_t>(queries.size()));
    for (Eigen::Index q = 0; q < queries.size(); ++q) {
        const Eigen::VectorXd x = queries[q].transpose();
        double sum = 0.0;
        for (Eigen::Index i : model.candidates(x))
            sum += product_kernel(model.kernel(), (x - s[i].transpose()) / h);
        out[static_cast<std::size_t>(q)] = sum / norm;
    }
    return out;
}

} // namespace levelhull
