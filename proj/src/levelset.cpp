#include "levelhull/levelset.hpp"

#include "levelhull/error.hpp"
#include "levelhull/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace levelhull {

namespace {

constexpr int kMaxDoublings = 60;

void check_densities(const PointCloud& sample, const std::vector<double>& density)
{
    if (static_cast<Eigen::Index>(density.size()) != sample.size())
        throw ValidationError("density vector does not match the sample");
}

void fill_clouds(const PointCloud& sample, LevelSplit& s)
{
    s.plus = sample.select(s.plus_index);
    s.minus = sample.select(s.minus_index);
    s.middle = sample.select(s.middle_index);
}

double min_pair_distance(const PointCloud& plus)
{
    double best = std::numeric_limits<double>::infinity();
    if (plus.dim() == 2) {
        std::vector<Eigen::Vector2d> sites(static_cast<std::size_t>(plus.size()));
        for (Eigen::Index i = 0; i < plus.size(); ++i)
            sites[static_cast<std::size_t>(i)] = plus[i].transpose();
        const Delaunay2 dt(std::move(sites));
        for (const auto& e : dt.edges()) {
            const double d = (dt.sites()[static_cast<std::size_t>(e.a)] - dt.sites()[static_cast<std::size_t>(e.b)]).norm();
            if (d > 0.0)
                best = std::min(best, d);
        }
        return best;
    }
    for (Eigen::Index i = 0; i < plus.size(); ++i)
        for (Eigen::Index j = i + 1; j < plus.size(); ++j) {
            const double d = (plus[i] - plus[j]).norm();
            if (d > 0.0)
                best = std::min(best, d);
        }
    return best;
}

} // namespace

void SplitConfig::validate(double tau) const
{
    if (mode == SplitMode::fixed_dn) {
        if (!(M > 0.0))
            throw ValidationError("D_n constant M must be positive");
        if (p_order < 1)
            throw ValidationError("smoothness order p must be at least 1");
    } else {
        if (!(p_margin > 0.0) || !(p_margin < std::min(tau, 1.0 - tau)))
            throw ValidationError("p_margin must lie in (0, min(tau, 1 - tau))");
    }
}

double default_p_margin(double tau)
{
    constexpr double eps = 1e-12;
    if (std::abs(tau - 0.9) < eps || std::abs(tau - 0.95) < eps)
        return 0.01;
    if (std::abs(tau - 0.8) < eps || std::abs(tau - 0.85) < eps)
        return 0.1;
    return std::min(0.05, 0.5 * std::min(tau, 1.0 - tau));
}

void BisectionConfig::validate() const
{
    if (max_iter < 1)
        throw ValidationError("bisection needs at least one iteration");
    if (!auto_bracket) {
        if (!(r_min_init > 0.0) || !(r_max_init > r_min_init))
            throw ValidationError("bisection bracket needs 0 < r_min < r_max");
    }
}

double dn_default(long long n, int d, int p, double M)
{
    if (n < 2)
        throw ValidationError("D_n rule needs n >= 2");
    if (!(M > 0.0))
        throw ValidationError("D_n constant M must be positive");
    if (d < 1 || p < 1)
        throw ValidationError("D_n rule needs d >= 1 and p >= 1");
    const double nn = static_cast<double>(n);
    return M * std::pow(std::log(nn) / nn, static_cast<double>(p) / static_cast<double>(d + 2 * p));
}

double nearest_rank_quantile(std::vector<double> values, double q)
{
    if (values.empty())
        throw ValidationError("quantile of an empty set");
    if (!(q >= 0.0 && q <= 1.0))
        throw ValidationError("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

LevelSplit split_fixed(const PointCloud& sample, const std::vector<double>& density, double t, double dn)
{
    check_densities(sample, density);
    if (!(dn >= 0.0))
        throw ValidationError("D_n must be nonnegative");
    LevelSplit s;
    s.t_plus = t + dn;
    s.t_minus = t - dn;
    for (Eigen::Index i = 0; i < sample.size(); ++i) {
        const double f = density[static_cast<std::size_t>(i)];
        if (f >= s.t_plus)
            s.plus_index.push_back(i);
        else if (f < s.t_minus)
            s.minus_index.push_back(i);
        else
            s.middle_index.push_back(i);
    }
    fill_clouds(sample, s);
    return s;
}

LevelSplit split_fixed(const PointCloud& sample, const DensityModel& model, double t, double dn)
{
    return split_fixed(sample, kde_evaluate_batch(model, sample), t, dn);
}

LevelSplit split_quantile(const PointCloud& sample, const std::vector<double>& density, double tau, double p_margin)
{
    check_densities(sample, density);
    if (!(tau > 0.0 && tau < 1.0))
        throw ValidationError("tau must lie in (0, 1)");
    if (!(p_margin > 0.0) || !(p_margin < std::min(tau, 1.0 - tau)))
        throw ValidationError("p_margin must lie in (0, min(tau, 1 - tau))");
    if (sample.empty())
        throw ValidationError("cannot split an empty sample");

    const double f_hi = nearest_rank_quantile(density, tau + p_margin);
    const double f_lo = nearest_rank_quantile(density, tau - p_margin);
    if (f_hi == f_lo)
        throw EstimationError("degenerate split: the (tau +- p) density quantiles coincide");

    LevelSplit s;
    s.t_plus = f_hi;
    s.t_minus = f_lo;
    for (Eigen::Index i = 0; i < sample.size(); ++i) {
        const double f = density[static_cast<std::size_t>(i)];
        if (f >= f_hi)
            s.plus_index.push_back(i);
        else if (f < f_lo)
            s.minus_index.push_back(i);
        else
            s.middle_index.push_back(i);
    }

    const auto n = static_cast<double>(sample.size());
    const auto target = static_cast<std::size_t>(std::ceil((1.0 - tau) * n - 1e-9));
    if (s.plus_index.size() < target && !s.middle_index.empty()) {
        // Middle points in order of distance to the initial X+, ties by index.
        std::vector<std::pair<double, Eigen::Index>> order;
        order.reserve(s.middle_index.size());
        const KdTree tree(sample.select(s.plus_index));
        for (Eigen::Index i : s.middle_index)
            order.emplace_back(std::sqrt(tree.nearest(sample[i].transpose()).second), i);
        std::sort(order.begin(), order.end());
        std::size_t k = 0;
        for (; k < order.size() && s.plus_index.size() < target; ++k)
            s.plus_index.push_back(order[k].second);
        for (; k < order.size(); ++k)
            s.minus_index.push_back(order[k].second);
    } else {
        s.minus_index.insert(s.minus_index.end(), s.middle_index.begin(), s.middle_index.end());
    }
    s.middle_index.clear();
    std::sort(s.plus_index.begin(), s.plus_index.end());
    std::sort(s.minus_index.begin(), s.minus_index.end());
    fill_clouds(sample, s);
    return s;
}

LevelSplit split_quantile(const PointCloud& sample, const DensityModel& model, double tau, double p_margin)
{
    return split_quantile(sample, kde_evaluate_batch(model, sample), tau, p_margin);
}

R0Estimate estimate_r0(const PointCloud& plus, const PointCloud& minus, const BisectionConfig& cfg)
{
    cfg.validate();
    if (plus.empty())
        throw EstimationError("estimate_r0: X+ is empty");
    R0Estimate out;
    if (minus.empty()) {
        out.convex_separation = true;
        return out;
    }
    if (minus.dim() != plus.dim())
        throw ValidationError("estimate_r0: X+ and X- have different dimensions");
    if (plus.dim() == 2) {
        const ConvexHull2 ch(plus);
        bool meets = false;
        for (Eigen::Index i = 0; i < minus.size() && !meets; ++i)
            meets = ch.contains(minus[i].transpose());
        if (!meets) {
            out.convex_separation = true;
            return out;
        }
    }

    double lo = cfg.r_min_init;
    double hi = cfg.r_max_init;
    if (cfg.auto_bracket) {
        if (!(lo > 0.0)) {
            lo = 0.5 * min_pair_distance(plus);
            if (!std::isfinite(lo)) // single generator
                lo = 1e-6 * (1.0 + minus.diameter_bound());
        }
        if (!(hi > lo))
            hi = std::max(0.25 * plus.diameter_bound(), 2.0 * lo);
    }
    const RHull base(plus, lo);
    auto separates = [&](double r) { return hull_separates(base, minus, r); };

    if (!separates(lo))
        throw EstimationError("estimate_r0: r_min = " + std::to_string(lo) + " does not separate X+ from X-");
    if (cfg.auto_bracket) {
        int doublings = 0;
        while (separates(hi)) {
            lo = hi;
            hi *= 2.0;
            if (++doublings > kMaxDoublings) {
                if (plus.dim() == 2) {
                    out.convex_separation = true;
                    return out;
                }
                throw EstimationError("estimate_r0: no upper bracket found");
            }
        }
    } else if (separates(hi)) {
        throw EstimationError("estimate_r0: r_max = " + std::to_string(hi) + " still separates X+ from X-");
    }

    out.bracket_lo = lo;
    out.bracket_hi = hi;
    for (int it = 0; it < cfg.max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (separates(mid))
            lo = mid;
        else
            hi = mid;
        ++out.iterations;
    }
    out.value = 0.5 * (lo + hi);
    return out;
}

bool LevelSetEstimate::contains(const Eigen::Ref<const Eigen::VectorXd>& q) const
{
    if (hull)
        return hull->contains(q);
    if (convex)
        return convex->contains(q);
    throw EstimationError("level set estimate holds no hull");
}

double LevelSetEstimate::content(const PointCloud& sample) const
{
    if (sample.empty())
        return 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < sample.size(); ++i) {
        if (contains(sample[i].transpose()))
            ++count;
    }
    return static_cast<double>(count) / static_cast<double>(sample.size());
}

namespace {

LevelSetEstimate build_estimate(LevelSplit split, double nu, const BisectionConfig& bis_cfg)
{
    if (!(nu > 0.0 && nu < 1.0))
        throw ValidationError("nu must lie in (0, 1)");
    if (split.plus_empty())
        throw EstimationError("level set estimate: X+ is empty");
    LevelSetEstimate est;
    est.nu = nu;
    const R0Estimate r0 = estimate_r0(split.plus, split.minus, bis_cfg);
    if (r0.convex_separation) {
        if (split.plus.dim() != 2)
            throw EstimationError("convex fallback is only available for planar data");
        est.convex_fallback = true;
        est.convex.emplace(split.plus);
    } else {
        est.r_hat0 = r0.value;
        est.r_n = nu * r0.value;
        est.hull.emplace(split.plus, est.r_n);
    }
    est.split = std::move(split);
    return est;
}

} // namespace

LevelSetEstimate estimate_level_set_fixed(const PointCloud& sample, const DensityModel& model, double t, double nu,
                                          const SplitConfig& split_cfg, const BisectionConfig& bis_cfg)
{
    if (split_cfg.mode != SplitMode::fixed_dn)
        throw ValidationError("fixed-level estimation needs a fixed_dn split configuration");
    split_cfg.validate();
    const double dn = dn_default(sample.size(), static_cast<int>(sample.dim()), split_cfg.p_order, split_cfg.M);
    auto est = build_estimate(split_fixed(sample, model, t, dn), nu, bis_cfg);
    est.t = t;
    return est;
}

LevelSetEstimate estimate_level_set_tau(const PointCloud& sample, const DensityModel& model, double tau, double nu,
                                        double p_margin, const BisectionConfig& bis_cfg)
{
    auto est = build_estimate(split_quantile(sample, model, tau, p_margin), nu, bis_cfg);
    est.tau = tau;
    est.t = est.split.t_plus;
    return est;
}

std::vector<double> default_t_grid(const std::vector<double>& density, int count)
{
    if (density.empty())
        throw ValidationError("level grid needs at least one density value");
    if (count < 2)
        throw ValidationError("level grid needs at least two levels");
    const auto [mn, mx] = std::minmax_element(density.begin(), density.end());
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        grid[static_cast<std::size_t>(k)] = *mn + (*mx - *mn) * static_cast<double>(k) / static_cast<double>(count - 1);
    return grid;
}

double level_content(const PointCloud& sample, const std::vector<double>& density, double t, double nu, double dn,
                     const BisectionConfig& bis_cfg)
{
    LevelSplit split = split_fixed(sample, density, t, dn);
    if (split.plus_empty())
        return 0.0;
    try {
        const auto est = build_estimate(std::move(split), nu, bis_cfg);
        return est.content(sample);
    } catch (const EstimationError&) {
        return 0.0;
    }
}

ThresholdEstimate estimate_threshold(const PointCloud& sample, const DensityModel& model, double tau, double nu,
                                     const SplitConfig& split_cfg, const BisectionConfig& bis_cfg,
                                     const std::vector<double>& t_grid)
{
    if (!(tau > 0.0 && tau < 1.0))
        throw ValidationError("tau must lie in (0, 1)");
    if (t_grid.empty())
        throw ValidationError("level grid is empty");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw ValidationError("level grid must be sorted ascending");
    if (split_cfg.mode != SplitMode::fixed_dn)
        throw ValidationError("threshold estimation needs a fixed_dn split configuration");
    split_cfg.validate();

    const auto density = kde_evaluate_batch(model, sample);
    const double dn = dn_default(sample.size(), static_cast<int>(sample.dim()), split_cfg.p_order, split_cfg.M);
    ThresholdEstimate out;
    double best = 0.0;
    for (auto it = t_grid.rbegin(); it != t_grid.rend(); ++it) {
        const double content = level_content(sample, density, *it, nu, dn, bis_cfg);
        out.levels.push_back(*it);
        out.contents.push_back(content);
        best = std::max(best, content);
        if (content >= 1.0 - tau) {
            out.t = *it;
            out.content = content;
            return out;
        }
    }
    throw EstimationError("threshold estimate: no level reaches content 1 - tau; best content " + std::to_string(best));
}

} // namespace levelhull
