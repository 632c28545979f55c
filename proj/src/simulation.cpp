#include "levelhull/simulation.hpp"

#include "levelhull/error.hpp"
#include "levelhull/kdtree.hpp"
#include "levelhull/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace levelhull {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Mass of the radial bump between radii a <= b, before normalization.
double ring_mass(double a, double b, double R, double sigma)
{
    const double s2 = sigma * sigma;
    const double root = sigma * std::sqrt(2.0);
    return 2.0 * kPi *
           (s2 * (std::exp(-(a - R) * (a - R) / (2.0 * s2)) - std::exp(-(b - R) * (b - R) / (2.0 * s2))) +
            R * sigma * std::sqrt(kPi / 2.0) * (std::erf((b - R) / root) - std::erf((a - R) / root)));
}

template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi, int iterations = 200)
{
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Maximum of |grad f| over the level band and of the Hessian norm, for a
// radial profile, sampled on a fine radius grid.
std::pair<double, double> radial_gradient_bounds(double c, double R, double sigma, double l, double u)
{
    double m = std::numeric_limits<double>::infinity();
    double k = 0.0;
    const double s2 = sigma * sigma;
    for (int i = 1; i <= 20000; ++i) {
        const double rho = i * (R + 10.0 * sigma) / 20000.0;
        const double e = c * std::exp(-(rho - R) * (rho - R) / (2.0 * s2));
        const double d1 = -e * (rho - R) / s2;
        const double d2 = e * ((rho - R) * (rho - R) / (s2 * s2) - 1.0 / s2);
        if (e >= l && e <= u)
            m = std::min(m, std::abs(d1));
        k = std::max({k, std::abs(d2), std::abs(d1) / rho});
    }
    return {m, k};
}

double quantile_sorted(const std::vector<double>& v, double q)
{
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Comparison grid: the scenario grid extended by whole cells to cover the
// estimate's generators padded by 2 r_n.
GridSpec comparison_grid(const Scenario& sc, int cells, const LevelSetEstimate& est)
{
    GridSpec g = scenario_grid(sc, cells);
    const PointCloud& plus = est.split.plus;
    double pad = est.hull ? 2.0 * est.hull->radius() + g.cell : g.cell;
    // Past a few times the base grid the cell-by-cell rasterization is cheaper.
    const double span = (g.upper() - g.origin).maxCoeff();
    if ((plus.upper() - plus.lower()).maxCoeff() + 2.0 * pad > 2.0 * span)
        pad = g.cell;
    const Point lo = plus.lower().array() - pad;
    const Point hi = plus.upper().array() + pad;
    const Point up = g.upper();
    for (Eigen::Index j = 0; j < g.dim(); ++j) {
        const auto below = static_cast<Eigen::Index>(std::max(0.0, std::ceil((g.origin(j) - lo(j)) / g.cell)));
        const auto above = static_cast<Eigen::Index>(std::max(0.0, std::ceil((hi(j) - up(j)) / g.cell)));
        g.origin(j) -= static_cast<double>(below) * g.cell;
        g.shape[static_cast<std::size_t>(j)] += below + above;
    }
    return g;
}

} // namespace

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    double u1 = 0.0;
    do
        u1 = uniform();
    while (u1 <= 0.0);
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    spare_ = rad * std::sin(2.0 * kPi * u2);
    return rad * std::cos(2.0 * kPi * u2);
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t replicate_seed(std::uint64_t seed, long long n, int rep)
{
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ static_cast<std::uint64_t>(n));
    return splitmix64(s ^ static_cast<std::uint64_t>(rep));
}

Scenario scenario_ring()
{
    constexpr double R = 0.3;
    constexpr double sigma = 0.05;
    const double c = 1.0 / ring_mass(0.0, std::numeric_limits<double>::infinity(), R, sigma);

    Scenario sc;
    sc.name = "ring";
    sc.dim = 2;
    sc.density = [=](const Eigen::Ref<const Eigen::VectorXd>& x) {
        const double d = x.norm() - R;
        return c * std::exp(-d * d / (2.0 * sigma * sigma));
    };
    sc.sampler = [=](std::uint64_t seed, Eigen::Index n) {
        Rng rng(seed);
        PointMatrix m(n, 2);
        const double rho_max = R + 12.0 * sigma;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = rng.uniform() * c * ring_mass(0.0, rho_max, R, sigma);
            const double rho = bisect_increasing([&](double r) { return c * ring_mass(0.0, r, R, sigma); }, u, 0.0,
                                                 rho_max, 80);
            const double phi = 2.0 * kPi * rng.uniform();
            m(i, 0) = rho * std::cos(phi);
            m(i, 1) = rho * std::sin(phi);
        }
        return PointCloud(std::move(m));
    };
    sc.known_r0 = [=](double t) -> std::optional<double> {
        if (!(t > 0.0) || t > c)
            return std::nullopt;
        const double inner = R - sigma * std::sqrt(2.0 * std::log(c / t));
        if (inner > 0.0)
            return inner;
        return std::nullopt;
    };
    sc.known_ftau = [=](double tau) {
        if (!(tau > 0.0 && tau < 1.0))
            throw ValidationError("tau must lie in (0, 1)");
        const double w = bisect_increasing(
            [&](double w) { return c * ring_mass(std::max(0.0, R - w), R + w, R, sigma); }, 1.0 - tau, 0.0,
            R + 20.0 * sigma);
        return c * std::exp(-w * w / (2.0 * sigma * sigma));
    };
    const double half = R + 7.0 * sigma;
    sc.box_lo = Point::Constant(2, -half);
    sc.box_hi = Point::Constant(2, half);
    sc.band = {c * std::exp(-4.5), c * std::exp(-0.125)};
    sc.gradient_bounds = radial_gradient_bounds(c, R, sigma, sc.band.first, sc.band.second);
    return sc;
}

Scenario scenario_bimodal()
{
    constexpr double mu = 0.5;
    constexpr double sigma = 0.2;
    const double norm = 1.0 / (2.0 * kPi * sigma * sigma);

    Scenario sc;
    sc.name = "bimodal";
    sc.dim = 2;
    sc.density = [=](const Eigen::Ref<const Eigen::VectorXd>& x) {
        const double y2 = x(1) * x(1);
        const double a = (x(0) - mu) * (x(0) - mu) + y2;
        const double b = (x(0) + mu) * (x(0) + mu) + y2;
        return 0.5 * norm * (std::exp(-a / (2.0 * sigma * sigma)) + std::exp(-b / (2.0 * sigma * sigma)));
    };
    sc.sampler = [=](std::uint64_t seed, Eigen::Index n) {
        Rng rng(seed);
        PointMatrix m(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double center = rng.uniform() < 0.5 ? -mu : mu;
            m(i, 0) = center + sigma * rng.normal();
            m(i, 1) = sigma * rng.normal();
        }
        return PointCloud(std::move(m));
    };
    sc.box_lo = Eigen::Vector2d(-mu - 6.0 * sigma, -6.0 * sigma);
    sc.box_hi = Eigen::Vector2d(mu + 6.0 * sigma, 6.0 * sigma);
    const Scenario::Density f = sc.density;
    const GridSpec fine = make_grid(sc.box_lo, sc.box_hi, 0.0, (sc.box_hi - sc.box_lo).maxCoeff() / 2048.0);
    sc.known_ftau = [f, fine](double tau) { return quadrature_ftau(f, fine, tau); };
    const Scenario copy = sc;
    sc.known_r0 = [copy](double t) -> std::optional<double> {
        const GridSpec g = scenario_grid(copy, 256);
        const GridMask set = true_level_set(copy, t, g);
        if (set.count() == 0)
            return std::nullopt;
        return grid_r0(set, (copy.box_hi - copy.box_lo).norm());
    };
    // The saddle at the origin has zero gradient, so the band stops above it.
    const double saddle = norm * std::exp(-mu * mu / (2.0 * sigma * sigma));
    sc.band = {0.2 * saddle, 0.9 * saddle};
    return sc;
}

Scenario scenario_by_name(const std::string& name)
{
    if (name == "ring")
        return scenario_ring();
    if (name == "bimodal")
        return scenario_bimodal();
    throw ValidationError("unknown scenario '" + name + "'");
}

GridMask true_level_set(const Scenario& scenario, double t, const GridSpec& grid)
{
    GridMask mask(grid);
    for (Eigen::Index k = 0; k < grid.cell_count(); ++k)
        mask.occupied[static_cast<std::size_t>(k)] = scenario.density(grid.center(k)) >= t ? 1 : 0;
    return mask;
}

GridSpec scenario_grid(const Scenario& scenario, int cells)
{
    if (cells < 1)
        throw ValidationError("grid needs at least one cell per side");
    const double cell = (scenario.box_hi - scenario.box_lo).maxCoeff() / cells;
    return make_grid(scenario.box_lo, scenario.box_hi, 0.0, cell);
}

double quadrature_ftau(const Scenario::Density& density, const GridSpec& grid, double tau)
{
    if (!(tau > 0.0 && tau < 1.0))
        throw ValidationError("tau must lie in (0, 1)");
    std::vector<double> values(static_cast<std::size_t>(grid.cell_count()));
    for (Eigen::Index k = 0; k < grid.cell_count(); ++k)
        values[static_cast<std::size_t>(k)] = density(grid.center(k));
    std::sort(values.begin(), values.end(), std::greater<>());
    double total = 0.0;
    for (double v : values)
        total += v;
    const double target = (1.0 - tau) * total;
    double acc = 0.0;
    for (double v : values) {
        acc += v;
        if (acc >= target)
            return v;
    }
    return values.back();
}

std::optional<double> grid_r0(const GridMask& set, double r_max, int iterations)
{
    const GridSpec& g0 = set.grid;
    if (set.count() == 0)
        throw ValidationError("r0 oracle: empty set");
    if (!(r_max > g0.cell))
        throw ValidationError("r0 oracle: r_max must exceed the cell size");

    // Re-embed with room for the closing at r_max.
    const auto pad = static_cast<Eigen::Index>(std::ceil(2.0 * r_max / g0.cell)) + 2;
    GridSpec g = g0;
    for (Eigen::Index j = 0; j < g.dim(); ++j) {
        g.origin(j) -= static_cast<double>(pad) * g0.cell;
        g.shape[static_cast<std::size_t>(j)] += 2 * pad;
    }
    GridMask big(g);
    const auto s0 = g0.strides();
    const auto s1 = g.strides();
    for (Eigen::Index k = 0; k < g0.cell_count(); ++k) {
        if (!set.at(k))
            continue;
        Eigen::Index rest = k, flat = 0;
        for (Eigen::Index j = g0.dim() - 1; j >= 0; --j) {
            const auto jj = static_cast<std::size_t>(j);
            flat += (rest / s0[jj] + pad) * s1[jj];
            rest %= s0[jj];
        }
        big.occupied[static_cast<std::size_t>(flat)] = 1;
    }

    // Closed up to digitization: every cell the closing adds touches the set.
    const auto d2 = squared_edt(g, big.occupied);
    auto closed = [&](double r) {
        const GridMask c = closing(big, r);
        for (std::size_t k = 0; k < c.occupied.size(); ++k)
            if (c.occupied[k] && d2[k] > 2.0 + 1e-9)
                return false;
        return true;
    };
    if (closed(r_max))
        return std::nullopt;
    double lo = g0.cell, hi = r_max;
    if (!closed(lo))
        return lo;
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        (closed(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::string to_string(Metric m)
{
    switch (m) {
    case Metric::r0_error: return "r0_error";
    case Metric::hausdorff: return "hausdorff";
    case Metric::measure: return "measure";
    case Metric::content: return "content";
    case Metric::plus_outside: return "plus_outside";
    case Metric::plus_hausdorff: return "plus_hausdorff";
    case Metric::threshold_error: return "threshold_error";
    case Metric::runtime: return "runtime";
    }
    return "unknown";
}

Metric parse_metric(const std::string& name)
{
    for (Metric m : {Metric::r0_error, Metric::hausdorff, Metric::measure, Metric::content, Metric::plus_outside,
                     Metric::plus_hausdorff, Metric::threshold_error, Metric::runtime})
        if (to_string(m) == name)
            return m;
    throw ValidationError("unknown metric '" + name + "'");
}

void ExperimentConfig::validate() const
{
    if (n_values.empty())
        throw ValidationError("experiment needs at least one sample size");
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        if (n_values[i] < 2)
            throw ValidationError("sample sizes must be at least 2");
        if (i > 0 && n_values[i] <= n_values[i - 1])
            throw ValidationError("sample sizes must be strictly ascending");
    }
    if (replicates < 1)
        throw ValidationError("replicates must be at least 1");
    if (tau.has_value() == t.has_value())
        throw ValidationError("exactly one of tau and t must be given");
    if (tau && !(*tau > 0.0 && *tau < 1.0))
        throw ValidationError("tau must lie in (0, 1)");
    if (tau && p_margin) {
        SplitConfig s;
        s.p_margin = *p_margin;
        s.validate(*tau);
    }
    if (t && !(*t > 0.0))
        throw ValidationError("level t must be positive");
    if (!(nu > 0.0 && nu < 1.0))
        throw ValidationError("nu must lie in (0, 1)");
    if (grid_cells < 8)
        throw ValidationError("comparison grid needs at least 8 cells per side");
    if (threshold && !tau)
        throw ValidationError("threshold estimation needs tau");
    if (bandwidth_scale && !(*bandwidth_scale > 0.0))
        throw ValidationError("bandwidth scale must be positive");
    bisection.validate();
}

double ExperimentRecord::metric(Metric m) const
{
    switch (m) {
    case Metric::r0_error: return r0_error;
    case Metric::hausdorff: return hausdorff;
    case Metric::measure: return measure;
    case Metric::content: return content;
    case Metric::plus_outside: return plus_outside;
    case Metric::plus_hausdorff: return plus_hausdorff;
    case Metric::threshold_error: return threshold_error;
    case Metric::runtime: return runtime;
    }
    return kNaN;
}

const MetricSummary& ExperimentAggregate::operator[](Metric m) const
{
    for (const auto& [k, v] : metrics)
        if (k == m)
            return v;
    throw ValidationError("metric not aggregated");
}

const ExperimentAggregate& ExperimentReport::aggregate(long long n) const
{
    for (const auto& a : aggregates)
        if (a.n == n)
            return a;
    throw ValidationError("no aggregate for n = " + std::to_string(n));
}

std::vector<double> ExperimentReport::medians(Metric m) const
{
    std::vector<double> out;
    for (const auto& a : aggregates)
        out.push_back(a[m].median);
    return out;
}

MetricSummary summarize(std::vector<double> values)
{
    values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }), values.end());
    if (values.empty())
        return {kNaN, kNaN};
    std::sort(values.begin(), values.end());
    return {quantile_sorted(values, 0.5), quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25)};
}

ExperimentReport run_experiment(const Scenario& scenario, const ExperimentConfig& cfg)
{
    cfg.validate();
    if (cfg.tau && !scenario.known_ftau)
        throw ValidationError("scenario '" + scenario.name + "' has no known f_tau");

    ExperimentReport report;
    report.scenario = scenario.name;
    report.config = cfg;
    report.n_values = cfg.n_values;
    report.replicates = cfg.replicates;
    report.t_true = cfg.tau ? scenario.known_ftau(*cfg.tau) : *cfg.t;
    std::optional<double> r0_true;
    if (scenario.known_r0)
        r0_true = scenario.known_r0(report.t_true);

    const auto d = static_cast<int>(scenario.dim);
    for (long long n : cfg.n_values) {
        for (int rep = 0; rep < cfg.replicates; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            ExperimentRecord rec;
            rec.n = n;
            rec.replicate = rep;
            rec.seed = replicate_seed(cfg.seed, n, rep);

            const PointCloud sample = scenario.sampler(rec.seed, static_cast<Eigen::Index>(n));
            const double c = cfg.bandwidth_scale.value_or(default_bandwidth_scale(sample));
            const DensityModel model(sample, cfg.kernel, default_bandwidth(n, d, cfg.kernel.order, c));

            const LevelSetEstimate est =
                cfg.tau ? estimate_level_set_tau(sample, model, *cfg.tau, cfg.nu,
                                                 cfg.p_margin.value_or(default_p_margin(*cfg.tau)), cfg.bisection)
                        : estimate_level_set_fixed(sample, model, *cfg.t, cfg.nu, cfg.split, cfg.bisection);

            rec.r_hat0 = est.r_hat0;
            rec.convex_fallback = est.convex_fallback;
            rec.r0_true = r0_true.value_or(kNaN);
            rec.r0_error = r0_true ? std::abs(est.r_hat0 - *r0_true) : kNaN;

            const GridSpec grid = comparison_grid(scenario, cfg.grid_cells, est);
            const GridMask truth = true_level_set(scenario, report.t_true, grid);
            const GridMask estimate = rasterize(est, grid);
            rec.hausdorff = hausdorff(truth, estimate);
            rec.measure = measure_distance(truth, estimate);
            rec.content = est.content(sample);

            const PointCloud& plus = est.split.plus;
            Eigen::Index outside = 0;
            for (Eigen::Index i = 0; i < plus.size(); ++i)
                if (scenario.density(plus.point(i)) < report.t_true)
                    ++outside;
            rec.plus_outside = static_cast<double>(outside) / static_cast<double>(plus.size());
            rec.plus_hausdorff = hausdorff(truth.occupied_centers(), plus);

            rec.f_hat = kNaN;
            rec.threshold_error = kNaN;
            if (cfg.threshold) {
                SplitConfig split = cfg.split;
                split.mode = SplitMode::fixed_dn;
                try {
                    const auto th = estimate_threshold(sample, model, *cfg.tau, cfg.nu, split, cfg.bisection,
                                                       default_t_grid(kde_evaluate_batch(model, sample)));
                    rec.f_hat = th.t;
                    rec.threshold_error = std::abs(th.t - report.t_true);
                } catch (const EstimationError&) {
                }
            }
            rec.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            report.records.push_back(rec);
        }
        ExperimentAggregate agg;
        agg.n = n;
        for (Metric m : {Metric::r0_error, Metric::hausdorff, Metric::measure, Metric::content, Metric::plus_outside,
                         Metric::plus_hausdorff, Metric::threshold_error, Metric::runtime}) {
            std::vector<double> vals;
            for (const auto& r : report.records)
                if (r.n == n)
                    vals.push_back(r.metric(m));
            agg.metrics.emplace_back(m, summarize(std::move(vals)));
        }
        report.aggregates.push_back(std::move(agg));
    }
    return report;
}

double rate_slope(const std::vector<double>& n, const std::vector<double>& values)
{
    if (n.size() != values.size())
        throw ValidationError("rate slope: size mismatch");
    if (n.size() < 3)
        throw ValidationError("rate slope needs at least 3 sample sizes");
    Eigen::MatrixXd A(static_cast<Eigen::Index>(n.size()), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (!(n[i] > 0.0) || !(values[i] > 0.0) || !std::isfinite(values[i]))
            throw ValidationError("rate slope needs positive finite values");
        const auto ii = static_cast<Eigen::Index>(i);
        A(ii, 0) = 1.0;
        A(ii, 1) = std::log(n[i]);
        y(ii) = std::log(values[i]);
    }
    return A.colPivHouseholderQr().solve(y)(1);
}

double rate_slope(const ExperimentReport& report, Metric metric)
{
    std::vector<double> n(report.n_values.begin(), report.n_values.end());
    return rate_slope(n, report.medians(metric));
}

} // namespace levelhull
