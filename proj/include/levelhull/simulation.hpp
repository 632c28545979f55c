#pragma once

#include "levelhull/density.hpp"
#include "levelhull/grid.hpp"
#include "levelhull/levelset.hpp"
#include "levelhull/point_cloud.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace levelhull {

/// Portable uniform and normal variates over mt19937_64. The standard
/// distributions are implementation-defined, so they are avoided to keep
/// samples identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    /// Uniform on [0, 1).
    double uniform();
    double normal();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Seed of the private stream for replicate `rep` at sample size n.
std::uint64_t replicate_seed(std::uint64_t seed, long long n, int rep);

/// A density with known level sets.
struct Scenario {
    using Density = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

    std::string name;
    Eigen::Index dim = 2;
    Density density;
    std::function<PointCloud(std::uint64_t seed, Eigen::Index n)> sampler;
    /// r0 of the level set {f >= t}; empty where it is undefined.
    std::function<std::optional<double>(double t)> known_r0;
    /// Threshold f_tau with P(f >= f_tau) = 1 - tau.
    std::function<double(double tau)> known_ftau;
    /// Box holding all but a negligible part of the mass.
    Point box_lo;
    Point box_hi;
    /// Levels between which the gradient stays away from zero on {f = t}.
    std::pair<double, double> band{0.0, 0.0};
    /// (m, k): lower bound on |grad f| over the band and Lipschitz constant of grad f.
    std::optional<std::pair<double, double>> gradient_bounds;
};

/// Radial bump c exp(-(|x| - R)^2 / (2 sigma^2)), R = 0.3, sigma = 0.05.
Scenario scenario_ring();
/// Equal mixture of isotropic normals at (-0.5, 0) and (0.5, 0), sigma 0.2.
Scenario scenario_bimodal();
/// Lookup by name ("ring" or "bimodal").
Scenario scenario_by_name(const std::string& name);

/// Cells of `grid` whose center has density >= t.
GridMask true_level_set(const Scenario& scenario, double t, const GridSpec& grid);

/// Grid over the scenario box with `cells` cells along its longest side.
GridSpec scenario_grid(const Scenario& scenario, int cells);

/// Threshold f_tau by quadrature over a grid: sort the cell masses by
/// density and accumulate until 1 - tau is reached.
double quadrature_ftau(const Scenario::Density& density, const GridSpec& grid, double tau);

/// sup{r : closing_r(G) = G} for a rasterized set, by bisection over r on
/// [cell, r_max]. Empty when the set is closed at r_max as well.
std::optional<double> grid_r0(const GridMask& set, double r_max, int iterations = 40);

enum class Metric { r0_error, hausdorff, measure, content, plus_outside, plus_hausdorff, threshold_error, runtime };

std::string to_string(Metric m);
Metric parse_metric(const std::string& name);

struct ExperimentConfig {
    std::vector<long long> n_values;
    int replicates = 1;
    /// Exactly one of tau and t is set.
    std::optional<double> tau;
    std::optional<double> t;
    double nu = 0.9;
    std::optional<double> p_margin;
    SplitConfig split;
    BisectionConfig bisection;
    KernelSpec kernel;
    std::optional<double> bandwidth_scale;
    /// Cells along the longest side of the comparison grid.
    int grid_cells = 512;
    /// Also run the threshold estimator (tau mode only).
    bool threshold = false;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ExperimentRecord {
    long long n = 0;
    int replicate = 0;
    std::uint64_t seed = 0;
    double r_hat0 = 0.0;
    double r0_true = 0.0;
    double r0_error = 0.0;
    double hausdorff = 0.0;
    double measure = 0.0;
    double content = 0.0;
    bool convex_fallback = false;
    double plus_outside = 0.0;
    double plus_hausdorff = 0.0;
    double f_hat = 0.0;
    double threshold_error = 0.0;
    double runtime = 0.0;

    double metric(Metric m) const;
};

struct MetricSummary {
    double median = 0.0;
    double iqr = 0.0;
};

struct ExperimentAggregate {
    long long n = 0;
    std::vector<std::pair<Metric, MetricSummary>> metrics;

    const MetricSummary& operator[](Metric m) const;
};

struct ExperimentReport {
    std::string scenario;
    ExperimentConfig config;
    std::vector<long long> n_values;
    int replicates = 0;
    /// Level of the true set the estimates are compared with.
    double t_true = 0.0;
    std::vector<ExperimentRecord> records;
    std::vector<ExperimentAggregate> aggregates;

    const ExperimentAggregate& aggregate(long long n) const;
    /// Medians of one metric in n order.
    std::vector<double> medians(Metric m) const;
};

/// Median and interquartile range (linear interpolation between order
/// statistics). NaNs are ignored; all-NaN input gives NaN.
MetricSummary summarize(std::vector<double> values);

ExperimentReport run_experiment(const Scenario& scenario, const ExperimentConfig& cfg);

/// Least-squares slope of log(median metric) against log(n).
double rate_slope(const ExperimentReport& report, Metric metric);
double rate_slope(const std::vector<double>& n, const std::vector<double>& values);

} // namespace levelhull
