#pragma once

#include "levelhull/density.hpp"
#include "levelhull/rhull.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace levelhull {

enum class SplitMode { fixed_dn, quantile };

struct SplitConfig {
    SplitMode mode = SplitMode::quantile;
    double M = 1.0;          ///< constant in D_n (fixed_dn mode)
    double p_margin = 0.05;  ///< quantile half-width (quantile mode)
    int p_order = 2;         ///< smoothness exponent p in D_n

    void validate(double tau = 0.5) const;
};

/// Default quantile half-width for a given tau.
double default_p_margin(double tau);

/// Trisection of a sample into X+ / X- / middle by estimated density.
/// Index vectors refer to rows of the original sample.
struct LevelSplit {
    PointCloud plus;
    PointCloud minus;
    PointCloud middle;
    std::vector<Eigen::Index> plus_index;
    std::vector<Eigen::Index> minus_index;
    std::vector<Eigen::Index> middle_index;
    double t_plus = 0.0;
    double t_minus = 0.0;

    bool plus_empty() const { return plus_index.empty(); }
};

struct BisectionConfig {
    int max_iter = 30;
    /// With auto_bracket, nonpositive values select the defaults (half the
    /// smallest X+ spacing; a quarter of the X+ diameter, doubled while it
    /// still separates).
    double r_min_init = 0.0;
    double r_max_init = 0.0;
    bool auto_bracket = true;

    void validate() const;
};

/// Result of the dichotomy search for sup{gamma : C_gamma(X+) misses X-}.
struct R0Estimate {
    /// Set when X- is empty or the convex hull of X+ already misses X-; the
    /// supremum is then infinite and the convex hull is the estimate.
    bool convex_separation = false;
    double value = std::numeric_limits<double>::infinity();
    double bracket_lo = 0.0; ///< initial r_m
    double bracket_hi = 0.0; ///< initial r_M
    int iterations = 0;
};

/// M (log n / n)^(p / (d + 2p)).
double dn_default(long long n, int d, int p, double M);

/// Nearest-rank empirical quantile: the ceil(q n)-th smallest value.
double nearest_rank_quantile(std::vector<double> values, double q);

LevelSplit split_fixed(const PointCloud& sample, const std::vector<double>& density, double t, double dn);
LevelSplit split_fixed(const PointCloud& sample, const DensityModel& model, double t, double dn);

LevelSplit split_quantile(const PointCloud& sample, const std::vector<double>& density, double tau, double p_margin);
LevelSplit split_quantile(const PointCloud& sample, const DensityModel& model, double tau, double p_margin);

R0Estimate estimate_r0(const PointCloud& plus, const PointCloud& minus, const BisectionConfig& cfg);

/// A density level set estimate: C_{r_n}(X+) with r_n = nu * r_hat0, or
/// the convex hull of X+ when the convex fallback applies.
struct LevelSetEstimate {
    std::optional<RHull> hull;
    std::optional<ConvexHull2> convex;
    bool convex_fallback = false;
    double r_hat0 = std::numeric_limits<double>::infinity();
    double r_n = std::numeric_limits<double>::infinity();
    double nu = 0.9;
    std::optional<double> tau;
    double t = 0.0;
    LevelSplit split;

    bool contains(const Eigen::Ref<const Eigen::VectorXd>& q) const;
    /// Fraction of `sample` inside the estimate.
    double content(const PointCloud& sample) const;
};

LevelSetEstimate estimate_level_set_fixed(const PointCloud& sample, const DensityModel& model, double t, double nu,
                                          const SplitConfig& split_cfg, const BisectionConfig& bis_cfg);

LevelSetEstimate estimate_level_set_tau(const PointCloud& sample, const DensityModel& model, double tau, double nu,
                                        double p_margin, const BisectionConfig& bis_cfg);

struct ThresholdEstimate {
    double t = 0.0;
    double content = 0.0;
    /// Levels evaluated (descending) and their empirical contents.
    std::vector<double> levels;
    std::vector<double> contents;
};

/// `count` equally spaced levels spanning [min, max] of the sample densities.
std::vector<double> default_t_grid(const std::vector<double>& density, int count = 64);

/// Empirical content of C_{r_n(t)}(X+(t)) at one level; 0 when no estimate
/// can be formed there (empty X+ or failed bracket).
double level_content(const PointCloud& sample, const std::vector<double>& density, double t, double nu, double dn,
                     const BisectionConfig& bis_cfg);

/// Largest grid level whose estimate holds at least 1 - tau of the sample.
ThresholdEstimate estimate_threshold(const PointCloud& sample, const DensityModel& model, double tau, double nu,
                                     const SplitConfig& split_cfg, const BisectionConfig& bis_cfg,
                                     const std::vector<double>& t_grid);

} // namespace levelhull
