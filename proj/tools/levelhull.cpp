#include "levelhull/density.hpp"
#include "levelhull/error.hpp"
#include "levelhull/io.hpp"
#include "levelhull/levelset.hpp"
#include "levelhull/metrics.hpp"
#include "levelhull/rhull.hpp"
#include "levelhull/simulation.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace levelhull;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitEstimation = 3;

struct RunConfig {
    std::string command;
    std::string input;
    std::optional<double> tau;
    std::optional<double> t;
    double nu = 0.9;
    std::optional<double> p_margin;
    double M = 1.0;
    std::optional<double> bandwidth;
    std::optional<double> bandwidth_scale;
    std::string kernel = "epanechnikov";
    int max_iter = 30;
    double r_min = 0.0;
    double r_max = 0.0;
    int grid = 512;
    int levels = 64;
    std::uint64_t seed = 1;
    std::string report;
    std::string boundary;
    std::string mask;
    std::string output;
    // r0
    std::string plus;
    std::string minus;
    // benchmark
    std::string scenario;
    std::vector<long long> n_values{500, 2000, 8000};
    int replicates = 20;
    bool threshold = false;
    bool runtime = false;
    // distance
    std::string a;
    std::string b;
    double r_a = 0.0;
    double r_b = 0.0;
    double resolution = 0.0;
};

BisectionConfig bisection_of(const RunConfig& c)
{
    BisectionConfig b;
    b.max_iter = c.max_iter;
    b.r_min_init = c.r_min;
    b.r_max_init = c.r_max;
    b.auto_bracket = !(c.r_min > 0.0 && c.r_max > 0.0);
    return b;
}

KernelSpec kernel_of(const RunConfig& c)
{
    return KernelSpec{parse_kernel_family(c.kernel), 2};
}

DensityModel model_of(const RunConfig& c, const PointCloud& sample)
{
    double h = 0.0;
    if (c.bandwidth) {
        h = *c.bandwidth;
        if (!(h > 0.0))
            throw ValidationError("bandwidth must be positive");
    } else {
        const double scale = c.bandwidth_scale.value_or(default_bandwidth_scale(sample));
        h = default_bandwidth(sample.size(), static_cast<int>(sample.dim()), 2, scale);
    }
    return DensityModel(sample, kernel_of(c), h);
}

void check_level(const RunConfig& c, bool tau_only = false)
{
    if (tau_only && !c.tau)
        throw ValidationError("--tau is required");
    if (c.tau.has_value() == c.t.has_value())
        throw ValidationError("give exactly one of --tau and --t");
    if (c.tau && !(*c.tau > 0.0 && *c.tau < 1.0))
        throw ValidationError("tau must lie in (0, 1)");
    if (c.t && !(*c.t > 0.0))
        throw ValidationError("t must be positive");
    if (!(c.nu > 0.0 && c.nu < 1.0))
        throw ValidationError("nu must lie in (0, 1)");
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot write '" + path + "'");
    return out;
}

// Writes to `path`, or to stdout when the path is empty or "-".
template <class F>
void emit(const std::string& path, F&& write)
{
    if (path.empty() || path == "-") {
        write(std::cout);
    } else {
        auto out = open_out(path);
        write(out);
    }
}

GridSpec estimate_grid(const LevelSetEstimate& est, int cells)
{
    const PointCloud& plus = est.split.plus;
    const double extent = (plus.upper() - plus.lower()).maxCoeff();
    // Room for the closing only while it stays small next to the data.
    const double pad = est.hull && 2.0 * est.hull->radius() <= extent ? 2.0 * est.hull->radius() : 0.0;
    double cell = (extent + 2.0 * pad) / cells;
    if (!(cell > 0.0))
        cell = 1.0 / cells;
    return make_grid(plus, pad + cell, cell);
}

IngestResult load(const std::string& path)
{
    IngestResult in = ingest_csv(path);
    if (in.duplicates_removed > 0)
        std::cerr << "note: removed " << in.duplicates_removed << " duplicate point(s) from '" << path << "'\n";
    return in;
}

int cmd_fit(const RunConfig& c)
{
    check_level(c);
    if (c.grid < 8)
        throw ValidationError("--grid must be at least 8");
    const IngestResult in = load(c.input);
    const PointCloud& sample = in.points;
    const DensityModel model = model_of(c, sample);
    const BisectionConfig bis = bisection_of(c);

    LevelSetEstimate est;
    if (c.tau) {
        est = estimate_level_set_tau(sample, model, *c.tau, c.nu, c.p_margin.value_or(default_p_margin(*c.tau)), bis);
    } else {
        SplitConfig split;
        split.mode = SplitMode::fixed_dn;
        split.M = c.M;
        est = estimate_level_set_fixed(sample, model, *c.t, c.nu, split, bis);
    }
    const double content = est.content(sample);
    const ReportBlock block =
        make_report(est, content,
                    {{"n", std::to_string(sample.size())},
                     {"duplicates_removed", std::to_string(in.duplicates_removed)},
                     {"bandwidth", format_number(model.bandwidth())}});
    emit(c.report, [&](std::ostream& os) { write_report(os, block); });

    if (!c.boundary.empty()) {
        if (sample.dim() != 2)
            throw ValidationError("boundary output needs planar data");
        HullBoundary hb;
        if (est.hull) {
            hb = hull_boundary(*est.hull);
        } else {
            for (const auto& v : est.convex->vertices())
                hb.isolated_points.push_back(v);
        }
        emit(c.boundary, [&](std::ostream& os) { write_boundary_csv(os, hb); });
    }
    if (!c.mask.empty()) {
        if (sample.dim() != 2)
            throw ValidationError("mask output needs planar data");
        write_mask_pgm(c.mask, rasterize(est, estimate_grid(est, c.grid)));
    }
    return 0;
}

int cmd_r0(const RunConfig& c)
{
    PointCloud plus, minus;
    std::optional<double> t_plus, t_minus;
    if (!c.plus.empty()) {
        if (c.minus.empty())
            throw ValidationError("--plus needs --minus");
        plus = load(c.plus).points;
        minus = load(c.minus).points;
    } else {
        check_level(c);
        const PointCloud sample = load(c.input).points;
        const DensityModel model = model_of(c, sample);
        LevelSplit split;
        if (c.tau) {
            split = split_quantile(sample, model, *c.tau, c.p_margin.value_or(default_p_margin(*c.tau)));
        } else {
            const double dn = dn_default(sample.size(), static_cast<int>(sample.dim()), 2, c.M);
            split = split_fixed(sample, model, *c.t, dn);
        }
        if (split.plus_empty())
            throw EstimationError("X+ is empty at this level");
        plus = split.plus;
        minus = split.minus;
        t_plus = split.t_plus;
        t_minus = split.t_minus;
    }
    const R0Estimate r = estimate_r0(plus, minus, bisection_of(c));
    ReportBlock block{{"r_hat0", format_number(r.value)},
                      {"convex_separation", r.convex_separation ? "true" : "false"},
                      {"bracket_lo", format_number(r.bracket_lo)},
                      {"bracket_hi", format_number(r.bracket_hi)},
                      {"iterations", std::to_string(r.iterations)},
                      {"n_plus", std::to_string(plus.size())},
                      {"n_minus", std::to_string(minus.size())}};
    if (t_plus) {
        block.emplace_back("t_plus", format_number(*t_plus));
        block.emplace_back("t_minus", format_number(*t_minus));
    }
    emit(c.report, [&](std::ostream& os) { write_report(os, block); });
    return 0;
}

int cmd_threshold(const RunConfig& c)
{
    check_level(c, true);
    const PointCloud sample = load(c.input).points;
    const DensityModel model = model_of(c, sample);
    SplitConfig split;
    split.mode = SplitMode::fixed_dn;
    split.M = c.M;
    const auto grid = default_t_grid(kde_evaluate_batch(model, sample), c.levels);
    const ThresholdEstimate th = estimate_threshold(sample, model, *c.tau, c.nu, split, bisection_of(c), grid);
    const ReportBlock block{{"tau", format_number(*c.tau)},
                            {"f_hat", format_number(th.t)},
                            {"content", format_number(th.content)},
                            {"levels_scanned", std::to_string(th.levels.size())}};
    emit(c.report, [&](std::ostream& os) { write_report(os, block); });
    return 0;
}

int cmd_benchmark(const RunConfig& c)
{
    const Scenario sc = scenario_by_name(c.scenario);
    ExperimentConfig cfg;
    cfg.n_values = c.n_values;
    cfg.replicates = c.replicates;
    cfg.tau = c.tau;
    cfg.t = c.t;
    if (!cfg.tau && !cfg.t)
        cfg.tau = 0.5;
    cfg.nu = c.nu;
    cfg.p_margin = c.p_margin;
    cfg.split.mode = SplitMode::fixed_dn;
    cfg.split.M = c.M;
    cfg.bisection = bisection_of(c);
    cfg.kernel = kernel_of(c);
    cfg.bandwidth_scale = c.bandwidth_scale;
    cfg.grid_cells = c.grid;
    cfg.threshold = c.threshold;
    cfg.seed = c.seed;
    const ExperimentReport report = run_experiment(sc, cfg);

    const bool to_stdout = c.output.empty() || c.output == "-";
    emit(c.output, [&](std::ostream& os) { write_experiment_csv(os, report, c.runtime); });
    if (report.n_values.size() >= 3) {
        std::ostream& os = to_stdout ? std::cerr : std::cout;
        os << "slope_hausdorff=" << format_number(rate_slope(report, Metric::hausdorff))
           << " slope_measure=" << format_number(rate_slope(report, Metric::measure)) << '\n';
    }
    return 0;
}

SetRepr load_set(const std::string& path, double r)
{
    if (path.size() > 4 && path.substr(path.size() - 4) == ".pgm")
        return read_mask_pgm(path);
    PointCloud pts = load(path).points;
    if (r > 0.0)
        return RHull(std::move(pts), r);
    return pts;
}

int cmd_distance(const RunConfig& c)
{
    const SetRepr a = load_set(c.a, c.r_a);
    const SetRepr b = load_set(c.b, c.r_b);
    ReportBlock block{{"hausdorff", format_number(hausdorff(a, b, c.resolution))}};
    const auto* ma = std::get_if<GridMask>(&a);
    const auto* mb = std::get_if<GridMask>(&b);
    if (ma && mb)
        block.emplace_back("measure", format_number(measure_distance(*ma, *mb)));
    emit(c.report, [&](std::ostream& os) { write_report(os, block); });
    return 0;
}

void show_config(const RunConfig& c)
{
    const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("unset"); };
    std::string p_margin = "0.01 if tau in {0.9,0.95}; 0.1 if tau in {0.8,0.85}; else min(0.05, min(tau,1-tau)/2)";
    if (c.p_margin)
        p_margin = format_number(*c.p_margin);
    else if (c.tau && *c.tau > 0.0 && *c.tau < 1.0)
        p_margin = format_number(default_p_margin(*c.tau));
    std::string n;
    for (std::size_t i = 0; i < c.n_values.size(); ++i)
        n += (i ? "," : "") + std::to_string(c.n_values[i]);

    const ReportBlock block{
        {"command", c.command.empty() ? "none" : c.command},
        {"tau", opt(c.tau)},
        {"t", opt(c.t)},
        {"nu", format_number(c.nu)},
        {"p_margin", p_margin},
        {"M", format_number(c.M)},
        {"kernel", c.kernel},
        {"kernel_order", "2"},
        {"bandwidth", c.bandwidth ? format_number(*c.bandwidth) : "c (log n / n)^(1/(d+4))"},
        {"bandwidth_scale", c.bandwidth_scale ? format_number(*c.bandwidth_scale)
                                              : "half the geometric mean of the coordinate standard deviations"},
        {"max_iter", std::to_string(c.max_iter)},
        {"r_min", c.r_min > 0.0 ? format_number(c.r_min) : "auto (half the smallest X+ spacing)"},
        {"r_max", c.r_max > 0.0 ? format_number(c.r_max) : "auto (X+ diameter / 4, doubled while separating)"},
        {"grid", std::to_string(c.grid)},
        {"levels", std::to_string(c.levels)},
        {"n", n},
        {"reps", std::to_string(c.replicates)},
        {"seed", std::to_string(c.seed)},
    };
    write_report(std::cout, block);
}

void add_estimation_options(CLI::App* sub, RunConfig& c)
{
    sub->add_option("--tau", c.tau, "Probability level tau in (0, 1)");
    sub->add_option("--t", c.t, "Fixed density level t > 0");
    sub->add_option("--nu", c.nu, "Radius shrink factor in (0, 1)")->capture_default_str();
    sub->add_option("--p-margin", c.p_margin, "Quantile half-width for the tau split");
    sub->add_option("--M", c.M, "Constant of the fixed-level margin D_n")->capture_default_str();
    sub->add_option("--bandwidth", c.bandwidth, "Kernel bandwidth h (overrides the rule)");
    sub->add_option("--bandwidth-scale", c.bandwidth_scale, "Constant c of the bandwidth rule");
    sub->add_option("--kernel", c.kernel, "Kernel family: epanechnikov or biweight")->capture_default_str();
    sub->add_option("--max-iter", c.max_iter, "Bisection iterations I")->capture_default_str();
    sub->add_option("--r-min", c.r_min, "Initial lower bracket r_m (with --r-max disables auto bracketing)");
    sub->add_option("--r-max", c.r_max, "Initial upper bracket r_M");
    sub->add_option("--report", c.report, "Report output path (default stdout)");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Density level set estimation with r-convex hulls"};
    RunConfig c;
    bool show = false;
    app.add_flag("--show-config", show, "Print the effective configuration and defaults, then exit");
    app.require_subcommand(0, 1);

    auto* fit = app.add_subcommand("fit", "Estimate a level set from a CSV sample");
    fit->add_option("input", c.input, "Input CSV")->required();
    add_estimation_options(fit, c);
    fit->add_option("--boundary", c.boundary, "Write the hull boundary CSV here");
    fit->add_option("--mask", c.mask, "Write a PGM mask here (plus a .hdr sidecar)");
    fit->add_option("--grid", c.grid, "Mask cells along the longest side")->capture_default_str();

    auto* r0 = app.add_subcommand("r0", "Estimate r0 from a sample split or from explicit X+ / X- files");
    r0->add_option("input", c.input, "Input CSV (with --tau or --t)");
    r0->add_option("--plus", c.plus, "CSV of X+ points");
    r0->add_option("--minus", c.minus, "CSV of X- points");
    add_estimation_options(r0, c);

    auto* thr = app.add_subcommand("threshold", "Estimate the threshold f_tau by a level scan");
    thr->add_option("input", c.input, "Input CSV")->required();
    add_estimation_options(thr, c);
    thr->add_option("--levels", c.levels, "Number of scanned levels")->capture_default_str();

    auto* bench = app.add_subcommand("benchmark", "Run a replicate experiment on a known scenario");
    bench->add_option("scenario", c.scenario, "Scenario name: ring or bimodal")->required();
    add_estimation_options(bench, c);
    bench->add_option("--n", c.n_values, "Sample sizes, ascending")->delimiter(',')->capture_default_str();
    bench->add_option("--reps", c.replicates, "Replicates per sample size")->capture_default_str();
    bench->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    bench->add_option("--grid", c.grid, "Comparison grid cells along the longest side")->capture_default_str();
    bench->add_flag("--threshold", c.threshold, "Also estimate f_tau on every replicate");
    bench->add_flag("--runtime", c.runtime, "Include the runtime column");
    bench->add_option("--output,-o", c.output, "Experiment CSV path (default stdout)");

    auto* dist = app.add_subcommand("distance", "Distances between two sets (point CSV or PGM mask)");
    dist->add_option("a", c.a, "First set")->required();
    dist->add_option("b", c.b, "Second set")->required();
    dist->add_option("--r-a", c.r_a, "Treat the first point set as generators of an r-convex hull");
    dist->add_option("--r-b", c.r_b, "Treat the second point set as generators of an r-convex hull");
    dist->add_option("--resolution", c.resolution, "Rasterization cell (default: diagonal / 512)");
    dist->add_option("--report", c.report, "Report output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }
    for (auto* sub : app.get_subcommands())
        c.command = sub->get_name();

    if (show) {
        show_config(c);
        return 0;
    }
    try {
        if (c.command == "fit")
            return cmd_fit(c);
        if (c.command == "r0")
            return cmd_r0(c);
        if (c.command == "threshold")
            return cmd_threshold(c);
        if (c.command == "benchmark")
            return cmd_benchmark(c);
        if (c.command == "distance")
            return cmd_distance(c);
        std::cerr << app.help();
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const EstimationError& e) {
        std::cerr << "estimation failed: " << e.what() << '\n';
        return kExitEstimation;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << '\n';
        return kExitEstimation;
    }
}
