// Acceptance suite: one line per criterion, exit status 1 when any fails.
// Usage: test_acceptance <path to the levelhull executable> [criterion ...]

#include "levelhull/error.hpp"
#include "levelhull/grid.hpp"
#include "levelhull/io.hpp"
#include "levelhull/levelset.hpp"
#include "levelhull/rhull.hpp"
#include "levelhull/simulation.hpp"

#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace levelhull;
using V = Eigen::Vector2d;
namespace fs = std::filesystem;

namespace {

int failures = 0;
std::map<int, std::string> verdicts;

void verdict(int id, const std::string& name, bool ok, const std::string& detail,
             const std::vector<std::string>& notes = {})
{
    std::string line = "criterion " + std::to_string(id) + " (" + name + "): " + (ok ? "PASS" : "FAIL") + "  " + detail;
    for (const auto& n : notes)
        line += "\n    " + n;
    verdicts[id] = line;
    if (!ok)
        ++failures;
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int digits = 4)
{
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

std::string join(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

bool nonincreasing(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] <= v[i - 1]))
            return false;
    return true;
}

// Query mix for the hull laws: half near a generator, half over the padded box.
V random_query(support::TestRng& rng, const PointCloud& pts, double r)
{
    if (rng.uniform() < 0.5) {
        const auto i = static_cast<Eigen::Index>(rng.integer(0, static_cast<int>(pts.size()) - 1));
        return V(pts.matrix()(i, 0), pts.matrix()(i, 1)) + V(rng.uniform(-r, r), rng.uniform(-r, r));
    }
    return V(rng.uniform(pts.lower()(0) - r, pts.upper()(0) + r), rng.uniform(pts.lower()(1) - r, pts.upper()(1) + r));
}

// Supporting lines of the convex hull, found by brute force over all pairs.
struct BruteConvex {
    std::vector<std::pair<V, V>> edges;
    bool degenerate = true;
};

BruteConvex brute_convex(const PointCloud& a)
{
    BruteConvex h;
    const Eigen::Index n = a.size();
    auto p = [&](Eigen::Index i) { return V(a.matrix()(i, 0), a.matrix()(i, 1)); };
    auto cross = [](const V& u, const V& v) { return u.x() * v.y() - u.y() * v.x(); };
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || p(i) == p(j))
                continue;
            bool all_left = true, any_strict = false;
            for (Eigen::Index k = 0; k < n; ++k) {
                const double s = cross(p(j) - p(i), p(k) - p(i));
                all_left = all_left && s >= -1e-12;
                any_strict = any_strict || s > 1e-12;
            }
            if (all_left && any_strict)
                h.edges.emplace_back(p(i), p(j));
        }
    h.degenerate = h.edges.empty();
    return h;
}

bool in_convex(const BruteConvex& h, const PointCloud& a, const V& q)
{
    if (h.degenerate)
        return support::brute_convex_contains(a, q);
    for (const auto& [u, v] : h.edges) {
        const V e = v - u, w = q - u;
        if (e.x() * w.y() - e.y() * w.x() < -1e-12)
            return false;
    }
    return true;
}

void criterion_oracle()
{
    Stopwatch clock;
    support::TestRng rng(1);
    int checked = 0, skipped = 0;
    std::vector<std::string> bad;
    for (int cfg = 0; cfg < 100; ++cfg) {
        const int n = rng.integer(2, 50);
        const PointCloud pts = support::uniform_points(rng, n, 0.0, 1.0);
        const double r = rng.uniform(0.03, 0.5);
        const RHull hull(pts, r);
        const double cell = r / 40.0;
        const GridMask closed = grid_closing(pts, r, make_grid(pts, 2.0 * r + cell, cell)).mask;
        std::vector<std::uint8_t> outside(closed.occupied.size());
        for (std::size_t k = 0; k < outside.size(); ++k)
            outside[k] = closed.occupied[k] ? 0 : 1;
        const auto to_in = squared_edt(closed.grid, closed.occupied);
        const auto to_out = squared_edt(closed.grid, outside);
        for (int k = 0; k < 50; ++k) {
            const V q(rng.uniform(-r, 1.0 + r), rng.uniform(-r, 1.0 + r));
            const auto at = closed.grid.locate(q);
            bool grid_in = false;
            if (at) {
                grid_in = closed.at(*at);
                const auto kk = static_cast<std::size_t>(*at);
                // within two cells of the discretized boundary
                if ((grid_in ? to_out[kk] : to_in[kk]) <= 4.0) {
                    ++skipped;
                    continue;
                }
            }
            ++checked;
            if (hull.contains(q) != grid_in) {
                const double margin = support::brute_max_distance(pts, q, r) - r;
                bad.push_back("config " + std::to_string(cfg) + " n=" + std::to_string(n) + " r=" + fmt(r) +
                              " grid=" + (grid_in ? "in" : "out") + " exact margin=" + fmt(margin, 3) +
                              " cells=" + fmt(margin / cell, 3));
            }
        }
    }
    const double t = clock.seconds();
    verdict(1, "exact membership vs grid closing", bad.empty() && t < 60.0,
            std::to_string(checked) + " queries checked, " + std::to_string(skipped) + " near the boundary skipped, " +
                std::to_string(bad.size()) + " disagreements, cell r/40, " + fmt(t, 3) + " s",
            bad);
}

void criterion_laws()
{
    Stopwatch clock;
    support::TestRng rng(2);
    int contain_bad = 0, nest_bad = 0, convex_bad = 0, idem_bad = 0;
    for (int c = 0; c < 1000; ++c) {
        const PointCloud pts = support::uniform_points(rng, rng.integer(2, 50), 0.0, 1.0);
        const double r = rng.uniform(0.03, 0.5);
        const RHull hull(pts, r);
        for (Eigen::Index i = 0; i < pts.size(); ++i)
            if (!hull.contains(pts.point(i)))
                ++contain_bad;
    }
    for (int c = 0; c < 1000; ++c) {
        const PointCloud pts = support::uniform_points(rng, rng.integer(2, 50), 0.0, 1.0);
        const double r1 = rng.uniform(0.03, 0.5);
        const double r2 = r1 * rng.uniform(1.0, 4.0);
        const RHull small(pts, r1);
        const RHull large = small.with_radius(r2);
        for (int k = 0; k < 50; ++k) {
            const V q = random_query(rng, pts, r2);
            if (small.contains(q) && !large.contains(q))
                ++nest_bad;
        }
    }
    for (int c = 0; c < 1000; ++c) {
        const PointCloud pts = support::uniform_points(rng, rng.integer(2, 50), 0.0, 1.0);
        const RHull hull(pts, rng.uniform(0.03, 2.0));
        const BruteConvex conv = brute_convex(pts);
        for (int k = 0; k < 50; ++k) {
            const V q = random_query(rng, pts, 0.1);
            if (hull.contains(q) && !in_convex(conv, pts, q))
                ++convex_bad;
        }
    }
    for (int c = 0; c < 1000; ++c) {
        const PointCloud pts = support::uniform_points(rng, rng.integer(2, 50), 0.0, 1.0);
        const double r = rng.uniform(0.05, 0.5);
        const GridSpec g = make_grid(pts, 2.0 * r + r / 10.0, r / 10.0);
        const GridMask once = grid_closing(pts, r, g).mask;
        const GridMask twice = grid_closing(once.occupied_centers(), r, g).mask;
        if (once.occupied != twice.occupied)
            ++idem_bad;
    }
    const double t = clock.seconds();
    verdict(2, "hull laws", contain_bad + nest_bad + convex_bad + idem_bad == 0 && t < 60.0,
            "violations: containment " + std::to_string(contain_bad) + ", nestedness " + std::to_string(nest_bad) +
                ", convex bound " + std::to_string(convex_bad) + ", closing idempotence " + std::to_string(idem_bad) +
                " (1000 cases each), " + fmt(t, 3) + " s");
}

void criterion_ring_sample()
{
    support::TestRng rng(3);
    const PointCloud ring = support::annulus_sample(rng, 400, 0.2, 0.4);
    const V origin(0.0, 0.0);
    const bool at_015 = RHull(ring, 0.15).contains(origin);
    const bool at_025 = RHull(ring, 0.25).contains(origin);
    verdict(3, "uniform ring sample", !at_015 && at_025,
            std::string("origin in hull: r=0.15 ") + (at_015 ? "yes" : "no") + ", r=0.25 " + (at_025 ? "yes" : "no"));
}

void criterion_bisection()
{
    BisectionConfig cfg;
    cfg.max_iter = 20;
    const R0Estimate r = estimate_r0(support::deterministic_ring(), PointCloud{{0.0, 0.0}}, cfg);
    const double bound = std::max(0.02, (r.bracket_hi - r.bracket_lo) / std::ldexp(1.0, 20));
    const double err = std::abs(r.value - 0.2);
    verdict(4, "r0 bisection on the deterministic ring", !r.convex_separation && err <= bound,
            "r_hat0=" + fmt(r.value, 8) + " |error|=" + fmt(err, 3) + " bound=" + fmt(bound, 3) + " bracket [" +
                fmt(r.bracket_lo) + ", " + fmt(r.bracket_hi) + "]");
}

// Content counts against ceil((1 - tau) n): the fraction 1 - tau is not exact in binary.
int content_violations(const ExperimentReport& rep, double tau)
{
    int bad = 0;
    for (const auto& r : rep.records) {
        const auto inside = std::llround(r.content * static_cast<double>(r.n));
        const auto need = static_cast<long long>(std::ceil((1.0 - tau) * static_cast<double>(r.n) - 1e-9));
        if (inside < need)
            ++bad;
    }
    return bad;
}

void criteria_experiment(int& content_bad, std::size_t& content_records)
{
    Stopwatch clock;
    const Scenario sc = scenario_ring();
    ExperimentConfig cfg;
    cfg.n_values = {500, 2000, 8000};
    cfg.replicates = 20;
    cfg.tau = 0.5;
    cfg.seed = 1;
    const ExperimentReport rep = run_experiment(sc, cfg);
    const double t = clock.seconds();

    const auto r0 = rep.medians(Metric::r0_error);
    verdict(5, "r0 consistency", nonincreasing(r0) && t < 600.0,
            "median |r_hat0 - r0| by n: " + join(r0) + " (r0=" + fmt(rep.records.front().r0_true) + "), " +
                fmt(t, 3) + " s");

    const auto dh = rep.medians(Metric::hausdorff);
    const auto dm = rep.medians(Metric::measure);
    const double slope = rate_slope(rep, Metric::hausdorff);
    verdict(6, "rate", nonincreasing(dh) && nonincreasing(dm) && slope >= -1.2 && slope <= -0.15,
            "median d_H: " + join(dh) + "; median d_mu: " + join(dm),
            {"slope_hausdorff=" + format_number(slope) +
             " slope_measure=" + format_number(rate_slope(rep, Metric::measure))});

    content_bad += content_violations(rep, 0.5);
    content_records += rep.records.size();
}

void criterion_threshold(int& content_bad, std::size_t& content_records)
{
    Stopwatch clock;
    const Scenario sc = scenario_ring();
    const double f_tau = quadrature_ftau(sc.density, scenario_grid(sc, 2048), 0.5);
    ExperimentConfig cfg;
    cfg.n_values = {2000, 4000};
    cfg.replicates = 20;
    cfg.tau = 0.5;
    cfg.threshold = true;
    cfg.seed = 1;
    const ExperimentReport rep = run_experiment(sc, cfg);
    std::vector<double> medians;
    for (long long n : cfg.n_values) {
        std::vector<double> err;
        for (const auto& r : rep.records)
            if (r.n == n)
                err.push_back(std::abs(r.f_hat - f_tau));
        medians.push_back(summarize(err).median);
    }
    verdict(8, "threshold", nonincreasing(medians),
            "f_tau=" + fmt(f_tau, 6) + " median |f_hat - f_tau| at n=2000, 4000: " + join(medians) + ", " +
                fmt(clock.seconds(), 3) + " s");
    content_bad += content_violations(rep, 0.5);
    content_records += rep.records.size();
}

// CLI helpers

struct Run {
    int code = -1;
    std::string out;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Run run(const std::string& exe, const std::string& args, const fs::path& dir)
{
    const fs::path out = dir / "stdout.txt";
    const std::string cmd = "\"" + exe + "\" " + args + " > \"" + out.string() + "\" 2> \"" + (dir / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    return r;
}

std::map<std::string, std::string> report_of(const std::string& text)
{
    std::istringstream in(text);
    return read_report(in);
}

void criterion_cli(const std::string& exe)
{
    Stopwatch clock;
    const fs::path dir = fs::temp_directory_path() / "levelhull_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::vector<std::string> problems;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok)
            problems.push_back(what);
    };

    const fs::path ring_csv = dir / "ring.csv";
    {
        std::ofstream f(ring_csv);
        f << "x,y\n";
        write_points_csv(f, scenario_ring().sampler(11, 1000));
    }
    const fs::path blob_csv = dir / "blob.csv";
    {
        Rng rng(12);
        PointCloud blob(2);
        for (int i = 0; i < 2000; ++i)
            blob.push_back(V(rng.normal(), rng.normal()));
        std::ofstream f(blob_csv);
        write_points_csv(f, blob);
    }

    // fit: report, boundary and mask, twice
    const std::string fit_args = "fit \"" + ring_csv.string() + "\" --tau 0.5 --boundary \"" +
                                 (dir / "b.csv").string() + "\" --mask \"" + (dir / "m.pgm").string() + "\" --grid 128";
    const Run fit1 = run(exe, fit_args, dir);
    const std::string b1 = slurp(dir / "b.csv"), m1 = slurp(dir / "m.pgm");
    const Run fit2 = run(exe, fit_args, dir);
    expect(fit1.code == 0 && fit2.code == 0, "fit exit code");
    expect(fit1.out == fit2.out && b1 == slurp(dir / "b.csv") && m1 == slurp(dir / "m.pgm"), "fit outputs differ between runs");
    try {
        const auto kv = report_of(fit1.out);
        const double content = *parse_number(kv.at("content"));
        const auto n = std::stoll(kv.at("n"));
        expect(std::llround(content * static_cast<double>(n)) >= (n + 1) / 2, "fit content below 1 - tau");
        expect(std::isfinite(*parse_number(kv.at("r_hat0"))), "fit r_hat0 not finite");
        expect(kv.at("convex_fallback") == "false", "ring fit fell back to the convex hull");
        std::istringstream bs(b1);
        const HullBoundary hb = read_boundary_csv(bs);
        expect(!hb.arcs.empty(), "empty boundary");
        std::ostringstream again;
        write_boundary_csv(again, hb);
        expect(again.str() == b1, "boundary CSV not byte-stable on re-serialization");
        const GridMask mask = read_mask_pgm((dir / "m.pgm").string());
        write_mask_pgm((dir / "m2.pgm").string(), mask);
        expect(slurp(dir / "m2.pgm") == m1 && slurp(dir / "m2.pgm.hdr") == slurp(dir / "m.pgm.hdr"),
               "mask not byte-stable on re-serialization");
        expect(mask.count() > 0, "empty mask");
    } catch (const std::exception& e) {
        problems.push_back(std::string("fit outputs unreadable: ") + e.what());
    }

    // convex fallback on a single Gaussian blob, at the level holding 80% of the mass
    const Run blob = run(exe, "fit \"" + blob_csv.string() + "\" --t 0.0318", dir);
    expect(blob.code == 0 && report_of(blob.out)["convex_fallback"] == "true", "blob fit did not flag convex_fallback");

    // benchmark: record count, determinism, slope line
    const std::string bench = "benchmark ring --n 500,2000 --reps 2 --seed 7 --grid 128 -o ";
    const Run e1 = run(exe, bench + "\"" + (dir / "e1.csv").string() + "\"", dir);
    const Run e2 = run(exe, bench + "\"" + (dir / "e2.csv").string() + "\"", dir);
    expect(e1.code == 0 && e2.code == 0, "benchmark exit code");
    expect(slurp(dir / "e1.csv") == slurp(dir / "e2.csv"), "benchmark files differ for the same seed");
    try {
        std::ifstream in(dir / "e1.csv");
        expect(read_experiment_csv(in).records.size() == 4, "benchmark record count");
    } catch (const std::exception& e) {
        problems.push_back(std::string("benchmark CSV unreadable: ") + e.what());
    }
    const Run e3 = run(exe, "benchmark ring --n 200,400,800 --reps 2 --grid 64 -o \"" + (dir / "e3.csv").string() + "\"", dir);
    expect(e3.code == 0 && e3.out.find("slope_hausdorff=") != std::string::npos, "benchmark slope line missing");

    // exit codes
    expect(run(exe, "fit \"" + ring_csv.string() + "\" --tau 1.5", dir).code == 2, "tau outside (0,1) must exit 2");
    expect(run(exe, "fit \"" + (dir / "missing.csv").string() + "\" --tau 0.5", dir).code == 2, "missing file must exit 2");
    expect(run(exe, "benchmark square --n 500 --reps 1", dir).code == 2, "unknown scenario must exit 2");
    expect(run(exe, "fit --tau 0.5", dir).code == 2, "missing input must exit 2");
    {
        std::ofstream f(dir / "bad.csv");
        f << "0,0\n1,abc\n";
    }
    const Run bad = run(exe, "fit \"" + (dir / "bad.csv").string() + "\" --tau 0.5", dir);
    expect(bad.code == 2 && slurp(dir / "stderr.txt").find("row 2") != std::string::npos, "bad row must exit 2 naming row 2");
    expect(run(exe, "fit \"" + ring_csv.string() + "\" --t 1e9", dir).code == 3, "empty X+ must exit 3");
    expect(run(exe, "--show-config", dir).code == 0, "--show-config exit code");

    const double t = clock.seconds();
    fs::remove_all(dir);
    std::string detail = problems.empty() ? "all checks passed" : std::to_string(problems.size()) + " problems";
    verdict(9, "command line", problems.empty() && t < 60.0, detail + ", " + fmt(t, 3) + " s", problems);
}

} // namespace

int main(int argc, char** argv)
{
    if (argc < 2) {
        std::cerr << "usage: test_acceptance <levelhull executable>\n";
        return 2;
    }
    std::set<int> only;
    for (int i = 2; i < argc; ++i)
        only.insert(std::atoi(argv[i]));
    auto want = [&](std::initializer_list<int> ids) {
        if (only.empty())
            return true;
        for (int id : ids)
            if (only.count(id))
                return true;
        return false;
    };
    if (want({1}))
        criterion_oracle();
    if (want({2}))
        criterion_laws();
    if (want({3}))
        criterion_ring_sample();
    if (want({4}))
        criterion_bisection();
    if (want({5, 6, 7, 8})) {
        int content_bad = 0;
        std::size_t content_records = 0;
        criteria_experiment(content_bad, content_records);
        criterion_threshold(content_bad, content_records);
        verdict(7, "content guarantee", content_bad == 0,
                std::to_string(content_bad) + " of " + std::to_string(content_records) + " replicates below 1 - tau");
    }
    if (want({9}))
        criterion_cli(argv[1]);

    for (const auto& [id, line] : verdicts)
        std::cout << line << '\n';
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << '\n';
    return failures ? 1 : 0;
}
