#include "levelhull/io.hpp"

#include "levelhull/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace levelhull {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ','))
        out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

double require_number(const std::string& field, std::size_t line_no, const char* what)
{
    const auto v = parse_number(field);
    if (!v)
        throw ValidationError("line " + std::to_string(line_no) + ": " + what + " '" + field + "' is not a number");
    return *v;
}

} // namespace

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::optional<double> parse_number(const std::string& field)
{
    const std::string s = trim(field);
    if (s.empty())
        return std::nullopt;
    const char* first = s.data();
    if (*first == '+')
        ++first;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

IngestResult read_points_csv(std::istream& in)
{
    IngestResult res;
    std::vector<Point> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto fields = split_fields(line);
        if (first) {
            first = false;
            bool any_numeric = false;
            for (const auto& f : fields)
                any_numeric = any_numeric || parse_number(f).has_value();
            if (!any_numeric) {
                res.had_header = true;
                width = fields.size();
                continue;
            }
        }
        if (width == 0)
            width = fields.size();
        if (fields.size() != width)
            throw ValidationError("row " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                  " fields, found " + std::to_string(fields.size()));
        Point p(static_cast<Eigen::Index>(width));
        for (std::size_t j = 0; j < width; ++j) {
            const auto v = parse_number(fields[j]);
            if (!v)
                throw ValidationError("row " + std::to_string(line_no) + ": non-numeric value '" + fields[j] + "'");
            if (!std::isfinite(*v))
                throw ValidationError("row " + std::to_string(line_no) + ": non-finite value '" + fields[j] + "'");
            p(static_cast<Eigen::Index>(j)) = *v;
        }
        rows.push_back(std::move(p));
    }
    if (rows.empty())
        throw ValidationError("no data rows");
    res.points = PointCloud::from_rows(rows, static_cast<Eigen::Index>(width));
    res.duplicates_removed = res.points.remove_duplicates();
    return res;
}

IngestResult ingest_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot read '" + path + "'");
    return read_points_csv(in);
}

void write_points_csv(std::ostream& out, const PointCloud& points)
{
    for (Eigen::Index i = 0; i < points.size(); ++i) {
        for (Eigen::Index j = 0; j < points.dim(); ++j)
            out << (j ? "," : "") << format_number(points.matrix()(i, j));
        out << '\n';
    }
}

void write_boundary_csv(std::ostream& out, const HullBoundary& boundary)
{
    out << "kind,cx,cy,r,theta0,theta1\n";
    for (const auto& a : boundary.arcs)
        out << "arc," << format_number(a.center.x()) << ',' << format_number(a.center.y()) << ','
            << format_number(a.radius) << ',' << format_number(a.theta0) << ',' << format_number(a.theta1) << '\n';
    const auto& iso = boundary.isolated_points;
    for (Eigen::Index i = 0; i < iso.size(); ++i)
        out << "point," << format_number(iso.matrix()(i, 0)) << ',' << format_number(iso.matrix()(i, 1)) << ",,,\n";
}

HullBoundary read_boundary_csv(std::istream& in)
{
    HullBoundary b;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line) || trim(line) != "kind,cx,cy,r,theta0,theta1")
        throw ValidationError("boundary file: missing header");
    ++line_no;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto f = split_fields(line);
        if (f.size() != 6)
            throw ValidationError("line " + std::to_string(line_no) + ": expected 6 fields");
        if (f[0] == "arc") {
            BoundaryArc a;
            a.center = {require_number(f[1], line_no, "cx"), require_number(f[2], line_no, "cy")};
            a.radius = require_number(f[3], line_no, "r");
            a.theta0 = require_number(f[4], line_no, "theta0");
            a.theta1 = require_number(f[5], line_no, "theta1");
            b.arcs.push_back(a);
        } else if (f[0] == "point") {
            b.isolated_points.push_back(
                Eigen::Vector2d(require_number(f[1], line_no, "cx"), require_number(f[2], line_no, "cy")));
        } else {
            throw ValidationError("line " + std::to_string(line_no) + ": unknown kind '" + f[0] + "'");
        }
    }
    return b;
}

void write_mask_pgm(const std::string& path, const GridMask& mask)
{
    if (mask.grid.dim() != 2)
        throw ValidationError("PGM output needs a planar mask");
    const Eigen::Index nx = mask.grid.shape[0], ny = mask.grid.shape[1];
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot write '" + path + "'");
    out << "P2\n" << nx << ' ' << ny << "\n255\n";
    for (Eigen::Index y = ny - 1; y >= 0; --y) {
        for (Eigen::Index x = 0; x < nx; ++x)
            out << (x ? " " : "") << (mask.at(x + y * nx) ? 255 : 0);
        out << '\n';
    }
    std::ofstream hdr(path + ".hdr");
    if (!hdr)
        throw ValidationError("cannot write '" + path + ".hdr'");
    hdr << format_number(mask.grid.origin(0)) << ' ' << format_number(mask.grid.origin(1)) << ' '
        << format_number(mask.grid.cell) << ' ' << nx << ' ' << ny << '\n';
}

GridMask read_mask_pgm(const std::string& path)
{
    std::ifstream hdr(path + ".hdr");
    if (!hdr)
        throw ValidationError("cannot read '" + path + ".hdr'");
    std::string ox, oy, cell;
    Eigen::Index nx = 0, ny = 0;
    if (!(hdr >> ox >> oy >> cell >> nx >> ny))
        throw ValidationError("malformed mask header '" + path + ".hdr'");
    GridSpec g;
    g.origin = Eigen::Vector2d(require_number(ox, 1, "origin_x"), require_number(oy, 1, "origin_y"));
    g.cell = require_number(cell, 1, "cell");
    g.shape = {nx, ny};
    g.validate();

    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot read '" + path + "'");
    std::string magic;
    Eigen::Index w = 0, h = 0;
    int maxval = 0;
    if (!(in >> magic >> w >> h >> maxval) || magic != "P2" || maxval <= 0)
        throw ValidationError("'" + path + "' is not a plain PGM file");
    if (w != nx || h != ny)
        throw ValidationError("'" + path + "' does not match its header");
    GridMask mask(g);
    for (Eigen::Index y = ny - 1; y >= 0; --y)
        for (Eigen::Index x = 0; x < nx; ++x) {
            int v = 0;
            if (!(in >> v))
                throw ValidationError("'" + path + "' is truncated");
            mask.occupied[static_cast<std::size_t>(x + y * nx)] = v > 0 ? 1 : 0;
        }
    return mask;
}

ReportBlock make_report(const LevelSetEstimate& est, double content, const ReportBlock& extras)
{
    ReportBlock b{
        {"tau", format_number(est.tau.value_or(std::numeric_limits<double>::quiet_NaN()))},
        {"t", format_number(est.t)},
        {"r_hat0", format_number(est.r_hat0)},
        {"r_n", format_number(est.r_n)},
        {"nu", format_number(est.nu)},
        {"n_plus", std::to_string(est.split.plus.size())},
        {"n_minus", std::to_string(est.split.minus.size())},
        {"content", format_number(content)},
        {"convex_fallback", est.convex_fallback ? "true" : "false"},
    };
    b.insert(b.end(), extras.begin(), extras.end());
    return b;
}

void write_report(std::ostream& out, const ReportBlock& block)
{
    for (const auto& [k, v] : block)
        out << k << '=' << v << '\n';
}

std::map<std::string, std::string> read_report(std::istream& in)
{
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("line " + std::to_string(line_no) + ": expected key=value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

namespace {

const std::vector<std::string> kColumns{"n",       "replicate",       "seed",          "r_hat0",       "r0_true",
                                        "r0_error", "hausdorff",      "measure",       "content",      "convex_fallback",
                                        "plus_outside", "plus_hausdorff", "f_hat",     "threshold_error"};

nlohmann::json number_or_null(double v)
{
    if (std::isfinite(v))
        return v;
    return nullptr;
}

} // namespace

void write_experiment_csv(std::ostream& out, const ExperimentReport& report, bool include_runtime)
{
    const auto& c = report.config;
    nlohmann::ordered_json meta;
    meta["scenario"] = report.scenario;
    meta["n_values"] = report.n_values;
    meta["replicates"] = report.replicates;
    meta["seed"] = c.seed;
    meta["tau"] = c.tau ? nlohmann::ordered_json(*c.tau) : nlohmann::ordered_json(nullptr);
    meta["t"] = c.t ? nlohmann::ordered_json(*c.t) : nlohmann::ordered_json(nullptr);
    meta["t_true"] = number_or_null(report.t_true);
    meta["nu"] = c.nu;
    meta["p_margin"] = c.p_margin ? nlohmann::ordered_json(*c.p_margin) : nlohmann::ordered_json(nullptr);
    meta["M"] = c.split.M;
    meta["kernel"] = to_string(c.kernel.family);
    meta["kernel_order"] = c.kernel.order;
    meta["bandwidth_scale"] =
        c.bandwidth_scale ? nlohmann::ordered_json(*c.bandwidth_scale) : nlohmann::ordered_json(nullptr);
    meta["max_iter"] = c.bisection.max_iter;
    meta["grid_cells"] = c.grid_cells;
    meta["threshold"] = c.threshold;
    auto aggs = nlohmann::ordered_json::array();
    for (const auto& a : report.aggregates) {
        nlohmann::ordered_json row;
        row["n"] = a.n;
        for (const auto& [m, s] : a.metrics) {
            if (m == Metric::runtime && !include_runtime)
                continue;
            row[to_string(m)] = {{"median", number_or_null(s.median)}, {"iqr", number_or_null(s.iqr)}};
        }
        aggs.push_back(row);
    }
    meta["aggregates"] = aggs;
    out << "# " << meta.dump() << '\n';

    for (std::size_t i = 0; i < kColumns.size(); ++i)
        out << (i ? "," : "") << kColumns[i];
    out << (include_runtime ? ",runtime\n" : "\n");
    for (const auto& r : report.records) {
        out << r.n << ',' << r.replicate << ',' << r.seed << ',' << format_number(r.r_hat0) << ','
            << format_number(r.r0_true) << ',' << format_number(r.r0_error) << ',' << format_number(r.hausdorff)
            << ',' << format_number(r.measure) << ',' << format_number(r.content) << ','
            << (r.convex_fallback ? 1 : 0) << ',' << format_number(r.plus_outside) << ','
            << format_number(r.plus_hausdorff) << ',' << format_number(r.f_hat) << ','
            << format_number(r.threshold_error);
        if (include_runtime)
            out << ',' << format_number(r.runtime);
        out << '\n';
    }
}

ExperimentTable read_experiment_csv(std::istream& in)
{
    ExperimentTable t;
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
        throw ValidationError("experiment file: missing metadata line");
    t.metadata = line.substr(2);
    if (!nlohmann::json::accept(t.metadata))
        throw ValidationError("experiment file: metadata is not valid JSON");
    ++line_no;
    if (!std::getline(in, line))
        throw ValidationError("experiment file: missing column header");
    t.columns = split_fields(trim(line));
    std::vector<std::string> expect = kColumns;
    const bool runtime = t.columns.size() == kColumns.size() + 1;
    if (runtime)
        expect.emplace_back("runtime");
    if (t.columns != expect)
        throw ValidationError("experiment file: unexpected columns");
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto f = split_fields(line);
        if (f.size() != expect.size())
            throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(expect.size()) +
                                  " fields");
        std::vector<double> v;
        for (std::size_t j = 0; j < f.size(); ++j)
            v.push_back(j == 2 ? 0.0 : require_number(f[j], line_no, expect[j].c_str()));
        ExperimentRecord r;
        r.n = static_cast<long long>(v[0]);
        r.replicate = static_cast<int>(v[1]);
        r.seed = std::stoull(f[2]);
        r.r_hat0 = v[3];
        r.r0_true = v[4];
        r.r0_error = v[5];
        r.hausdorff = v[6];
        r.measure = v[7];
        r.content = v[8];
        r.convex_fallback = v[9] != 0.0;
        r.plus_outside = v[10];
        r.plus_hausdorff = v[11];
        r.f_hat = v[12];
        r.threshold_error = v[13];
        if (runtime)
            r.runtime = v[14];
        t.records.push_back(r);
    }
    return t;
}

} // namespace levelhull
