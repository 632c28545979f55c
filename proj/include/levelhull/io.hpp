#pragma once

#include "levelhull/grid.hpp"
#include "levelhull/levelset.hpp"
#include "levelhull/point_cloud.hpp"
#include "levelhull/rhull.hpp"
#include "levelhull/simulation.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace levelhull {

/// 12 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);
/// Strict parse of a whole field (surrounding blanks allowed).
std::optional<double> parse_number(const std::string& field);

struct IngestResult {
    PointCloud points;
    std::size_t duplicates_removed = 0;
    bool had_header = false;
};

/// Reads comma-separated points, one per line. A first line with no numeric
/// field is taken as a header. Blank lines are skipped. Exact duplicate
/// points are dropped after the first occurrence.
IngestResult read_points_csv(std::istream& in);
IngestResult ingest_csv(const std::string& path);
void write_points_csv(std::ostream& out, const PointCloud& points);

void write_boundary_csv(std::ostream& out, const HullBoundary& boundary);
HullBoundary read_boundary_csv(std::istream& in);

/// Plain PGM (P2), top image row = largest y, occupied cells 255. The grid
/// geometry goes to `<path>.hdr` as "origin_x origin_y cell nx ny".
void write_mask_pgm(const std::string& path, const GridMask& mask);
GridMask read_mask_pgm(const std::string& path);

using ReportBlock = std::vector<std::pair<std::string, std::string>>;

/// key=value lines: tau, t, r_hat0, r_n, nu, n_plus, n_minus, content,
/// convex_fallback, then any extras.
ReportBlock make_report(const LevelSetEstimate& est, double content, const ReportBlock& extras = {});
void write_report(std::ostream& out, const ReportBlock& block);
std::map<std::string, std::string> read_report(std::istream& in);

/// One row per record after a "# {json}" metadata line. The runtime column
/// is only written on request, so that reports from equal seeds are
/// byte-identical.
void write_experiment_csv(std::ostream& out, const ExperimentReport& report, bool include_runtime = false);

struct ExperimentTable {
    std::string metadata; ///< JSON text of the header block
    std::vector<std::string> columns;
    std::vector<ExperimentRecord> records;
};
ExperimentTable read_experiment_csv(std::istream& in);

} // namespace levelhull
