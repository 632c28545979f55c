#include "levelhull/rhull.hpp"

#include "levelhull/error.hpp"
#include "levelhull/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace levelhull {

struct RHull::Structure {
    PointCloud generators;
    double tol = 0.0;
    KdTree tree;
    std::unique_ptr<Delaunay2> delaunay;

    explicit Structure(PointCloud g) : generators(std::move(g))
    {
        tol = 1e-9 * (1.0 + generators.diameter_bound());
        tree = KdTree(generators);
        if (generators.dim() == 2) {
            std::vector<Eigen::Vector2d> sites(static_cast<std::size_t>(generators.size()));
            for (Eigen::Index i = 0; i < generators.size(); ++i)
                sites[static_cast<std::size_t>(i)] = generators[i].transpose();
            delaunay = std::make_unique<Delaunay2>(std::move(sites));
        }
    }

    bool in_cell(int site, const Eigen::Vector2d& c) const
    {
        const auto& sites = delaunay->sites();
        const double own = (c - sites[static_cast<std::size_t>(site)]).norm();
        for (int e : delaunay->incident_edges(site)) {
            const int other = delaunay->other_end(delaunay->edges()[static_cast<std::size_t>(e)], site);
            if ((c - sites[static_cast<std::size_t>(other)]).norm() + tol < own)
                return false;
        }
        return true;
    }

    // Maximizes the distance-to-generators function over the closed disc
    // B[q, r], one Voronoi cell at a time, and stops as soon as some
    // candidate exceeds r + tol (an empty open ball then covers q).
    bool contains_planar(const Eigen::Vector2d& q, double r) const
    {
        const auto [start, d2] = tree.nearest(q);
        if (std::sqrt(d2) <= tol)
            return true;

        const auto& sites = delaunay->sites();
        const auto& edges = delaunay->edges();
        const double limit = r + tol;
        const double r2 = r * r;

        std::vector<char> seen(sites.size(), 0);
        std::vector<int> queue{static_cast<int>(start)};
        seen[static_cast<std::size_t>(start)] = 1;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int a = queue[head];
            const Eigen::Vector2d& pa = sites[static_cast<std::size_t>(a)];

            // farthest point of the circle from a
            const Eigen::Vector2d away = q - pa;
            const double len = away.norm();
            if (len > 0.0 && r + len > limit) {
                const Eigen::Vector2d c = q + (r / len) * away;
                if (in_cell(a, c))
                    return false;
            }

            for (int eid : delaunay->incident_edges(a)) {
                const auto& e = edges[static_cast<std::size_t>(eid)];
                const Eigen::Vector2d rel = e.mid - q;
                const double half_b = e.normal.dot(rel);
                const double disc = half_b * half_b - (rel.squaredNorm() - r2);
                if (disc < 0.0)
                    continue;
                const double root = std::sqrt(disc);
                const double lo = std::max(-half_b - root, e.s_lo);
                const double hi = std::min(-half_b + root, e.s_hi);
                if (lo > hi)
                    continue;
                for (double s : {lo, hi}) {
                    if ((e.mid + s * e.normal - pa).norm() > limit)
                        return false;
                }
                const int b = delaunay->other_end(e, a);
                if (!seen[static_cast<std::size_t>(b)]) {
                    seen[static_cast<std::size_t>(b)] = 1;
                    queue.push_back(b);
                }
            }
        }
        return true;
    }
};

RHull::RHull(PointCloud generators, double radius) : radius_(radius)
{
    if (generators.empty())
        throw ValidationError("r-convex hull needs at least one generator");
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ValidationError("r-convex hull radius must be positive and finite");
    generators.remove_duplicates();
    s_ = std::make_shared<const Structure>(std::move(generators));
    if (s_->generators.dim() != 2)
        grid_ = std::make_shared<const GridMask>(grid_closing(s_->generators, radius_).mask);
}

RHull::RHull(std::shared_ptr<const Structure> s, double radius) : s_(std::move(s)), radius_(radius)
{
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw ValidationError("r-convex hull radius must be positive and finite");
    if (s_->generators.dim() != 2)
        grid_ = std::make_shared<const GridMask>(grid_closing(s_->generators, radius_).mask);
}

const PointCloud& RHull::generators() const
{
    return s_->generators;
}

double RHull::tolerance() const
{
    return s_->tol;
}

RHull RHull::with_radius(double radius) const
{
    return RHull(s_, radius);
}

const Delaunay2* RHull::delaunay() const
{
    return s_->delaunay.get();
}

bool RHull::contains(const Eigen::Ref<const Eigen::VectorXd>& query) const
{
    if (query.size() != dim())
        throw ValidationError("hull membership: query dimension does not match generators");
    if (!query.allFinite())
        throw ValidationError("hull membership: non-finite query");
    if (dim() == 2)
        return s_->contains_planar(Eigen::Vector2d(query(0), query(1)), radius_);
    const auto [idx, d2] = s_->tree.nearest(query);
    (void)idx;
    if (std::sqrt(d2) <= s_->tol)
        return true;
    return grid_->contains(query);
}

bool hull_contains(const RHull& hull, const Eigen::Ref<const Eigen::VectorXd>& query)
{
    return hull.contains(query);
}

int HullBoundary::chain_count() const
{
    if (arcs.empty())
        return 0;
    // Endpoints are nodes; arcs and coincident endpoints join them.
    const std::size_t m = arcs.size();
    std::vector<Eigen::Vector2d> ends(2 * m);
    double scale = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        ends[2 * i] = arcs[i].at(arcs[i].theta0);
        ends[2 * i + 1] = arcs[i].at(arcs[i].theta1);
        scale = std::max({scale, ends[2 * i].lpNorm<Eigen::Infinity>(), ends[2 * i + 1].lpNorm<Eigen::Infinity>()});
    }
    const double eps = 1e-8 * (1.0 + scale);

    std::vector<std::size_t> parent(2 * m);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&](std::size_t x, std::size_t y) { parent[find(x)] = find(y); };

    std::vector<std::size_t> order(2 * m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return ends[x].x() < ends[y].x(); });
    for (std::size_t i = 0; i < m; ++i)
        unite(2 * i, 2 * i + 1);
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i + 1; j < order.size() && ends[order[j]].x() - ends[order[i]].x() <= eps; ++j)
            if ((ends[order[j]] - ends[order[i]]).norm() <= eps)
                unite(order[i], order[j]);

    int chains = 0;
    for (std::size_t i = 0; i < parent.size(); ++i)
        if (find(i) == i)
            ++chains;
    return chains;
}

namespace {

// Angles in [0, 2 pi) of the intersections of circle(c, r) with circle(o, radius).
void circle_crossings(const Eigen::Vector2d& c, double r, const Eigen::Vector2d& o, double radius,
                      std::vector<double>& out)
{
    const Eigen::Vector2d d = o - c;
    const double len = d.norm();
    if (len == 0.0 || len > r + radius || len < std::abs(r - radius))
        return;
    const double cosine = std::clamp((len * len + r * r - radius * radius) / (2.0 * len * r), -1.0, 1.0);
    const double phi = std::atan2(d.y(), d.x());
    const double delta = std::acos(cosine);
    out.push_back(phi - delta);
    out.push_back(phi + delta);
}

// Angles of the intersections of circle(c, r) with the line g + t u.
void line_crossings(const Eigen::Vector2d& c, double r, const Eigen::Vector2d& g, const Eigen::Vector2d& u,
                    std::vector<double>& out)
{
    const Eigen::Vector2d w = g - c;
    const double b = u.dot(w);
    const double disc = b * b - (w.squaredNorm() - r * r);
    if (disc < 0.0)
        return;
    for (double t : {-b - std::sqrt(disc), -b + std::sqrt(disc)}) {
        const Eigen::Vector2d x = w + t * u;
        out.push_back(std::atan2(x.y(), x.x()));
    }
}

} // namespace

HullBoundary hull_boundary(const RHull& hull)
{
    if (hull.dim() != 2)
        throw ValidationError("hull boundary extraction is only supported in dimension 2");
    const Delaunay2& dt = *hull.delaunay();
    const auto& sites = dt.sites();
    const double r = hull.radius();
    const double tol = hull.tolerance();
    constexpr double two_pi = 2.0 * std::numbers::pi;

    // Centers of empty r-balls touching two generators, with the minor arc
    // between those generators.
    std::vector<BoundaryArc> candidates;
    std::vector<std::vector<int>> incident(sites.size());
    for (const auto& e : dt.edges()) {
        const Eigen::Vector2d& pa = sites[static_cast<std::size_t>(e.a)];
        const Eigen::Vector2d& pb = sites[static_cast<std::size_t>(e.b)];
        const double half = 0.5 * (pb - pa).norm();
        if (half > r + tol)
            continue;
        const double h = std::sqrt(std::max(0.0, r * r - half * half));
        const double span = 2.0 * std::asin(std::min(1.0, half / r));
        for (int side : {1, -1}) {
            const double s = side * h;
            if (s < e.s_lo - tol || s > e.s_hi + tol)
                continue;
            BoundaryArc arc;
            arc.center = e.mid + s * e.normal;
            arc.radius = r;
            const Eigen::Vector2d toward = -static_cast<double>(side) * e.normal;
            const double phi = std::atan2(toward.y(), toward.x());
            arc.theta0 = phi - 0.5 * span;
            if (arc.theta0 <= -std::numbers::pi)
                arc.theta0 += two_pi;
            arc.theta1 = arc.theta0 + span;
            // endpoints ordered counter-clockwise
            const bool a_first = (arc.at(arc.theta0) - pa).norm() <= (arc.at(arc.theta0) - pb).norm();
            arc.a = a_first ? e.a : e.b;
            arc.b = a_first ? e.b : e.a;
            incident[static_cast<std::size_t>(e.a)].push_back(static_cast<int>(candidates.size()));
            incident[static_cast<std::size_t>(e.b)].push_back(static_cast<int>(candidates.size()));
            candidates.push_back(arc);
        }
    }

    HullBoundary out;
    std::vector<char> on_arc(sites.size(), 0);
    if (!candidates.empty()) {
        PointMatrix centers(static_cast<Eigen::Index>(candidates.size()), 2);
        for (std::size_t i = 0; i < candidates.size(); ++i)
            centers.row(static_cast<Eigen::Index>(i)) = candidates[i].center.transpose();
        const KdTree center_tree{PointCloud(std::move(centers))};
        const KdTree site_tree(hull.generators());

        // Coverage of a candidate arc by other empty balls can only change
        // where it crosses another center circle, a circle of radius 2r
        // about a generator, or the ray from a generator through one of its
        // own centers.
        std::vector<double> events;
        for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
            const BoundaryArc& arc = candidates[idx];
            const double span = arc.theta1 - arc.theta0;
            events.clear();
            for (Eigen::Index k : center_tree.within(arc.center, 2.0 * r + tol))
                if (static_cast<std::size_t>(k) != idx)
                    circle_crossings(arc.center, r, candidates[static_cast<std::size_t>(k)].center, r, events);
            for (Eigen::Index g : site_tree.within(arc.center, 3.0 * r + tol)) {
                const Eigen::Vector2d& pg = sites[static_cast<std::size_t>(g)];
                circle_crossings(arc.center, r, pg, 2.0 * r, events);
                for (int k : incident[static_cast<std::size_t>(g)]) {
                    const Eigen::Vector2d u = candidates[static_cast<std::size_t>(k)].center - pg;
                    if (u.norm() > 0.0)
                        line_crossings(arc.center, r, pg, u.normalized(), events);
                }
            }
            // Offsets from theta0, keeping those strictly inside the arc.
            std::vector<double> cuts{0.0};
            for (double a : events) {
                const double t = std::fmod(std::fmod(a - arc.theta0, two_pi) + two_pi, two_pi);
                if (t * r > tol && (span - t) * r > tol)
                    cuts.push_back(t);
            }
            cuts.push_back(span);
            std::sort(cuts.begin(), cuts.end());

            double start = -1.0;
            auto emit = [&](double t0, double t1) {
                if ((t1 - t0) * r <= tol)
                    return;
                BoundaryArc piece = arc;
                piece.theta0 = arc.theta0 + t0;
                piece.theta1 = arc.theta0 + t1;
                piece.a = t0 == 0.0 ? arc.a : -1;
                piece.b = t1 == span ? arc.b : -1;
                for (int g : {piece.a, piece.b})
                    if (g >= 0)
                        on_arc[static_cast<std::size_t>(g)] = 1;
                out.arcs.push_back(piece);
            };
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
                const bool kept = hull.contains(arc.at(arc.theta0 + mid));
                if (kept && start < 0.0)
                    start = cuts[i];
                if (!kept && start >= 0.0) {
                    emit(start, cuts[i]);
                    start = -1.0;
                }
            }
            if (start >= 0.0)
                emit(start, span);
        }
    }

    // Generators on the boundary that no arc ends at.
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (on_arc[i])
            continue;
        bool reaches = dt.incident_edges(static_cast<int>(i)).empty();
        for (int eid : dt.incident_edges(static_cast<int>(i))) {
            const auto& e = dt.edges()[static_cast<std::size_t>(eid)];
            if (!std::isfinite(e.s_lo) || !std::isfinite(e.s_hi)) {
                reaches = true;
                break;
            }
            for (double s : {e.s_lo, e.s_hi})
                if ((e.mid + s * e.normal - sites[i]).norm() >= r - tol)
                    reaches = true;
            if (reaches)
                break;
        }
        if (reaches)
            out.isolated_points.push_back(sites[i]);
    }
    return out;
}

bool hull_separates(const RHull& plus_hull, const PointCloud& minus, double r)
{
    if (minus.empty())
        return true;
    if (minus.dim() != plus_hull.dim())
        throw ValidationError("separation test: X+ and X- have different dimensions");
    const RHull hull = plus_hull.radius() == r ? plus_hull : plus_hull.with_radius(r);
    for (Eigen::Index i = 0; i < minus.size(); ++i) {
        if (hull.contains(minus[i].transpose()))
            return false;
    }
    return true;
}

bool hull_separates(const PointCloud& plus, const PointCloud& minus, double r)
{
    if (plus.empty())
        throw EstimationError("separation test needs a nonempty X+ set");
    return hull_separates(RHull(plus, r), minus, r);
}

ConvexHull2::ConvexHull2(const PointCloud& points)
{
    if (points.dim() != 2)
        throw ValidationError("convex hull membership is only supported in dimension 2");
    if (points.empty())
        throw ValidationError("convex hull of an empty set");
    std::vector<Eigen::Vector2d> p(static_cast<std::size_t>(points.size()));
    for (Eigen::Index i = 0; i < points.size(); ++i)
        p[static_cast<std::size_t>(i)] = points[i].transpose();
    std::sort(p.begin(), p.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) {
        hull_ = p;
        return;
    }
    // Andrew's monotone chain, dropping collinear vertices.
    std::vector<Eigen::Vector2d> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && predicates::orient2d(h[k - 2], h[k - 1], p[i]) <= 0)
            --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && predicates::orient2d(h[k - 2], h[k - 1], p[i]) <= 0)
            --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);
    if (h.size() < 3) // all collinear: keep the two extremes
        h = {p.front(), p.back()};
    hull_ = std::move(h);
}

bool ConvexHull2::contains(const Eigen::Ref<const Eigen::VectorXd>& query) const
{
    if (query.size() != 2)
        throw ValidationError("convex hull membership: query must be planar");
    const Eigen::Vector2d q(query(0), query(1));
    if (hull_.size() == 1)
        return q == hull_[0];
    if (hull_.size() == 2) {
        const auto& a = hull_[0];
        const auto& b = hull_[1];
        if (predicates::orient2d(a, b, q) != 0)
            return false;
        return q.x() >= std::min(a.x(), b.x()) && q.x() <= std::max(a.x(), b.x())
               && q.y() >= std::min(a.y(), b.y()) && q.y() <= std::max(a.y(), b.y());
    }
    for (std::size_t i = 0; i < hull_.size(); ++i) {
        if (predicates::orient2d(hull_[i], hull_[(i + 1) % hull_.size()], q) < 0)
            return false;
    }
    return true;
}

bool convex_hull_contains(const PointCloud& points, const Eigen::Ref<const Eigen::VectorXd>& query)
{
    return ConvexHull2(points).contains(query);
}

} // namespace levelhull
