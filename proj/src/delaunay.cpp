#include "levelhull/delaunay.hpp"

#include "levelhull/error.hpp"
#include "levelhull/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <utility>

namespace levelhull {

using predicates::incircle;
using predicates::orient2d;

namespace {

constexpr int kGhost = -1;

struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> n; // n[i] is across the edge opposite v[i]
    bool alive = true;
};

std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y, std::uint32_t order)
{
    std::uint64_t d = 0;
    for (std::uint32_t s = order / 2; s > 0; s /= 2) {
        const std::uint32_t rx = (x & s) > 0 ? 1u : 0u;
        const std::uint32_t ry = (y & s) > 0 ? 1u : 0u;
        d += static_cast<std::uint64_t>(s) * s * ((3u * rx) ^ ry);
        if (ry == 0) {
            if (rx == 1) {
                x = order - 1 - x;
                y = order - 1 - y;
            }
            std::swap(x, y);
        }
    }
    return d;
}

// Deterministic generator for the stochastic walk.
struct WalkRng {
    std::uint32_t state = 0x9e3779b9u;
    std::uint32_t next()
    {
        state ^= state << 13;
        state ^= state >> 17;
        state ^= state << 5;
        return state;
    }
};

class Builder {
public:
    explicit Builder(const std::vector<Eigen::Vector2d>& p) : p_(p) {}

    bool is_ghost(int t) const
    {
        const auto& v = tris_[static_cast<std::size_t>(t)].v;
        return v[0] == kGhost || v[1] == kGhost || v[2] == kGhost;
    }

    bool strictly_between(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& q) const
    {
        if (a.x() != b.x())
            return (q.x() > std::min(a.x(), b.x())) && (q.x() < std::max(a.x(), b.x()));
        return (q.y() > std::min(a.y(), b.y())) && (q.y() < std::max(a.y(), b.y()));
    }

    bool conflicts(int t, const Eigen::Vector2d& q) const
    {
        const auto& v = tris_[static_cast<std::size_t>(t)].v;
        for (int g = 0; g < 3; ++g) {
            if (v[static_cast<std::size_t>(g)] != kGhost)
                continue;
            const auto& a = p_[static_cast<std::size_t>(v[static_cast<std::size_t>((g + 1) % 3)])];
            const auto& b = p_[static_cast<std::size_t>(v[static_cast<std::size_t>((g + 2) % 3)])];
            const int o = orient2d(a, b, q);
            if (o != 0)
                return o > 0;
            return strictly_between(a, b, q);
        }
        return incircle(p_[static_cast<std::size_t>(v[0])], p_[static_cast<std::size_t>(v[1])],
                        p_[static_cast<std::size_t>(v[2])], q)
               > 0;
    }

    void init(int a, int b, int c)
    {
        if (orient2d(p_[static_cast<std::size_t>(a)], p_[static_cast<std::size_t>(b)], p_[static_cast<std::size_t>(c)]) < 0)
            std::swap(b, c);
        // 0 = real triangle; 1..3 = ghosts across its edges.
        tris_.push_back({{a, b, c}, {1, 2, 3}});
        // ghost across edge (b, c), opposite a: (c, b, G)
        tris_.push_back({{c, b, kGhost}, {0, 0, 0}});
        // ghost across edge (c, a): (a, c, G)
        tris_.push_back({{a, c, kGhost}, {0, 0, 0}});
        // ghost across edge (a, b): (b, a, G)
        tris_.push_back({{b, a, kGhost}, {0, 0, 0}});
        // Ghost (x, y, G): n[2] real triangle, n[0] across (y, G), n[1] across (G, x).
        auto link = [&](int g, int across_y, int across_x) {
            auto& t = tris_[static_cast<std::size_t>(g)];
            t.n = {across_y, across_x, 0};
        };
        // (c,b,G): edge (b,G) shared with ghost containing b as first vertex: (b,a,G)=3
        //          edge (G,c) shared with ghost containing c as second vertex: (a,c,G)=2
        link(1, 3, 2);
        // (a,c,G): edge (c,G) -> ghost starting with c: (c,b,G)=1 ; edge (G,a) -> ghost ending with a: (b,a,G)=3
        link(2, 1, 3);
        // (b,a,G): edge (a,G) -> (a,c,G)=2 ; edge (G,b) -> (c,b,G)=1
        link(3, 2, 1);
        hint_ = 0;
    }

    int locate(const Eigen::Vector2d& q)
    {
        int t = hint_;
        for (std::size_t guard = 0; guard < 4 * tris_.size() + 16; ++guard) {
            const auto& tri = tris_[static_cast<std::size_t>(t)];
            const int start = static_cast<int>(rng_.next() % 3u);
            bool moved = false;
            for (int k = 0; k < 3; ++k) {
                const int i = (start + k) % 3;
                const int a = tri.v[static_cast<std::size_t>((i + 1) % 3)];
                const int b = tri.v[static_cast<std::size_t>((i + 2) % 3)];
                if (orient2d(p_[static_cast<std::size_t>(a)], p_[static_cast<std::size_t>(b)], q) < 0) {
                    const int nb = tri.n[static_cast<std::size_t>(i)];
                    if (is_ghost(nb))
                        return nb;
                    t = nb;
                    moved = true;
                    break;
                }
            }
            if (!moved)
                return t;
        }
        // Fall back to a linear scan; only reachable on pathological inputs.
        for (std::size_t k = 0; k < tris_.size(); ++k) {
            if (tris_[k].alive && conflicts(static_cast<int>(k), q))
                return static_cast<int>(k);
        }
        throw Error("delaunay: point location failed");
    }

    void insert(int site)
    {
        const Eigen::Vector2d& q = p_[static_cast<std::size_t>(site)];
        const int start = locate(q);

        cavity_.clear();
        boundary_.clear();
        cavity_.push_back(start);
        tris_[static_cast<std::size_t>(start)].alive = false;
        for (std::size_t k = 0; k < cavity_.size(); ++k) {
            const int t = cavity_[k];
            for (int i = 0; i < 3; ++i) {
                const int nb = tris_[static_cast<std::size_t>(t)].n[static_cast<std::size_t>(i)];
                if (!tris_[static_cast<std::size_t>(nb)].alive)
                    continue; // already in the cavity
                if (conflicts(nb, q)) {
                    tris_[static_cast<std::size_t>(nb)].alive = false;
                    cavity_.push_back(nb);
                    continue;
                }
                const auto& v = tris_[static_cast<std::size_t>(t)].v;
                boundary_.push_back({v[static_cast<std::size_t>((i + 1) % 3)], v[static_cast<std::size_t>((i + 2) % 3)], nb});
            }
        }

        // Reuse dead slots first.
        std::vector<int> slots(cavity_.begin(), cavity_.end());
        while (slots.size() < boundary_.size()) {
            if (!free_.empty()) {
                slots.push_back(free_.back());
                free_.pop_back();
            } else {
                slots.push_back(static_cast<int>(tris_.size()));
                tris_.push_back({});
            }
        }
        for (std::size_t k = boundary_.size(); k < slots.size(); ++k)
            free_.push_back(slots[k]);

        starts_.clear();
        ends_.clear();
        for (std::size_t k = 0; k < boundary_.size(); ++k) {
            const auto [u, w, outside] = boundary_[k];
            const int t = slots[k];
            auto& tri = tris_[static_cast<std::size_t>(t)];
            tri.v = {u, w, site};
            tri.n = {-1, -1, outside};
            tri.alive = true;
            auto& o = tris_[static_cast<std::size_t>(outside)];
            for (int j = 0; j < 3; ++j) {
                const int vj = o.v[static_cast<std::size_t>(j)];
                if (vj != u && vj != w) {
                    o.n[static_cast<std::size_t>(j)] = t;
                    break;
                }
            }
            starts_.emplace_back(u, t);
            ends_.emplace_back(w, t);
        }
        auto find_in = [](const std::vector<std::pair<int, int>>& m, int key) {
            for (const auto& [k, t] : m)
                if (k == key)
                    return t;
            throw Error("delaunay: cavity boundary is not a simple cycle");
        };
        for (std::size_t k = 0; k < boundary_.size(); ++k) {
            const int t = slots[k];
            auto& tri = tris_[static_cast<std::size_t>(t)];
            tri.n[0] = find_in(starts_, tri.v[1]);
            tri.n[1] = find_in(ends_, tri.v[0]);
            if (!is_ghost(t))
                hint_ = t;
        }
    }

    std::vector<std::array<int, 3>> real_triangles() const
    {
        std::vector<std::array<int, 3>> out;
        for (std::size_t k = 0; k < tris_.size(); ++k) {
            if (tris_[k].alive && !is_ghost(static_cast<int>(k)))
                out.push_back(tris_[k].v);
        }
        return out;
    }

private:
    struct BoundaryEdge {
        int u;
        int w;
        int outside;
    };

    const std::vector<Eigen::Vector2d>& p_;
    std::vector<Tri> tris_;
    std::vector<int> free_;
    std::vector<int> cavity_;
    std::vector<BoundaryEdge> boundary_;
    std::vector<std::pair<int, int>> starts_;
    std::vector<std::pair<int, int>> ends_;
    int hint_ = 0;
    WalkRng rng_;
};

} // namespace

Eigen::Vector2d circumcenter(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
{
    const double bx = b.x() - a.x(), by = b.y() - a.y();
    const double cx = c.x() - a.x(), cy = c.y() - a.y();
    const double d = 2.0 * (bx * cy - by * cx);
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    return {a.x() + (cy * b2 - by * c2) / d, a.y() + (bx * c2 - cx * b2) / d};
}

Delaunay2::Delaunay2(std::vector<Eigen::Vector2d> sites) : sites_(std::move(sites))
{
    for (const auto& s : sites_)
        if (!s.allFinite())
            throw ValidationError("delaunay: non-finite site");
    triangulate();
    build_edges();
}

void Delaunay2::triangulate()
{
    const std::size_t n = sites_.size();
    if (n < 3)
        return;

    Eigen::Vector2d lo = sites_[0], hi = sites_[0];
    for (const auto& s : sites_) {
        lo = lo.cwiseMin(s);
        hi = hi.cwiseMax(s);
    }
    const Eigen::Vector2d span = (hi - lo).cwiseMax(Eigen::Vector2d::Constant(1e-300));
    constexpr std::uint32_t kOrder = 1u << 16;
    std::vector<std::pair<std::uint64_t, int>> keyed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d u = (sites_[i] - lo).cwiseQuotient(span);
        const auto qx = static_cast<std::uint32_t>(std::clamp(u.x(), 0.0, 1.0) * (kOrder - 1));
        const auto qy = static_cast<std::uint32_t>(std::clamp(u.y(), 0.0, 1.0) * (kOrder - 1));
        keyed[i] = {hilbert_index(qx, qy, kOrder), static_cast<int>(i)};
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = keyed[i].second;

    // First non-degenerate triple in insertion order.
    const int a = order[0];
    int b = -1;
    std::size_t bpos = 0;
    for (std::size_t k = 1; k < n; ++k) {
        if (sites_[static_cast<std::size_t>(order[k])] != sites_[static_cast<std::size_t>(a)]) {
            b = order[k];
            bpos = k;
            break;
        }
    }
    if (b < 0)
        return;
    std::size_t cpos = 0;
    for (std::size_t k = 1; k < n; ++k) {
        if (k == bpos)
            continue;
        if (orient2d(sites_[static_cast<std::size_t>(a)], sites_[static_cast<std::size_t>(b)],
                     sites_[static_cast<std::size_t>(order[k])])
            != 0) {
            cpos = k;
            break;
        }
    }
    if (cpos == 0)
        return; // all collinear

    Builder builder(sites_);
    builder.init(a, b, order[cpos]);
    for (std::size_t k = 1; k < n; ++k) {
        if (k == bpos || k == cpos)
            continue;
        builder.insert(order[k]);
    }
    triangles_ = builder.real_triangles();
}

void Delaunay2::build_edges()
{
    const std::size_t n = sites_.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();

    auto make_edge = [&](int i, int j) {
        Edge e;
        e.a = std::min(i, j);
        e.b = std::max(i, j);
        const Eigen::Vector2d& pa = sites_[static_cast<std::size_t>(e.a)];
        const Eigen::Vector2d& pb = sites_[static_cast<std::size_t>(e.b)];
        e.mid = 0.5 * (pa + pb);
        const Eigen::Vector2d dir = (pb - pa).normalized();
        e.normal = Eigen::Vector2d(-dir.y(), dir.x());
        e.s_lo = -kInf;
        e.s_hi = kInf;
        return e;
    };

    if (triangles_.empty()) {
        if (n >= 2) {
            std::vector<int> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](int i, int j) {
                const auto& pi = sites_[static_cast<std::size_t>(i)];
                const auto& pj = sites_[static_cast<std::size_t>(j)];
                return pi.x() != pj.x() ? pi.x() < pj.x() : pi.y() < pj.y();
            });
            for (std::size_t k = 1; k < n; ++k)
                edges_.push_back(make_edge(idx[k - 1], idx[k]));
        }
    } else {
        std::unordered_map<std::uint64_t, int> lookup;
        lookup.reserve(triangles_.size() * 2);
        for (const auto& t : triangles_) {
            const Eigen::Vector2d cc = circumcenter(sites_[static_cast<std::size_t>(t[0])],
                                                    sites_[static_cast<std::size_t>(t[1])],
                                                    sites_[static_cast<std::size_t>(t[2])]);
            for (int i = 0; i < 3; ++i) {
                const int u = t[static_cast<std::size_t>(i)];
                const int w = t[static_cast<std::size_t>((i + 1) % 3)];
                const auto key = (static_cast<std::uint64_t>(std::min(u, w)) << 32) | static_cast<std::uint32_t>(std::max(u, w));
                auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(edges_.size()));
                if (inserted)
                    edges_.push_back(make_edge(u, w));
                Edge& e = edges_[static_cast<std::size_t>(it->second)];
                const double s = (cc - e.mid).dot(e.normal);
                // The triangle lies to the left of u->w.
                if (u == e.a)
                    e.s_hi = s;
                else
                    e.s_lo = s;
            }
        }
        for (auto& e : edges_) {
            if (e.s_lo > e.s_hi) {
                const double m = 0.5 * (e.s_lo + e.s_hi);
                e.s_lo = e.s_hi = m;
            }
        }
    }

    std::vector<int> count(n + 1, 0);
    for (const auto& e : edges_) {
        ++count[static_cast<std::size_t>(e.a) + 1];
        ++count[static_cast<std::size_t>(e.b) + 1];
    }
    incidence_offset_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i)
        incidence_offset_[i + 1] = incidence_offset_[i] + count[i + 1];
    incidence_.assign(static_cast<std::size_t>(incidence_offset_[n]), 0);
    std::vector<int> fill(incidence_offset_.begin(), incidence_offset_.end() - 1);
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        const auto& e = edges_[k];
        incidence_[static_cast<std::size_t>(fill[static_cast<std::size_t>(e.a)]++)] = static_cast<int>(k);
        incidence_[static_cast<std::size_t>(fill[static_cast<std::size_t>(e.b)]++)] = static_cast<int>(k);
    }
}

} // namespace levelhull
