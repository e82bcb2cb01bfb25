#include "steklov/errors.hpp"
#include "steklov/mesh.hpp"
#include "steklov/predicates.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_map>
#include <utility>

namespace steklov {
namespace {

using predicates::incircle;
using predicates::orient2d;

constexpr int kNone = -1;

struct Tri {
    std::array<int, 3> v{};
    std::array<int, 3> n{kNone, kNone, kNone};  // n[i] is across the edge opposite v[i]
    std::array<bool, 3> c{false, false, false}; // constrained edge flags
    bool dead = false;
};

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

Point circumcenter(Point a, Point b, Point c) {
    const double bx = b.x - a.x, by = b.y - a.y;
    const double cx = c.x - a.x, cy = c.y - a.y;
    const double d = 2.0 * (bx * cy - by * cx);
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    return {a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
}

// Incremental constrained Delaunay triangulation. Vertices 0..2 form the
// enclosing super-triangle until the exterior is carved away.
class Cdt {
public:
    Cdt(const BoundaryPolygon& polygon, const TriangulationOptions& options)
        : polygon_(polygon), options_(options) {}

    Mesh run();

private:
    const BoundaryPolygon& polygon_;
    TriangulationOptions options_;

    std::vector<Point> pts_;
    std::vector<Tri> tris_;
    std::vector<int> vtri_;
    std::unordered_map<std::uint64_t, int> owner_;  // constrained edge -> polygon edge
    std::vector<int> mark_;
    int stamp_ = 0;
    std::vector<int> created_;
    std::mt19937 rng_{12345u};

    std::optional<Point> tip_;
    double tip_radius_ = 0.0;
    double floor_length_ = 0.0;
    double sin_bound_ = 0.0;

    int add_tri(int a, int b, int c) {
        Tri t;
        t.v = {a, b, c};
        tris_.push_back(t);
        const int id = static_cast<int>(tris_.size()) - 1;
        vtri_[a] = vtri_[b] = vtri_[c] = id;
        return id;
    }

    static int slot_of(const Tri& t, int a, int b) {
        for (int i = 0; i < 3; ++i) {
            const int x = t.v[(i + 1) % 3];
            const int y = t.v[(i + 2) % 3];
            if ((x == a && y == b) || (x == b && y == a)) return i;
        }
        return kNone;
    }

    static int index_of(const Tri& t, int v) {
        for (int i = 0; i < 3; ++i)
            if (t.v[i] == v) return i;
        return kNone;
    }

    void replace_neighbor(int nb, int old_tri, int new_tri) {
        if (nb == kNone) return;
        for (int k = 0; k < 3; ++k)
            if (tris_[nb].n[k] == old_tri) tris_[nb].n[k] = new_tri;
    }

    double orient(int a, int b, int c) const { return orient2d(pts_[a], pts_[b], pts_[c]); }

    std::vector<int> star(int a) const;
    std::pair<int, int> find_edge(int a, int b) const;

    int locate(Point p, int start, int& on_slot);
    struct Walk {
        int tri;
        int slot;
        bool blocked;
    };
    Walk walk_to(int start, Point origin, Point p) const;

    std::vector<int> cavity(int t0, int on_slot, Point p);
    int insert_point(Point p, int t0, int on_slot, bool split = false);

    void flip(int t, int i);
    void legalize(std::vector<std::pair<int, int>> edges);
    void recover_segment(int a, int b, int polygon_edge);
    void carve_exterior();

    bool in_tip_zone(Point p) const {
        return tip_ && distance(p, *tip_) < tip_radius_;
    }
    double size_at(Point p) const;
    bool segment_splittable(int a, int b) const;
    bool encroached(int t, int slot) const;
    bool exempt(int t) const;
    bool bad(int t) const;
    void split_segment(int t, int slot);
    void refine();

    Mesh compact() const;
};

std::vector<int> Cdt::star(int a) const {
    std::vector<int> out;
    const int t0 = vtri_[a];
    int t = t0;
    bool open = false;
    do {
        out.push_back(t);
        const int k = index_of(tris_[t], a);
        const int next = tris_[t].n[(k + 1) % 3];
        if (next == kNone) {
            open = true;
            break;
        }
        t = next;
    } while (t != t0);
    if (open) {
        const int k0 = index_of(tris_[t0], a);
        t = tris_[t0].n[(k0 + 2) % 3];
        while (t != kNone) {
            out.push_back(t);
            const int k = index_of(tris_[t], a);
            t = tris_[t].n[(k + 2) % 3];
        }
    }
    return out;
}

std::pair<int, int> Cdt::find_edge(int a, int b) const {
    for (int t : star(a)) {
        const int s = slot_of(tris_[t], a, b);
        if (s != kNone) return {t, s};
    }
    return {kNone, kNone};
}

int Cdt::locate(Point p, int start, int& on_slot) {
    int t = start;
    const std::size_t limit = 8 * tris_.size() + 64;
    for (std::size_t step = 0; step < limit; ++step) {
        const Tri& tri = tris_[t];
        const int r = static_cast<int>(rng_() % 3);
        bool moved = false;
        on_slot = kNone;
        for (int k = 0; k < 3; ++k) {
            const int i = (r + k) % 3;
            const double o = orient2d(pts_[tri.v[(i + 1) % 3]], pts_[tri.v[(i + 2) % 3]], p);
            if (o < 0.0) {
                if (tri.n[i] == kNone) throw MeshError("point lies outside the triangulation");
                t = tri.n[i];
                moved = true;
                break;
            }
            if (o == 0.0) on_slot = i;
        }
        if (!moved) return t;
    }
    throw MeshError("point location did not terminate");
}

Cdt::Walk Cdt::walk_to(int start, Point origin, Point p) const {
    int t = start;
    int from = kNone;
    const std::size_t limit = 4 * tris_.size() + 64;
    for (std::size_t step = 0; step < limit; ++step) {
        const Tri& tri = tris_[t];
        int exit = kNone;
        int fallback = kNone;
        for (int i = 0; i < 3; ++i) {
            const Point a = pts_[tri.v[(i + 1) % 3]];
            const Point b = pts_[tri.v[(i + 2) % 3]];
            if (orient2d(a, b, p) >= 0.0) continue;
            if (tri.n[i] == from && from != kNone) continue;
            if (fallback == kNone) fallback = i;
            if (orient2d(origin, p, a) <= 0.0 && orient2d(origin, p, b) >= 0.0) {
                exit = i;
                break;
            }
        }
        if (exit == kNone) exit = fallback;
        if (exit == kNone) {
            int on = kNone;
            for (int i = 0; i < 3; ++i)
                if (orient2d(pts_[tri.v[(i + 1) % 3]], pts_[tri.v[(i + 2) % 3]], p) == 0.0) on = i;
            return {t, on, false};
        }
        if (tri.c[exit] || tri.n[exit] == kNone) return {t, exit, true};
        from = t;
        t = tri.n[exit];
    }
    throw MeshError("straight-line walk did not terminate");
}

std::vector<int> Cdt::cavity(int t0, int on_slot, Point p) {
    if (mark_.size() < tris_.size()) mark_.resize(tris_.size() + tris_.size() / 2 + 16, 0);
    ++stamp_;
    std::vector<int> cav{t0};
    mark_[t0] = stamp_;
    for (std::size_t k = 0; k < cav.size(); ++k) {
        const int t = cav[k];
        for (int i = 0; i < 3; ++i) {
            const int u = tris_[t].n[i];
            if (u == kNone || tris_[t].c[i] || mark_[u] == stamp_) continue;
            const Tri& tu = tris_[u];
            const bool forced = (t == t0 && i == on_slot);
            if (forced || incircle(pts_[tu.v[0]], pts_[tu.v[1]], pts_[tu.v[2]], p) > 0.0) {
                mark_[u] = stamp_;
                cav.push_back(u);
            }
        }
    }
    return cav;
}

int Cdt::insert_point(Point p, int t0, int on_slot, bool split) {
    const std::vector<int> cav = cavity(t0, on_slot, p);
    const int split_tri_a = split ? tris_[t0].v[(on_slot + 1) % 3] : kNone;
    const int split_tri_b = split ? tris_[t0].v[(on_slot + 2) % 3] : kNone;
    const int v = static_cast<int>(pts_.size());
    pts_.push_back(p);
    vtri_.push_back(kNone);

    struct Rim {
        int a, b, outside;
        bool constrained;
    };
    std::vector<Rim> rim;
    int split_a = kNone, split_b = kNone;
    for (int t : cav) {
        const Tri& tri = tris_[t];
        for (int i = 0; i < 3; ++i) {
            const int u = tri.n[i];
            if (u != kNone && mark_[u] == stamp_) continue;
            const int a = tri.v[(i + 1) % 3];
            const int b = tri.v[(i + 2) % 3];
            if (split && a == split_tri_a && b == split_tri_b) {
                split_a = a;
                split_b = b;
                continue;
            }
            if (orient(a, b, v) <= 0.0) throw MeshError("insertion cavity is not star-shaped");
            rim.push_back({a, b, u, tri.c[i]});
        }
    }
    for (int t : cav) tris_[t].dead = true;

    created_.clear();
    std::unordered_map<int, std::pair<int, int>> from_v;  // edge v -> a
    std::unordered_map<int, std::pair<int, int>> to_v;    // edge b -> v
    for (const Rim& r : rim) {
        const int t = add_tri(r.a, r.b, v);
        tris_[t].n[2] = r.outside;
        tris_[t].c[2] = r.constrained;
        if (r.outside != kNone) {
            const int s = slot_of(tris_[r.outside], r.a, r.b);
            tris_[r.outside].n[s] = t;
        }
        from_v[r.a] = {t, 1};
        to_v[r.b] = {t, 0};
        created_.push_back(t);
    }
    for (const auto& [b, slot] : to_v) {
        auto it = from_v.find(b);
        if (it == from_v.end()) continue;
        tris_[slot.first].n[slot.second] = it->second.first;
        tris_[it->second.first].n[it->second.second] = slot.first;
    }
    if (split_a != kNone) {
        const int owner = owner_.at(edge_key(split_a, split_b));
        owner_.erase(edge_key(split_a, split_b));
        for (int t : created_) {
            for (int i : {0, 1}) {
                if (tris_[t].n[i] != kNone) continue;
                tris_[t].c[i] = true;
                const int x = tris_[t].v[(i + 1) % 3];
                const int y = tris_[t].v[(i + 2) % 3];
                owner_[edge_key(x, y)] = owner;
            }
        }
    }
    return v;
}

void Cdt::flip(int t, int i) {
    const Tri tt = tris_[t];
    const int a = tt.v[i], b = tt.v[(i + 1) % 3], c = tt.v[(i + 2) % 3];
    const int u = tt.n[i];
    const Tri tu = tris_[u];
    const int j = slot_of(tu, b, c);
    const int d = tu.v[j];
    const int n_ab = tt.n[(i + 2) % 3];
    const bool c_ab = tt.c[(i + 2) % 3];
    const int n_ca = tt.n[(i + 1) % 3];
    const bool c_ca = tt.c[(i + 1) % 3];
    const int ic = index_of(tu, c);
    const int ib = index_of(tu, b);
    const int n_bd = tu.n[ic];
    const bool c_bd = tu.c[ic];
    const int n_dc = tu.n[ib];
    const bool c_dc = tu.c[ib];

    Tri& nt = tris_[t];
    nt.v = {a, b, d};
    nt.n = {n_bd, u, n_ab};
    nt.c = {c_bd, false, c_ab};
    Tri& nu = tris_[u];
    nu.v = {a, d, c};
    nu.n = {n_dc, n_ca, t};
    nu.c = {c_dc, c_ca, false};
    replace_neighbor(n_bd, u, t);
    replace_neighbor(n_ca, t, u);
    vtri_[a] = t;
    vtri_[b] = t;
    vtri_[d] = t;
    vtri_[c] = u;
}

void Cdt::legalize(std::vector<std::pair<int, int>> edges) {
    while (!edges.empty()) {
        const auto [x, y] = edges.back();
        edges.pop_back();
        const auto [t, i] = find_edge(x, y);
        if (t == kNone) continue;
        const Tri& tri = tris_[t];
        if (tri.c[i] || tri.n[i] == kNone) continue;
        const Tri& other = tris_[tri.n[i]];
        const int d = other.v[slot_of(other, x, y)];
        if (incircle(pts_[tri.v[0]], pts_[tri.v[1]], pts_[tri.v[2]], pts_[d]) <= 0.0) continue;
        const int a = tri.v[i];
        flip(t, i);
        edges.push_back({a, x});
        edges.push_back({a, y});
        edges.push_back({d, x});
        edges.push_back({d, y});
    }
}

void Cdt::recover_segment(int a, int b, int polygon_edge) {
    auto mark_constrained = [&] {
        const auto [t, i] = find_edge(a, b);
        tris_[t].c[i] = true;
        const int u = tris_[t].n[i];
        if (u != kNone) tris_[u].c[slot_of(tris_[u], a, b)] = true;
        owner_[edge_key(a, b)] = polygon_edge;
    };
    if (find_edge(a, b).first != kNone) {
        mark_constrained();
        return;
    }

    auto crosses = [&](int x, int y) {
        if (x == a || x == b || y == a || y == b) return false;
        return orient(a, b, x) * orient(a, b, y) < 0.0 && orient(x, y, a) * orient(x, y, b) < 0.0;
    };

    // Edges crossed by the segment, found by walking from a toward b.
    std::deque<std::pair<int, int>> crossing;
    int t = kNone;
    int x = kNone, y = kNone;
    for (int s : star(a)) {
        const Tri& tri = tris_[s];
        const int k = index_of(tri, a);
        const int p = tri.v[(k + 1) % 3];
        const int q = tri.v[(k + 2) % 3];
        const double op = orient(a, p, b);
        const double oq = orient(a, q, b);
        for (int w : {p, q}) {
            if (orient(a, w, b) == 0.0 && dot(pts_[w] - pts_[a], pts_[b] - pts_[a]) > 0.0)
                throw GeometryError(fmt::format("polygon vertex lies on polygon edge {}", polygon_edge));
        }
        if (op > 0.0 && oq < 0.0) {
            t = s;
            x = p;
            y = q;
            break;
        }
    }
    if (t == kNone) throw MeshError(fmt::format("cannot recover polygon edge {}", polygon_edge));
    while (true) {
        crossing.push_back({x, y});
        const int u = tris_[t].n[slot_of(tris_[t], x, y)];
        const Tri& tu = tris_[u];
        const int z = tu.v[slot_of(tu, x, y)];
        if (z == b) break;
        const double oz = orient(a, b, z);
        if (oz == 0.0) throw GeometryError(fmt::format("polygon vertex lies on polygon edge {}", polygon_edge));
        if (oz > 0.0) {
            y = z;
        } else {
            x = z;
        }
        t = u;
    }

    std::vector<std::pair<int, int>> fresh;
    std::size_t stalled = 0;
    while (!crossing.empty()) {
        const auto [p, q] = crossing.front();
        crossing.pop_front();
        const auto [s, i] = find_edge(p, q);
        const int r = tris_[s].v[i];
        const int u = tris_[s].n[i];
        const int w = tris_[u].v[slot_of(tris_[u], p, q)];
        const bool convex = orient(r, w, p) * orient(r, w, q) < 0.0 && orient(p, q, r) * orient(p, q, w) < 0.0;
        if (!convex) {
            crossing.push_back({p, q});
            if (++stalled > 4 * crossing.size() + 16)
                throw MeshError(fmt::format("edge flips cannot recover polygon edge {}", polygon_edge));
            continue;
        }
        stalled = 0;
        flip(s, i);
        if (crosses(r, w)) {
            crossing.push_back({r, w});
        } else {
            fresh.push_back({r, w});
        }
    }
    mark_constrained();
    legalize(std::move(fresh));
}

void Cdt::carve_exterior() {
    std::vector<char> exterior(tris_.size(), 0);
    std::vector<int> stack;
    for (int s = 0; s < 3; ++s)
        for (int t : star(s))
            if (!exterior[t]) {
                exterior[t] = 1;
                stack.push_back(t);
            }
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        for (int i = 0; i < 3; ++i) {
            const int u = tris_[t].n[i];
            if (u == kNone || tris_[t].c[i] || exterior[u]) continue;
            exterior[u] = 1;
            stack.push_back(u);
        }
    }
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (tris_[t].dead) continue;
        if (exterior[t]) {
            tris_[t].dead = true;
            continue;
        }
        for (int i = 0; i < 3; ++i) {
            const int u = tris_[t].n[i];
            if (u != kNone && exterior[u]) {
                if (!tris_[t].c[i]) throw MeshError("interior region leaks through an unconstrained edge");
                tris_[t].n[i] = kNone;
            }
        }
        for (int v : tris_[t].v) vtri_[v] = static_cast<int>(t);
    }
}

double Cdt::size_at(Point p) const {
    double h = options_.target_h;
    if (tip_ && options_.tip_grading > 1.0)
        h *= std::min(1.0, std::pow(distance(p, *tip_), options_.tip_grading - 1.0));
    return std::max(h, floor_length_);
}

bool Cdt::segment_splittable(int a, int b) const {
    const Point mid = 0.5 * (pts_[a] + pts_[b]);
    return !in_tip_zone(mid) && distance(pts_[a], pts_[b]) > 2.0 * floor_length_;
}

bool Cdt::encroached(int t, int slot) const {
    const Tri& tri = tris_[t];
    const Point apex = pts_[tri.v[slot]];
    return dot(pts_[tri.v[(slot + 1) % 3]] - apex, pts_[tri.v[(slot + 2) % 3]] - apex) < 0.0;
}

bool Cdt::exempt(int t) const {
    const Tri& tri = tris_[t];
    double shortest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        if (in_tip_zone(pts_[tri.v[i]])) return true;
        shortest = std::min(shortest, distance(pts_[tri.v[(i + 1) % 3]], pts_[tri.v[(i + 2) % 3]]));
    }
    return shortest < floor_length_;
}

bool Cdt::bad(int t) const {
    const Tri& tri = tris_[t];
    const Point a = pts_[tri.v[0]], b = pts_[tri.v[1]], c = pts_[tri.v[2]];
    const double la = distance(b, c), lb = distance(c, a), lc = distance(a, b);
    const double shortest = std::min({la, lb, lc});
    const double longest = std::max({la, lb, lc});
    const double area = 0.5 * orient2d(a, b, c);
    // sin of the smallest angle = 2 * area / (product of the two adjacent edges)
    const double sin_min = 2.0 * area / (longest * (la + lb + lc - shortest - longest));
    if (sin_min < sin_bound_) return true;
    const Point centroid = (1.0 / 3.0) * (a + b + c);
    return longest > size_at(centroid);
}

void Cdt::split_segment(int t, int slot) {
    const Tri& tri = tris_[t];
    const Point mid = 0.5 * (pts_[tri.v[(slot + 1) % 3]] + pts_[tri.v[(slot + 2) % 3]]);
    insert_point(mid, t, slot, true);
}

void Cdt::refine() {
    std::deque<std::pair<int, int>> segments;
    std::deque<int> queue;
    std::vector<char> skipped;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (tris_[t].dead) continue;
        queue.push_back(static_cast<int>(t));
        for (int i = 0; i < 3; ++i)
            if (tris_[t].n[i] == kNone)
                segments.push_back({tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3]});
    }

    auto after_insert = [&] {
        for (int t : created_) {
            queue.push_back(t);
            for (int i = 0; i < 3; ++i)
                if (tris_[t].n[i] == kNone)
                    segments.push_back({tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3]});
        }
        if (pts_.size() > options_.vertex_budget + 3)
            throw MeshError(fmt::format("refinement exceeded the vertex budget of {}",
                                        options_.vertex_budget));
    };

    while (true) {
        while (!segments.empty()) {
            const auto [a, b] = segments.front();
            segments.pop_front();
            const auto [t, slot] = find_edge(a, b);
            if (t == kNone || tris_[t].n[slot] != kNone) continue;
            if (!encroached(t, slot) || !segment_splittable(a, b)) continue;
            split_segment(t, slot);
            after_insert();
        }
        if (queue.empty()) break;
        const int t = queue.front();
        queue.pop_front();
        if (tris_[t].dead || (static_cast<std::size_t>(t) < skipped.size() && skipped[t])) continue;
        if (exempt(t) || !bad(t)) continue;

        auto skip = [&](int id) {
            if (skipped.size() <= static_cast<std::size_t>(id)) skipped.resize(tris_.size(), 0);
            skipped[id] = 1;
        };

        const Tri& tri = tris_[t];
        const Point a = pts_[tri.v[0]], b = pts_[tri.v[1]], c = pts_[tri.v[2]];
        const Point cc = circumcenter(a, b, c);
        const Point origin = (1.0 / 3.0) * (a + b + c);
        const Walk walk = walk_to(t, origin, cc);
        if (walk.blocked) {
            const Tri& bt = tris_[walk.tri];
            const int x = bt.v[(walk.slot + 1) % 3];
            const int y = bt.v[(walk.slot + 2) % 3];
            if (bt.n[walk.slot] == kNone && segment_splittable(x, y)) {
                split_segment(walk.tri, walk.slot);
                after_insert();
                queue.push_back(t);
            } else {
                skip(t);
            }
            continue;
        }

        const std::vector<int> cav = cavity(walk.tri, walk.slot, cc);
        std::vector<std::pair<int, int>> hit;
        bool blocked = false;
        for (int s : cav) {
            const Tri& ts = tris_[s];
            for (int i = 0; i < 3; ++i) {
                if (ts.n[i] != kNone) continue;
                const int x = ts.v[(i + 1) % 3];
                const int y = ts.v[(i + 2) % 3];
                if (dot(pts_[x] - cc, pts_[y] - cc) < 0.0) {
                    if (segment_splittable(x, y)) {
                        hit.push_back({x, y});
                    } else {
                        blocked = true;
                    }
                }
            }
        }
        if (!hit.empty()) {
            for (const auto& [x, y] : hit) {
                const auto [st, ss] = find_edge(x, y);
                if (st == kNone) continue;
                split_segment(st, ss);
                after_insert();
            }
            queue.push_back(t);
            continue;
        }
        if (blocked) {
            skip(t);
            continue;
        }
        insert_point(cc, walk.tri, walk.slot);
        after_insert();
    }
}

Mesh Cdt::compact() const {
    std::vector<Point> vertices(pts_.begin() + 3, pts_.end());
    std::vector<std::array<Index, 3>> triangles;
    std::vector<BoundarySegment> boundary;
    for (const Tri& t : tris_) {
        if (t.dead) continue;
        triangles.push_back({t.v[0] - 3, t.v[1] - 3, t.v[2] - 3});
        for (int i = 0; i < 3; ++i) {
            if (t.n[i] != kNone) continue;
            const int a = t.v[(i + 1) % 3];
            const int b = t.v[(i + 2) % 3];
            const int owner = owner_.at(edge_key(a, b));
            boundary.push_back({a - 3, b - 3, polygon_.edge_tags[owner]});
        }
    }
    return make_mesh(std::move(vertices), std::move(triangles), std::move(boundary), std::nullopt);
}

Mesh Cdt::run() {
    check_simple(polygon_);
    if (!(options_.target_h > 0.0))
        throw MeshError(fmt::format("target_h must be positive, got {}", options_.target_h));

    const auto& poly = polygon_.vertices;
    double xmin = poly[0].x, xmax = poly[0].x, ymin = poly[0].y, ymax = poly[0].y;
    for (const Point& p : poly) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double extent = std::max(xmax - xmin, ymax - ymin);
    const Point center{0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};
    floor_length_ = 1e-7 * extent;
    sin_bound_ = std::sin(options_.min_angle_deg * std::numbers::pi / 180.0);
    if (polygon_.tip) {
        tip_ = poly[*polygon_.tip];
        tip_radius_ = polygon_.tip_radius;
    }

    pts_ = {center + Point{-30.0 * extent, -30.0 * extent}, center + Point{30.0 * extent, -30.0 * extent},
            center + Point{0.0, 30.0 * extent}};
    vtri_.assign(3, kNone);
    add_tri(0, 1, 2);

    int last = 0;
    for (const Point& p : poly) {
        int on_slot = kNone;
        const int t = locate(p, last, on_slot);
        for (int v : tris_[t].v)
            if (pts_[v] == p) throw GeometryError("duplicate polygon vertex");
        insert_point(p, t, on_slot);
        last = created_.front();
    }

    const int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) recover_segment(i + 3, (i + 1) % n + 3, i);

    std::vector<std::pair<int, int>> all;
    for (const Tri& t : tris_) {
        if (t.dead) continue;
        for (int i = 0; i < 3; ++i)
            if (!t.c[i]) all.push_back({t.v[(i + 1) % 3], t.v[(i + 2) % 3]});
    }
    legalize(std::move(all));
    carve_exterior();
    refine();
    return compact();
}

} // namespace

Mesh triangulate(const BoundaryPolygon& polygon, const TriangulationOptions& options) {
    Cdt cdt(polygon, options);
    return cdt.run();
}

} // namespace steklov
