#include "steklov/mesh.hpp"

#include "steklov/errors.hpp"
#include "steklov/predicates.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace steklov {
namespace {

std::uint64_t edge_key(Index a, Index b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Two-point Gauss-Legendre abscissae on [0, 1].
constexpr std::array<double, 2> kGauss2{0.5 - 0.28867513459481287, 0.5 + 0.28867513459481287};

} // namespace

double Mesh::area() const {
    double total = 0.0;
    for (const auto& g : geometry) total += g.area;
    return total;
}

std::size_t edge_count(const Mesh& mesh) {
    std::unordered_map<std::uint64_t, int> edges;
    edges.reserve(3 * mesh.triangles.size());
    for (const auto& t : mesh.triangles)
        for (int i = 0; i < 3; ++i) edges[edge_key(t[i], t[(i + 1) % 3])] = 1;
    return edges.size();
}

Mesh make_mesh(std::vector<Point> vertices, std::vector<std::array<Index, 3>> triangles,
               std::vector<BoundarySegment> boundary, std::optional<DomainSpec> domain) {
    Mesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.triangles = std::move(triangles);
    mesh.domain = std::move(domain);
    const auto nv = static_cast<Index>(mesh.vertices.size());

    mesh.geometry.reserve(mesh.triangles.size());
    std::unordered_map<std::uint64_t, int> edge_uses;
    edge_uses.reserve(3 * mesh.triangles.size());
    mesh.h_max = 0.0;
    mesh.h_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        const auto& t = mesh.triangles[k];
        for (Index v : t)
            if (v < 0 || v >= nv) throw MeshError(fmt::format("triangle {} has an invalid vertex", k));
        const Point p0 = mesh.vertices[t[0]], p1 = mesh.vertices[t[1]], p2 = mesh.vertices[t[2]];
        if (predicates::orient2d(p0, p1, p2) <= 0.0)
            throw MeshError(fmt::format("triangle {} has non-positive area", k));
        const double twice = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
        TriangleGeometry g;
        g.area = 0.5 * twice;
        g.grad[0] = {(p1.y - p2.y) / twice, (p2.x - p1.x) / twice};
        g.grad[1] = {(p2.y - p0.y) / twice, (p0.x - p2.x) / twice};
        g.grad[2] = {(p0.y - p1.y) / twice, (p1.x - p0.x) / twice};
        mesh.geometry.push_back(g);
        for (int i = 0; i < 3; ++i) {
            const Index a = t[i], b = t[(i + 1) % 3];
            const int uses = ++edge_uses[edge_key(a, b)];
            if (uses == 1) {
                const double len = distance(mesh.vertices[a], mesh.vertices[b]);
                mesh.h_max = std::max(mesh.h_max, len);
                mesh.h_min = std::min(mesh.h_min, len);
            }
        }
    }

    std::size_t open_edges = 0;
    for (const auto& [key, uses] : edge_uses) {
        if (uses > 2) throw MeshError("an edge is shared by more than two triangles");
        if (uses == 1) ++open_edges;
    }
    if (open_edges != boundary.size())
        throw MeshError(fmt::format("{} open triangle edges but {} boundary edges", open_edges,
                                    boundary.size()));

    mesh.is_boundary_vertex.assign(mesh.vertices.size(), 0);
    std::vector<int> out_degree(mesh.vertices.size(), 0), in_degree(mesh.vertices.size(), 0);
    mesh.boundary_edges.reserve(boundary.size());
    for (const auto& seg : boundary) {
        auto it = edge_uses.find(edge_key(seg.a, seg.b));
        if (it == edge_uses.end() || it->second != 1)
            throw MeshError(fmt::format("boundary edge ({}, {}) is not an open triangle edge", seg.a, seg.b));
        const Point a = mesh.vertices[seg.a], b = mesh.vertices[seg.b];
        BoundaryEdge e;
        e.v = {seg.a, seg.b};
        e.tag = seg.tag;
        e.length = distance(a, b);
        e.normal = {(b.y - a.y) / e.length, -(b.x - a.x) / e.length};
        for (int q = 0; q < 2; ++q) {
            const Point x = (1.0 - kGauss2[q]) * a + kGauss2[q] * b;
            e.weight_samples[q] = mesh.domain ? weight_on_arc(*mesh.domain, seg.tag, x) : 1.0;
        }
        mesh.boundary_edges.push_back(e);
        mesh.is_boundary_vertex[seg.a] = mesh.is_boundary_vertex[seg.b] = 1;
        ++out_degree[seg.a];
        ++in_degree[seg.b];
    }
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (out_degree[v] != in_degree[v] || out_degree[v] > 1)
            throw MeshError(fmt::format("boundary is not a simple closed curve at vertex {}", v));
    return mesh;
}

Mesh refine_uniform(const Mesh& mesh) {
    std::vector<Point> vertices = mesh.vertices;
    std::unordered_map<std::uint64_t, Index> midpoint;
    midpoint.reserve(3 * mesh.triangles.size());
    std::unordered_map<std::uint64_t, ArcTag> boundary_tag;
    for (const auto& e : mesh.boundary_edges) boundary_tag[edge_key(e.v[0], e.v[1])] = e.tag;

    struct Projection {
        Index vertex;
        Point chord;
        Point curve;
        double fraction = 1.0;
    };
    std::vector<Projection> projections;
    std::unordered_map<Index, std::size_t> projection_of;

    auto mid = [&](Index a, Index b) {
        const auto key = edge_key(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const Point m = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
        vertices.push_back(m);
        const auto id = static_cast<Index>(vertices.size() - 1);
        midpoint.emplace(key, id);
        auto bt = boundary_tag.find(key);
        if (bt != boundary_tag.end() && mesh.domain) {
            const Point q = project_to_arc(*mesh.domain, bt->second, m);
            vertices[id] = q;
            projection_of[id] = projections.size();
            projections.push_back({id, m, q});
        }
        return id;
    };

    std::vector<std::array<Index, 3>> triangles;
    triangles.reserve(4 * mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        const Index a = t[0], b = t[1], c = t[2];
        const Index ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        triangles.push_back({a, ab, ca});
        triangles.push_back({ab, b, bc});
        triangles.push_back({ca, bc, c});
        triangles.push_back({ab, bc, ca});
    }

    // Where the exact curve bends past a child triangle (thin cusp cells with
    // steep height ratios), pull the midpoint back toward its chord.
    for (int pass = 0; pass < 64; ++pass) {
        bool folded = false;
        for (const auto& t : triangles) {
            if (predicates::orient2d(vertices[t[0]], vertices[t[1]], vertices[t[2]]) > 0.0) continue;
            for (Index v : t) {
                auto it = projection_of.find(v);
                if (it == projection_of.end()) continue;
                Projection& pr = projections[it->second];
                pr.fraction = pr.fraction < 1.0 / 1024.0 ? 0.0 : 0.5 * pr.fraction;
                vertices[v] = pr.chord + pr.fraction * (pr.curve - pr.chord);
                folded = true;
            }
        }
        if (!folded) break;
    }

    std::vector<BoundarySegment> boundary;
    boundary.reserve(2 * mesh.boundary_edges.size());
    for (const auto& e : mesh.boundary_edges) {
        const Index m = midpoint.at(edge_key(e.v[0], e.v[1]));
        boundary.push_back({e.v[0], m, e.tag});
        boundary.push_back({m, e.v[1], e.tag});
    }
    Mesh fine = make_mesh(std::move(vertices), std::move(triangles), std::move(boundary), mesh.domain);
    fine.id = mesh.id + "+r";
    return fine;
}

namespace {

std::string mesh_id(const DomainSpec& spec, const MeshParams& params) {
    if (spec.kind == DomainKind::DiskValidation)
        return fmt::format("disk-r{}-n{}-h{}", spec.disk_radius, params.n_arc, params.target_h);
    return fmt::format("cusp-a{}-n{}x{}-q{}-h{}-g{}", spec.alpha, params.n_lateral, params.n_arc,
                       params.grading_q, params.target_h, params.tip_grading);
}

} // namespace

Mesh build_mesh(const DomainSpec& spec, const MeshParams& params) {
    const BoundaryPolygon polygon =
        boundary_polygon(spec, params.n_lateral, params.n_arc, params.grading_q);
    Mesh raw = triangulate(polygon, TriangulationOptions{params.target_h, params.tip_grading});

    std::vector<Point> vertices = raw.vertices;
    std::vector<std::vector<std::size_t>> incident(vertices.size());
    for (std::size_t k = 0; k < raw.triangles.size(); ++k)
        for (Index v : raw.triangles[k]) incident[v].push_back(k);

    // Vertices added on polygon chords by refinement move onto the curve
    // unless that would fold a triangle.
    const std::size_t original = polygon.vertices.size();
    std::vector<BoundarySegment> boundary;
    for (const auto& e : raw.boundary_edges) {
        boundary.push_back({e.v[0], e.v[1], e.tag});
        for (Index v : e.v) {
            if (static_cast<std::size_t>(v) < original) continue;
            const Point old = vertices[v];
            vertices[v] = project_to_arc(spec, e.tag, old);
            bool ok = true;
            for (std::size_t k : incident[v]) {
                const auto& t = raw.triangles[k];
                if (predicates::orient2d(vertices[t[0]], vertices[t[1]], vertices[t[2]]) <= 0.0) ok = false;
            }
            if (!ok) vertices[v] = old;
        }
    }
    Mesh mesh = make_mesh(std::move(vertices), raw.triangles, std::move(boundary), spec);
    mesh.id = mesh_id(spec, params);
    return mesh;
}

Mesh build_refined_mesh(const DomainSpec& spec, const MeshParams& params, int levels) {
    Mesh mesh = build_mesh(spec, params);
    for (int l = 0; l < levels; ++l) mesh = refine_uniform(mesh);
    return mesh;
}

} // namespace steklov
