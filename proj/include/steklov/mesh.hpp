#pragma once

#include "steklov/geometry.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace steklov {

using Index = int;

struct BoundaryEdge {
    std::array<Index, 2> v;  // interior lies to the left of v[0] -> v[1]
    ArcTag tag;
    Point normal;            // outward unit normal
    double length;
    std::array<double, 2> weight_samples;  // weight at the two Gauss points
};

/// Area and barycentric gradients of one P1 triangle.
struct TriangleGeometry {
    double area;
    std::array<Point, 3> grad;
};

/// Conforming triangulation with tagged boundary edges. Built once, then
/// shared read-only.
struct Mesh {
    std::vector<Point> vertices;
    std::vector<std::array<Index, 3>> triangles;  // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    std::optional<DomainSpec> domain;             // absent for plain polygons
    std::vector<TriangleGeometry> geometry;
    std::vector<char> is_boundary_vertex;
    double h_max = 0.0;
    double h_min = 0.0;
    std::string id;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t triangle_count() const { return triangles.size(); }
    double area() const;
};

struct BoundarySegment {
    Index a;
    Index b;
    ArcTag tag;
};

/// Assembles derived data (geometry, normals, weights, edge statistics) and
/// checks the mesh invariants. Throws MeshError on an inverted triangle or a
/// boundary that does not close up.
Mesh make_mesh(std::vector<Point> vertices, std::vector<std::array<Index, 3>> triangles,
               std::vector<BoundarySegment> boundary, std::optional<DomainSpec> domain);

struct TriangulationOptions {
    double target_h = 0.25;
    double tip_grading = 2.0;
    double min_angle_deg = 20.0;
    std::size_t vertex_budget = 400000;
};

/// Constrained Delaunay triangulation of the polygon interior with
/// Ruppert refinement. Inserted boundary vertices stay on the polygon edges.
Mesh triangulate(const BoundaryPolygon& polygon, const TriangulationOptions& options);

inline Mesh triangulate(const BoundaryPolygon& polygon, double target_h, double tip_grading) {
    return triangulate(polygon, TriangulationOptions{target_h, tip_grading});
}

/// Splits every triangle into four. New boundary midpoints are projected
/// onto the exact arc of their edge.
Mesh refine_uniform(const Mesh& mesh);

struct MeshParams {
    std::size_t n_lateral = 16;
    std::size_t n_arc = 32;
    double grading_q = 2.0;
    double target_h = 0.25;
    double tip_grading = 2.0;
};

/// Boundary polygon, triangulation, and snapping of the boundary vertices
/// created by refinement onto the exact curves.
Mesh build_mesh(const DomainSpec& spec, const MeshParams& params);

/// Convenience: build_mesh followed by `levels` uniform refinements.
Mesh build_refined_mesh(const DomainSpec& spec, const MeshParams& params, int levels);

/// Number of distinct edges.
std::size_t edge_count(const Mesh& mesh);

} // namespace steklov
