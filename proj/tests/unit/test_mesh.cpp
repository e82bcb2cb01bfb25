#include "oracles.hpp"

#include "steklov/errors.hpp"
#include "steklov/fem.hpp"
#include "steklov/mesh.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <cmath>
#include <numbers>

using namespace steklov;

namespace {

double min_angle_deg(const Mesh& m) {
    double worst = 180.0;
    for (const auto& t : m.triangles)
        for (int i = 0; i < 3; ++i) {
            const Point o = m.vertices[t[i]];
            const Point a = m.vertices[t[(i + 1) % 3]] - o, b = m.vertices[t[(i + 2) % 3]] - o;
            worst = std::min(worst, std::acos(dot(a, b) / (norm(a) * norm(b))) * 180.0 / std::numbers::pi);
        }
    return worst;
}

void check_conforming(const Mesh& m) {
    // every interior edge shared by exactly two triangles, boundary edges by one
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : m.triangles)
        for (int i = 0; i < 3; ++i) {
            int a = t[i], b = t[(i + 1) % 3];
            count[{std::min(a, b), std::max(a, b)}]++;
        }
    std::size_t boundary = 0;
    for (const auto& [e, c] : count) {
        CHECK(c <= 2);
        if (c == 1) ++boundary;
    }
    CHECK(boundary == m.boundary_edges.size());
    for (std::size_t k = 0; k < m.triangle_count(); ++k) CHECK(m.geometry[k].area > 0.0);
}

}

TEST_SUITE("mesh") {

TEST_CASE("unit square") {
    const Mesh m = triangulate(make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 0.5, 1.0);
    check_conforming(m);
    CHECK(std::abs(m.area() - 1.0) < 1e-12);
    CHECK(m.h_max <= 0.5 + 1e-12);
}

TEST_CASE("disk 64-gon keeps quality and area") {
    const BoundaryPolygon poly = boundary_polygon(DomainSpec::disk(), 8, 64);
    const Mesh m = triangulate(poly, 0.2, 1.0);
    check_conforming(m);
    CHECK(min_angle_deg(m) >= 20.0 - 1e-9);
    CHECK(std::abs(m.area() - signed_area(poly.vertices)) < 1e-12);
}

TEST_CASE("cusp triangulation preserves the polygon area, smallest cells at the tip") {
    const BoundaryPolygon poly = boundary_polygon(DomainSpec::cusp(2.0), 16, 32, 2.0);
    const Mesh m = triangulate(poly, 0.25, 2.0);
    check_conforming(m);
    CHECK(std::abs(m.area() - signed_area(poly.vertices)) < 1e-12);

    const Point tip = poly.vertices[*poly.tip];
    double shortest = 1e9, near_tip = 1e9;
    for (const auto& t : m.triangles)
        for (int i = 0; i < 3; ++i) {
            const Point a = m.vertices[t[i]], b = m.vertices[t[(i + 1) % 3]];
            const double len = distance(a, b);
            shortest = std::min(shortest, len);
            if (distance(0.5 * (a + b), tip) < 0.1) near_tip = std::min(near_tip, len);
        }
    CHECK(near_tip == shortest);
    CHECK(m.h_min == doctest::Approx(shortest).epsilon(1e-12));
}

TEST_CASE("single triangle splits in four") {
    const Mesh m = make_mesh({{0, 0}, {1, 0}, {0.2, 0.9}}, {{0, 1, 2}},
                             {{0, 1, ArcTag::Segment}, {1, 2, ArcTag::Segment}, {2, 0, ArcTag::Segment}}, std::nullopt);
    const Mesh r = refine_uniform(m);
    CHECK(r.triangle_count() == 4);
    CHECK(r.vertex_count() == 6);
    CHECK(std::abs(r.area() - m.area()) < 1e-14);
    CHECK(r.boundary_edges.size() == 6);
}

TEST_CASE("refined disk stays on the circle") {
    MeshParams mp;
    mp.n_arc = 64;
    mp.target_h = 0.2;
    const Mesh m = build_refined_mesh(DomainSpec::disk(), mp, 2);
    check_conforming(m);
    for (std::size_t v = 0; v < m.vertex_count(); ++v)
        if (m.is_boundary_vertex[v]) CHECK(std::abs(norm(m.vertices[v]) - 1.0) < 1e-12);
}

TEST_CASE("weighted boundary length increases toward the exact value") {
    for (double a : {1.5, 2.5}) {
        const double exact = oracle::cusp_weighted_length(a);
        Mesh m = build_mesh(DomainSpec::cusp(a), MeshParams{});
        ProblemConfig cfg;
        double prev = 0.0;
        for (int level = 0; level < 3; ++level) {
            const double len = boundary_measure(m, cfg);
            CHECK(len > prev);
            CHECK(len < exact);
            prev = len;
            if (level < 2) m = refine_uniform(m);
        }
        CHECK(std::abs(prev - exact) / exact < 1e-3);
    }
}

TEST_CASE("boundary edge data") {
    const Mesh m = build_mesh(DomainSpec::cusp(1.5), MeshParams{});
    const DomainSpec& s = *m.domain;
    for (const auto& e : m.boundary_edges) {
        const Point a = m.vertices[e.v[0]], b = m.vertices[e.v[1]];
        CHECK(e.length == doctest::Approx(distance(a, b)).epsilon(1e-14));
        CHECK(std::abs(norm(e.normal) - 1.0) < 1e-14);
        // outward normal points to the right of a -> b
        const Point d = b - a;
        CHECK(e.normal.x * d.y - e.normal.y * d.x > 0.0);
        for (double w : e.weight_samples) {
            CHECK(w > 0.0);
            CHECK(w <= 1.0);
        }
        if (e.tag == ArcTag::CapArc) CHECK(e.weight_samples[0] == 1.0);
    }
    CHECK(s.alpha == 1.5);
    CHECK_FALSE(m.id.empty());
}

TEST_CASE("mesh invariants are enforced") {
    CHECK_THROWS_AS(make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}},
                              {{0, 1, ArcTag::Segment}, {1, 2, ArcTag::Segment}, {2, 0, ArcTag::Segment}}, std::nullopt),
                    MeshError);
    CHECK_THROWS_AS(make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}},
                              {{0, 1, ArcTag::Segment}, {1, 2, ArcTag::Segment}}, std::nullopt),
                    MeshError);
}

TEST_CASE("meshes are deterministic") {
    const Mesh a = build_mesh(DomainSpec::cusp(2.5), MeshParams{});
    const Mesh b = build_mesh(DomainSpec::cusp(2.5), MeshParams{});
    CHECK(a.vertices == b.vertices);
    CHECK(a.triangles == b.triangles);
    CHECK(a.id == b.id);
}

}
