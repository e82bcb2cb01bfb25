#include "steklov/analysis.hpp"
#include "steklov/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

using namespace steklov;

TEST_SUITE("analysis") {

TEST_CASE("trend classification") {
    CHECK(classify_trend(std::vector<double>{1.0, 0.99, 0.985}) == Trend::Stable);
    CHECK(classify_trend(std::vector<double>{0.05, 0.03, 0.02}) == Trend::DecayingToZero);
    CHECK(classify_trend(std::vector<double>{0.05, 0.03}) == Trend::Undetermined);
    CHECK(classify_trend(std::vector<double>{0.05, 0.06, 0.03}) == Trend::Undetermined);
    CHECK(classify_trend(std::vector<double>{1.0}) == Trend::Undetermined);
    CHECK(classify_trend(std::vector<double>{1.0, std::nan(""), 1.0}) == Trend::Undetermined);
    CHECK(to_string(Trend::DecayingToZero) == "decaying-to-zero");
}

TEST_CASE("square zero-mean constant") {
    Mesh m = triangulate(make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 0.1, 1.0);
    double prev_err = 1.0;
    for (int level = 0; level < 2; ++level) {
        const FpResult fp = fp_pencil(m, false, FpConstraint::ZeroMean);
        CHECK(fp.converged);
        const double err = std::abs(fp.constant * std::numbers::pi - 1.0);
        CHECK(err < prev_err);
        prev_err = err;
        m = refine_uniform(m);
    }
    CHECK(prev_err < 0.01);
}

TEST_CASE("pencil and descent agree at p = 2") {
    const Mesh m = build_mesh(DomainSpec::cusp(1.5), MeshParams{});
    const FpResult pencil = fp_pencil(m, true);
    ProblemConfig cfg;
    Vector start(m.vertex_count());
    for (std::size_t v = 0; v < start.size(); ++v) start[v] = m.vertices[v].x + 0.3 * m.vertices[v].y;
    const FpResult descent = fp_descent(m, cfg, SolverOptions{}, start);
    CHECK(std::abs(descent.constant - pencil.constant) / pencil.constant <= 1e-6);
    CHECK(pencil.constant > 0.0);
    CHECK(std::isfinite(pencil.constant));
}

TEST_CASE("FP constant for p != 2") {
    const Mesh m = build_mesh(DomainSpec::cusp(2.5), MeshParams{});
    for (double p : {1.5, 3.0}) {
        ProblemConfig cfg;
        cfg.p = p;
        const FpResult fp = fp_constant(m, cfg);
        CHECK(fp.converged);
        CHECK(fp.constant > 0.0);
        CHECK(fp.weakform_residual <= 1e-6);
    }
    ProblemConfig cfg;
    cfg.p = 3.0;
    CHECK_THROWS_AS(fp_constant(m, cfg, SolverOptions{}, FpConstraint::ZeroMean), DomainError);
}

TEST_CASE("disk trace spectrum") {
    MeshParams mp;
    mp.n_arc = 64;
    mp.target_h = 0.2;
    Mesh m = build_mesh(DomainSpec::disk(), mp);
    const auto s0 = trace_spectrum(m, false, 10);
    const auto s1 = trace_spectrum(refine_uniform(m), false, 10);
    REQUIRE(s0.size() == 10);
    for (std::size_t i = 0; i < s0.size(); ++i) {
        CHECK(s0[i] >= 0.0);
        CHECK(std::isfinite(s0[i]));
        if (i > 0) CHECK(s0[i] <= s0[i - 1] * (1 + 1e-12));
    }
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(s1[i] - s0[i]) / s0[i] < 0.02);
}

TEST_CASE("trace spectrum does not depend on the vertex numbering") {
    const Mesh m = build_mesh(DomainSpec::cusp(2.0), MeshParams{8, 16, 2.0, 0.4, 2.0});
    const std::size_t n = m.vertex_count();
    std::vector<Index> perm(n);  // old -> new, a reversal
    for (std::size_t v = 0; v < n; ++v) perm[v] = static_cast<Index>(n - 1 - v);
    std::vector<Point> verts(n);
    for (std::size_t v = 0; v < n; ++v) verts[perm[v]] = m.vertices[v];
    auto tris = m.triangles;
    for (auto& t : tris)
        for (auto& v : t) v = perm[v];
    std::vector<BoundarySegment> segs;
    for (const auto& e : m.boundary_edges) segs.push_back({perm[e.v[0]], perm[e.v[1]], e.tag});
    const Mesh q = make_mesh(verts, tris, segs, m.domain);
    for (bool weighted : {true, false}) {
        const auto a = trace_spectrum(m, weighted, 6), b = trace_spectrum(q, weighted, 6);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10 * a[0]);
    }
}

TEST_CASE("unweighted trace values accumulate at a sharp cusp") {
    const Mesh m0 = build_mesh(DomainSpec::cusp(2.5), MeshParams{});
    const Mesh m1 = refine_uniform(m0);
    const Mesh m2 = refine_uniform(m1);
    auto above = [](const std::vector<double>& s, double t) { return std::count_if(s.begin(), s.end(), [t](double v) { return v > t; }); };
    const auto u0 = trace_spectrum(m0, false, 40), u2 = trace_spectrum(m2, false, 40);
    CHECK(above(u2, 1.0) > above(u0, 1.0));
    const auto w1 = trace_spectrum(m1, true, 5), w2 = trace_spectrum(m2, true, 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(w2[i] - w1[i]) / w1[i] < 0.02);
}

TEST_CASE("sweeps") {
    SweepConfig cfg;
    cfg.refinements = 0;
    CHECK(alpha_sweep(cfg, std::vector<double>{}).rows.empty());
    CHECK_THROWS_AS(alpha_sweep(cfg, std::vector<double>{0.5}), DomainError);

    cfg.refinements = 1;
    cfg.solver.restarts = 0;
    const SweepReport r = alpha_sweep(cfg, std::vector<double>{2.5, 1.5, 2.5});
    REQUIRE(r.rows.size() == 8);  // 2 alphas x 2 flags x 2 levels
    CHECK(r.rows.front().alpha == 1.5);
    CHECK(r.rows.back().alpha == 2.5);
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
        const auto& a = r.rows[i - 1];
        const auto& b = r.rows[i];
        CHECK(std::make_tuple(a.alpha, !a.weighted, a.level) < std::make_tuple(b.alpha, !b.weighted, b.level));
    }
    for (const auto& row : r.rows) {
        CHECK(row.converged);
        CHECK_FALSE(row.mesh_id.empty());
        CHECK(row.fp_constant > 0.0);
    }
    CHECK(r.rows[0].trend == Trend::Stable);  // alpha 1.5 weighted

    cfg.threads = 2;
    const SweepReport again = alpha_sweep(cfg, std::vector<double>{1.5, 2.5});
    REQUIRE(again.rows.size() == r.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) CHECK(again.rows[i].lambda == r.rows[i].lambda);
}

TEST_CASE("a failing cell is recorded") {
    SweepConfig cfg;
    cfg.refinements = 1;
    cfg.solver.restarts = 0;
    cfg.mesh.n_arc = 4;  // rejected by the mesher
    const SweepReport r = alpha_sweep(cfg, std::vector<double>{2.0});
    REQUIRE(r.rows.size() == 4);
    for (const auto& row : r.rows) {
        CHECK_FALSE(row.converged);
        CHECK_FALSE(row.error.empty());
        CHECK(std::isnan(row.lambda));
    }
}

}
