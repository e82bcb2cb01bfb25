#include "oracles.hpp"

#include "steklov/errors.hpp"
#include "steklov/fem.hpp"
#include "steklov/linalg.hpp"

#include <doctest.h>

#include <random>

using namespace steklov;

namespace {

SparseSym from_dense(const DenseMatrix& a) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j <= i; ++j)
            if (a(i, j) != 0.0) t.push_back({i, j, a(i, j)});
    return SparseSym::from_triplets(a.rows(), t);
}

DenseMatrix random_spd(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    DenseMatrix r(n, n), a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = g(rng);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = i == j ? 1.0 : 0.0;
            for (std::size_t k = 0; k < n; ++k) s += r(k, i) * r(k, j);
            a(i, j) = s;
        }
    return a;
}

double residual(const SparseSym& a, const Vector& x, const Vector& b) {
    const Vector ax = a * x;
    double r = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) r += (ax[i] - b[i]) * (ax[i] - b[i]);
    return std::sqrt(r) / norm2(b);
}

std::vector<std::vector<double>> nested(const DenseMatrix& a) {
    std::vector<std::vector<double>> out(a.rows(), std::vector<double>(a.cols()));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[i][j] = a(i, j);
    return out;
}

}

TEST_SUITE("linalg") {

TEST_CASE("triplets fold into the lower triangle and sum duplicates") {
    const std::vector<Triplet> t{{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 3.0}, {1, 1, 4.0}, {1, 1, 1.0}};
    const SparseSym a = SparseSym::from_triplets(2, t);
    CHECK(a.at(0, 0) == 1.0);
    CHECK(a.at(1, 0) == 5.0);
    CHECK(a.at(0, 1) == 5.0);
    CHECK(a.at(1, 1) == 5.0);
    const Vector y = a * Vector{1.0, -1.0};
    CHECK(y[0] == -4.0);
    CHECK(y[1] == 0.0);
}

TEST_CASE("identity solve returns b") {
    const SparseSym id = from_dense(DenseMatrix::identity(5));
    const Vector b{1, -2, 3, 0.5, 7};
    const Vector x = solve_spd(id, b, 1e-14);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("random SPD 50x50") {
    std::mt19937_64 rng(11);
    const DenseMatrix ad = random_spd(50, rng);
    const SparseSym a = from_dense(ad);
    Vector b(50);
    std::normal_distribution<double> g;
    for (double& v : b) v = g(rng);
    SolveStats stats;
    const Vector x = solve_spd(a, b, 1e-10, 0, &stats);
    CHECK(residual(a, x, b) <= 1e-10);
    CHECK(stats.relative_residual <= 1e-10);

    const EnvelopeCholesky chol(a);
    CHECK(residual(a, chol.solve(b), b) <= 1e-12);
    const Vector xd = cholesky_solve(cholesky(ad), b);
    CHECK(residual(a, xd, b) <= 1e-12);
}

TEST_CASE("singular stiffness with a consistent right-hand side") {
    const Mesh m = triangulate(make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 0.2, 1.0);
    const P2Matrices mats = assemble_p2(m, false);
    const std::size_t n = m.vertex_count();
    Vector b(n);
    for (std::size_t v = 0; v < n; ++v) b[v] = std::sin(3 * m.vertices[v].x) + m.vertices[v].y;
    double mean = 0.0;
    for (double v : b) mean += v / n;
    for (double& v : b) v -= mean;  // orthogonal to the constant kernel
    const Vector x = solve_spd(mats.K, b, 1e-10);
    CHECK(residual(mats.K, x, b) <= 1e-10);

    // pin one node; the pinned solution differs from x by a constant
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = mats.K.row_start()[i]; k < mats.K.row_start()[i + 1]; ++k) {
            const std::size_t j = mats.K.columns()[k];
            if (i == 0 || j == 0) continue;
            t.push_back({i, j, mats.K.values()[k]});
        }
    t.push_back({0, 0, 1.0});
    Vector bp = b;
    bp[0] = 0.0;
    const Vector xp = EnvelopeCholesky(SparseSym::from_triplets(n, t)).solve(bp);
    const double shift = x[0] - xp[0];
    for (std::size_t v = 1; v < n; ++v) CHECK(std::abs(x[v] - xp[v] - shift) < 1e-7);
}

TEST_CASE("solve failure carries the residual") {
    DenseMatrix a = DenseMatrix::identity(3);
    a(2, 2) = -1.0;
    CHECK_THROWS_AS(cholesky(a), SolverError);
    CHECK_THROWS_AS(EnvelopeCholesky(from_dense(a)), SolverError);
}

TEST_CASE("RCM is a permutation") {
    const Mesh m = triangulate(make_polygon({{0, 0}, {2, 0}, {2, 1}, {0, 1}}), 0.2, 1.0);
    auto perm = reverse_cuthill_mckee(assemble_p2(m, false).K);
    std::sort(perm.begin(), perm.end());
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(perm[i] == i);
}

TEST_CASE("small pencils") {
    SUBCASE("diagonal") {
        DenseMatrix a = DenseMatrix::square(3);
        a(0, 0) = 1;
        a(1, 1) = 2;
        a(2, 2) = 3;
        const EigenPairs e = generalized_eig_sym(a, DenseMatrix::identity(3), 3);
        CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(e.values[1] == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(e.values[2] == doctest::Approx(3.0).epsilon(1e-14));
    }
    SUBCASE("B scaling inverts") {
        DenseMatrix b = DenseMatrix::identity(2);
        b(1, 1) = 4;
        const EigenPairs e = generalized_eig_sym(DenseMatrix::identity(2), b, 2);
        CHECK(e.values[0] == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("random pencils against characteristic polynomial roots") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> g;
        for (std::size_t n : {2u, 3u, 4u}) {
            for (int trial = 0; trial < 3; ++trial) {
                DenseMatrix a = DenseMatrix::square(n);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
                const DenseMatrix b = random_spd(n, rng);
                const EigenPairs e = generalized_eig_sym(a, b, n);
                const auto roots = oracle::pencil_roots(nested(a), nested(b), e.values.front() - 1.0,
                                                        e.values.back() + 1.0);
                REQUIRE(roots.size() == n);
                for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(e.values[i] - roots[i]) < 1e-10);
                // B-orthonormal eigenvectors
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) {
                        const Vector vi = e.vectors.column(i), vj = e.vectors.column(j);
                        CHECK(dot(vi, b * vj) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
                    }
            }
        }
    }
}

TEST_CASE("symmetric eigen decomposition reconstructs the matrix") {
    std::mt19937_64 rng(3);
    const DenseMatrix a = random_spd(12, rng);
    const EigenPairs e = symmetric_eig(a);
    for (std::size_t i = 1; i < 12; ++i) CHECK(e.values[i] >= e.values[i - 1]);
    for (std::size_t j = 0; j < 12; ++j) {
        const Vector v = e.vectors.column(j);
        const Vector av = a * v;
        for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(av[i] - e.values[j] * v[i]) < 1e-10 * e.values.back());
    }
}

TEST_CASE("Schur complement matches dense elimination") {
    const Mesh m = triangulate(make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 0.35, 1.0);
    const P2Matrices mats = assemble_p2(m, false);
    const SparseSym a = mats.K.plus(mats.M);
    std::vector<std::size_t> keep, elim;
    for (std::size_t v = 0; v < m.vertex_count(); ++v) (m.is_boundary_vertex[v] ? keep : elim).push_back(v);
    const SchurReduction schur(a, keep);

    // dense S = A_kk - A_ke A_ee^{-1} A_ek
    const DenseMatrix ad = DenseMatrix::from_sparse(a);
    DenseMatrix aee = DenseMatrix::square(elim.size());
    for (std::size_t i = 0; i < elim.size(); ++i)
        for (std::size_t j = 0; j < elim.size(); ++j) aee(i, j) = ad(elim[i], elim[j]);
    const DenseMatrix l = cholesky(aee);
    for (std::size_t j = 0; j < keep.size(); ++j) {
        Vector col(elim.size());
        for (std::size_t i = 0; i < elim.size(); ++i) col[i] = ad(elim[i], keep[j]);
        const Vector y = cholesky_solve(l, col);
        for (std::size_t i = 0; i < keep.size(); ++i) {
            double s = ad(keep[i], keep[j]);
            for (std::size_t k = 0; k < elim.size(); ++k) s -= ad(keep[i], elim[k]) * y[k];
            CHECK(std::abs(schur.complement()(i, j) - s) < 1e-12 * ad.max_abs());
        }
    }

    // the extension is A-harmonic in the eliminated block
    Vector kept(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) kept[i] = m.vertices[keep[i]].x * m.vertices[keep[i]].y;
    const Vector full = schur.extend(kept);
    const Vector r = a * full;
    for (std::size_t e : elim) CHECK(std::abs(r[e]) < 1e-12);
    for (std::size_t i = 0; i < keep.size(); ++i) CHECK(full[keep[i]] == kept[i]);
}

}
