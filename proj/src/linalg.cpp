#include "steklov/linalg.hpp"

#include "steklov/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace steklov {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// ---------------------------------------------------------------------------
// SparseSym

SparseSym SparseSym::from_triplets(std::size_t n, std::span<const Triplet> triplets) {
    std::vector<Triplet> lower;
    lower.reserve(triplets.size());
    for (const Triplet& t : triplets) {
        if (t.row >= n || t.col >= n)
            throw DomainError(fmt::format("triplet ({}, {}) outside a {}x{} matrix", t.row, t.col, n, n));
        if (t.col > t.row) {
            lower.push_back({t.col, t.row, t.value});
        } else {
            lower.push_back(t);
        }
    }
    std::sort(lower.begin(), lower.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseSym m;
    m.n_ = n;
    m.row_start_.assign(n + 1, 0);
    for (std::size_t k = 0; k < lower.size();) {
        const std::size_t r = lower[k].row, c = lower[k].col;
        double v = 0.0;
        while (k < lower.size() && lower[k].row == r && lower[k].col == c) v += lower[k++].value;
        m.cols_.push_back(c);
        m.values_.push_back(v);
        ++m.row_start_[r + 1];
    }
    for (std::size_t i = 0; i < n; ++i) m.row_start_[i + 1] += m.row_start_[i];
    return m;
}

void SparseSym::multiply(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
            const std::size_t j = cols_[k];
            acc += values_[k] * x[j];
            if (j != i) y[j] += values_[k] * x[i];
        }
        y[i] += acc;
    }
}

Vector SparseSym::operator*(std::span<const double> x) const {
    Vector y(n_);
    multiply(x, y);
    return y;
}

double SparseSym::at(std::size_t i, std::size_t j) const {
    if (j > i) std::swap(i, j);
    const auto begin = cols_.begin() + static_cast<std::ptrdiff_t>(row_start_[i]);
    const auto end = cols_.begin() + static_cast<std::ptrdiff_t>(row_start_[i + 1]);
    const auto it = std::lower_bound(begin, end, j);
    return (it != end && *it == j) ? values_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
}

Vector SparseSym::diagonal() const {
    Vector d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
        if (row_start_[i + 1] > row_start_[i] && cols_[row_start_[i + 1] - 1] == i)
            d[i] = values_[row_start_[i + 1] - 1];
    return d;
}

SparseSym SparseSym::plus(const SparseSym& other, double scale) const {
    if (other.n_ != n_) throw DomainError("matrix dimensions differ");
    std::vector<Triplet> t;
    t.reserve(nonzeros() + other.nonzeros());
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) t.push_back({i, cols_[k], values_[k]});
        for (std::size_t k = other.row_start_[i]; k < other.row_start_[i + 1]; ++k)
            t.push_back({i, other.cols_[k], scale * other.values_[k]});
    }
    return from_triplets(n_, t);
}

// ---------------------------------------------------------------------------
// Conjugate gradients

Vector solve_spd(const SparseSym& a, std::span<const double> b, double tol, int max_iterations,
                 SolveStats* stats) {
    const std::size_t n = a.dimension();
    if (b.size() != n) throw DomainError("right-hand side has the wrong length");
    if (max_iterations <= 0) max_iterations = static_cast<int>(10 * n + 100);

    Vector x(n, 0.0), r(b.begin(), b.end()), z(n), p(n), q(n);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        if (stats) *stats = {0, 0.0};
        return x;
    }
    Vector inv_diag = a.diagonal();
    for (double& d : inv_diag) {
        if (!(d > 0.0)) throw SolverError("diagonal preconditioner needs a positive diagonal");
        d = 1.0 / d;
    }

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    double res = 1.0;
    for (int it = 1; it <= max_iterations; ++it) {
        a.multiply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) throw SolverError("matrix is not positive definite", res);
        const double step = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += step * p[i];
            r[i] -= step * q[i];
        }
        res = norm2(r) / bnorm;
        if (res <= tol) {
            // Confirm with the true residual; recurrences drift.
            Vector ax = a * x;
            for (std::size_t i = 0; i < n; ++i) ax[i] = b[i] - ax[i];
            res = norm2(ax) / bnorm;
            if (res <= tol) {
                if (stats) *stats = {it, res};
                return x;
            }
            r = ax;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverError(fmt::format("conjugate gradients did not converge in {} iterations "
                                  "(relative residual {:.3e})",
                                  max_iterations, res),
                      res);
}

// ---------------------------------------------------------------------------
// Envelope Cholesky

std::vector<std::size_t> reverse_cuthill_mckee(const SparseSym& a) {
    const std::size_t n = a.dimension();
    std::vector<std::vector<std::size_t>> adj(n);
    const auto& rs = a.row_start();
    const auto& cs = a.columns();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = rs[i]; k < rs[i + 1]; ++k)
            if (cs[k] != i) {
                adj[i].push_back(cs[k]);
                adj[cs[k]].push_back(i);
            }
    for (auto& nb : adj)
        std::sort(nb.begin(), nb.end(), [&](std::size_t x, std::size_t y) {
            return adj[x].size() != adj[y].size() ? adj[x].size() < adj[y].size() : x < y;
        });

    auto bfs_last = [&](std::size_t root, std::vector<char>& seen, std::vector<std::size_t>* order) {
        std::queue<std::size_t> q;
        q.push(root);
        seen[root] = 1;
        std::size_t last = root;
        while (!q.empty()) {
            const std::size_t v = q.front();
            q.pop();
            last = v;
            if (order) order->push_back(v);
            for (std::size_t w : adj[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    q.push(w);
                }
        }
        return last;
    };

    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<char> placed(n, 0);
    for (std::size_t start = 0; start < n; ++start) {
        if (placed[start]) continue;
        // Pseudo-peripheral root: the far end of a breadth-first sweep.
        std::vector<char> seen = placed;
        std::size_t root = bfs_last(start, seen, nullptr);
        seen = placed;
        root = bfs_last(root, seen, nullptr);
        bfs_last(root, placed, &order);
    }
    std::reverse(order.begin(), order.end());
    return order;
}

EnvelopeCholesky::EnvelopeCholesky(const SparseSym& a) : n_(a.dimension()) {
    perm_ = reverse_cuthill_mckee(a);
    std::vector<std::size_t> inverse(n_);
    for (std::size_t k = 0; k < n_; ++k) inverse[perm_[k]] = k;

    // Permuted lower-triangle entries, grouped by new row.
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(n_);
    const auto& rs = a.row_start();
    const auto& cs = a.columns();
    const auto& vs = a.values();
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = rs[i]; k < rs[i + 1]; ++k) {
            std::size_t r = inverse[i], c = inverse[cs[k]];
            if (c > r) std::swap(r, c);
            rows[r].push_back({c, vs[k]});
        }

    first_.resize(n_);
    offset_.resize(n_ + 1);
    offset_[0] = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        std::size_t f = i;
        for (const auto& [c, v] : rows[i]) f = std::min(f, c);
        first_[i] = f;
        offset_[i + 1] = offset_[i] + (i - f + 1);
    }
    values_.assign(offset_[n_], 0.0);
    for (std::size_t i = 0; i < n_; ++i)
        for (const auto& [c, v] : rows[i]) values_[offset_[i] + (c - first_[i])] += v;

    for (std::size_t i = 0; i < n_; ++i) {
        double* li = &values_[offset_[i]];
        const std::size_t fi = first_[i];
        for (std::size_t j = fi; j < i; ++j) {
            const double* lj = &values_[offset_[j]];
            const std::size_t fj = first_[j];
            const std::size_t k0 = std::max(fi, fj);
            double s = li[j - fi];
            for (std::size_t k = k0; k < j; ++k) s -= li[k - fi] * lj[k - fj];
            li[j - fi] = s / lj[j - fj];
        }
        double d = li[i - fi];
        for (std::size_t k = fi; k < i; ++k) d -= li[k - fi] * li[k - fi];
        if (!(d > 0.0))
            throw SolverError(fmt::format("envelope Cholesky: non-positive pivot {:.3e} at row {}", d, perm_[i]));
        li[i - fi] = std::sqrt(d);
    }
}

void EnvelopeCholesky::solve_in_place(std::span<double> x) const {
    Vector y(n_);
    for (std::size_t k = 0; k < n_; ++k) y[k] = x[perm_[k]];
    for (std::size_t i = 0; i < n_; ++i) {
        const double* li = &values_[offset_[i]];
        double s = y[i];
        for (std::size_t k = first_[i]; k < i; ++k) s -= li[k - first_[i]] * y[k];
        y[i] = s / li[i - first_[i]];
    }
    for (std::size_t i = n_; i-- > 0;) {
        const double* li = &values_[offset_[i]];
        y[i] /= li[i - first_[i]];
        const double yi = y[i];
        for (std::size_t k = first_[i]; k < i; ++k) y[k] -= li[k - first_[i]] * yi;
    }
    for (std::size_t k = 0; k < n_; ++k) x[perm_[k]] = y[k];
}

Vector EnvelopeCholesky::solve(std::span<const double> b) const {
    Vector x(b.begin(), b.end());
    solve_in_place(x);
    return x;
}

// ---------------------------------------------------------------------------
// Dense kernels

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m = square(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_sparse(const SparseSym& a) {
    const std::size_t n = a.dimension();
    DenseMatrix m = square(n);
    const auto& rs = a.row_start();
    const auto& cs = a.columns();
    const auto& vs = a.values();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = rs[i]; k < rs[i + 1]; ++k) {
            m(i, cs[k]) = vs[k];
            m(cs[k], i) = vs[k];
        }
    return m;
}

Vector DenseMatrix::column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

Vector DenseMatrix::operator*(std::span<const double> x) const {
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) y[i] = dot(row(i), x);
    return y;
}

double DenseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

DenseMatrix cholesky(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    DenseMatrix l = DenseMatrix::square(n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0))
            throw SolverError(fmt::format("Cholesky factorization failed: pivot {:.6e} at row {}", d, j));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            const auto li = l.row(i);
            const auto lj = l.row(j);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            l(i, j) = s / ljj;
        }
    }
    return l;
}

Vector cholesky_solve(const DenseMatrix& factor, std::span<const double> b) {
    const std::size_t n = factor.rows();
    Vector y(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        double s = y[i];
        for (std::size_t k = 0; k < i; ++k) s -= factor(i, k) * y[k];
        y[i] = s / factor(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= factor(k, i) * y[k];
        y[i] = s / factor(i, i);
    }
    return y;
}

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form. On exit
// `a` holds the orthogonal transformation, d the diagonal and e the
// subdiagonal in e[1..n-1].
void tridiagonalize(DenseMatrix& a, Vector& d, Vector& e) {
    const std::size_t n = a.rows();
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (std::size_t k = 0; k <= l; ++k) scale += std::abs(a(i, k));
            if (scale == 0.0) {
                e[i] = a(i, l);
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (std::size_t j = 0; j <= l; ++j) {
                    a(j, i) = a(i, j) / h;
                    g = 0.0;
                    for (std::size_t k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
                    for (std::size_t k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
                    e[j] = g / h;
                    f += e[j] * a(i, j);
                }
                const double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) {
                    f = a(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (std::size_t k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
                }
            }
        } else {
            e[i] = a(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] != 0.0) {
            for (std::size_t j = 0; j < i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k < i; ++k) g += a(i, k) * a(k, j);
                for (std::size_t k = 0; k < i; ++k) a(k, j) -= g * a(k, i);
            }
        }
        d[i] = a(i, i);
        a(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) a(j, i) = a(i, j) = 0.0;
    }
}

// Implicit QL with Wilkinson-type shifts on the tridiagonal (d, e). `zt`
// holds eigenvectors as rows and is rotated in place.
void implicit_ql(Vector& d, Vector& e, DenseMatrix& zt) {
    const long n = static_cast<long>(d.size());
    for (long i = 1; i < n; ++i) e[i - 1] = e[i];
    if (n > 0) e[n - 1] = 0.0;
    for (long l = 0; l < n; ++l) {
        int iter = 0;
        long m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw SolverError("implicit QL did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                long i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    e[i + 1] = (r = std::hypot(f, g));
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    d[i + 1] = g + (p = s * r);
                    g = c * r - b;
                    auto zi = zt.row(static_cast<std::size_t>(i));
                    auto zi1 = zt.row(static_cast<std::size_t>(i + 1));
                    for (std::size_t k = 0; k < zi.size(); ++k) {
                        f = zi1[k];
                        zi1[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace

EigenPairs symmetric_eig(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DomainError("symmetric_eig needs a square matrix");
    EigenPairs out;
    if (n == 0) return out;
    DenseMatrix q = a;
    Vector d, e;
    tridiagonalize(q, d, e);
    DenseMatrix zt = DenseMatrix::square(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) zt(j, i) = q(i, j);
    implicit_ql(d, e, zt);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });
    out.values.resize(n);
    out.vectors = DenseMatrix::square(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = d[order[j]];
        const auto z = zt.row(order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = z[i];
    }
    return out;
}

EigenPairs generalized_eig_sym(const DenseMatrix& a, const DenseMatrix& b, std::size_t k) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.rows() != n || b.cols() != n)
        throw DomainError("generalized_eig_sym needs square matrices of equal size");
    k = std::min(k, n);
    const DenseMatrix l = cholesky(b);

    // Y = L^{-1} A, then C = L^{-1} Y^T = L^{-1} A L^{-T}.
    auto forward = [&](const DenseMatrix& rhs, bool transpose_rhs) {
        DenseMatrix y = DenseMatrix::square(n);
        for (std::size_t col = 0; col < n; ++col) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = transpose_rhs ? rhs(col, i) : rhs(i, col);
                const auto li = l.row(i);
                for (std::size_t m = 0; m < i; ++m) s -= li[m] * y(m, col);
                y(i, col) = s / li[i];
            }
        }
        return y;
    };
    const DenseMatrix y = forward(a, false);
    DenseMatrix c = forward(y, true);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double s = 0.5 * (c(i, j) + c(j, i));
            c(i, j) = c(j, i) = s;
        }

    const EigenPairs std_pairs = symmetric_eig(c);
    EigenPairs out;
    out.values.assign(std_pairs.values.begin(), std_pairs.values.begin() + static_cast<std::ptrdiff_t>(k));
    out.vectors = DenseMatrix(n, k);
    for (std::size_t j = 0; j < k; ++j) {
        // x = L^{-T} z
        Vector x = std_pairs.vectors.column(j);
        for (std::size_t i = n; i-- > 0;) {
            double s = x[i];
            for (std::size_t m = i + 1; m < n; ++m) s -= l(m, i) * x[m];
            x[i] = s / l(i, i);
        }
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = x[i];
    }
    return out;
}

} // namespace steklov

namespace steklov {

// ---------------------------------------------------------------------------
// Static condensation

SchurReduction::SchurReduction(const SparseSym& a, std::vector<std::size_t> keep)
    : n_(a.dimension()), keep_(std::move(keep)) {
    local_.assign(n_, 0);
    std::vector<char> kept(n_, 0);
    for (std::size_t k = 0; k < keep_.size(); ++k) {
        if (keep_[k] >= n_ || kept[keep_[k]]) throw DomainError("kept indices must be distinct and in range");
        kept[keep_[k]] = 1;
        local_[keep_[k]] = static_cast<long>(k);
    }
    for (std::size_t i = 0; i < n_; ++i)
        if (!kept[i]) {
            local_[i] = -1 - static_cast<long>(elim_.size());
            elim_.push_back(i);
        }

    const std::size_t nk = keep_.size(), ne = elim_.size();
    s_ = DenseMatrix::square(nk);
    coupling_.assign(nk, {});
    std::vector<Triplet> inner;
    const auto& rs = a.row_start();
    const auto& cs = a.columns();
    const auto& vs = a.values();
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = rs[i]; k < rs[i + 1]; ++k) {
            const long li = local_[i], lj = local_[cs[k]];
            const double v = vs[k];
            if (li >= 0 && lj >= 0) {
                s_(li, lj) += v;
                if (li != lj) s_(lj, li) += v;
            } else if (li < 0 && lj < 0) {
                inner.push_back({static_cast<std::size_t>(-1 - li), static_cast<std::size_t>(-1 - lj), v});
            } else if (li >= 0) {
                coupling_[li].push_back({static_cast<std::size_t>(-1 - lj), v});
            } else {
                coupling_[lj].push_back({static_cast<std::size_t>(-1 - li), v});
            }
        }
    if (ne == 0) return;
    factor_ = std::make_shared<const EnvelopeCholesky>(SparseSym::from_triplets(ne, inner));

    Vector x(ne);
    for (std::size_t j = 0; j < nk; ++j) {
        if (coupling_[j].empty()) continue;
        std::fill(x.begin(), x.end(), 0.0);
        for (const auto& [e, v] : coupling_[j]) x[e] += v;
        factor_->solve_in_place(x);
        for (std::size_t i = 0; i < nk; ++i) {
            double s = 0.0;
            for (const auto& [e, v] : coupling_[i]) s += v * x[e];
            s_(i, j) -= s;
        }
    }
    // Symmetrize away rounding.
    for (std::size_t i = 0; i < nk; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double v = 0.5 * (s_(i, j) + s_(j, i));
            s_(i, j) = s_(j, i) = v;
        }
}

Vector SchurReduction::extend(std::span<const double> kept_values) const {
    if (kept_values.size() != keep_.size()) throw DomainError("wrong number of kept values");
    Vector full(n_, 0.0);
    for (std::size_t k = 0; k < keep_.size(); ++k) full[keep_[k]] = kept_values[k];
    if (!factor_) return full;
    Vector rhs(elim_.size(), 0.0);
    for (std::size_t k = 0; k < keep_.size(); ++k)
        for (const auto& [e, v] : coupling_[k]) rhs[e] -= v * kept_values[k];
    factor_->solve_in_place(rhs);
    for (std::size_t e = 0; e < elim_.size(); ++e) full[elim_[e]] = rhs[e];
    return full;
}

DenseMatrix SchurReduction::restrict(const SparseSym& other) const {
    if (other.dimension() != n_) throw DomainError("matrix dimensions differ");
    DenseMatrix r = DenseMatrix::square(keep_.size());
    const auto& rs = other.row_start();
    const auto& cs = other.columns();
    const auto& vs = other.values();
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = rs[i]; k < rs[i + 1]; ++k) {
            const long li = local_[i], lj = local_[cs[k]];
            if (li < 0 || lj < 0) continue;
            r(li, lj) += vs[k];
            if (li != lj) r(lj, li) += vs[k];
        }
    return r;
}

} // namespace steklov
