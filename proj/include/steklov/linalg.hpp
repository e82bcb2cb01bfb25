#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace steklov {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Symmetric sparse matrix; only the lower triangle is stored, in
/// compressed row form with sorted columns.
class SparseSym {
public:
    SparseSym() = default;

    /// Duplicates are summed. Entries from either triangle are accepted and
    /// folded into the lower one, so pass each off-diagonal pair once.
    static SparseSym from_triplets(std::size_t n, std::span<const Triplet> triplets);

    std::size_t dimension() const { return n_; }
    std::size_t nonzeros() const { return values_.size(); }

    const std::vector<std::size_t>& row_start() const { return row_start_; }
    const std::vector<std::size_t>& columns() const { return cols_; }
    const std::vector<double>& values() const { return values_; }

    void multiply(std::span<const double> x, std::span<double> y) const;
    Vector operator*(std::span<const double> x) const;
    double at(std::size_t i, std::size_t j) const;
    Vector diagonal() const;

    /// this + scale * other (same dimension).
    SparseSym plus(const SparseSym& other, double scale = 1.0) const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_start_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> values_;
};

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Conjugate gradients with a diagonal preconditioner. Returns x with
/// ||Ax - b|| <= tol ||b||, or throws SolverError carrying the final residual.
Vector solve_spd(const SparseSym& a, std::span<const double> b, double tol,
                 int max_iterations = 0, SolveStats* stats = nullptr);

/// Reverse Cuthill-McKee ordering; perm[new] = old.
std::vector<std::size_t> reverse_cuthill_mckee(const SparseSym& a);

/// Envelope (profile) Cholesky factorization under an RCM ordering, for
/// repeated solves with one SPD matrix.
class EnvelopeCholesky {
public:
    explicit EnvelopeCholesky(const SparseSym& a);

    std::size_t dimension() const { return n_; }
    std::size_t fill() const { return values_.size(); }

    Vector solve(std::span<const double> b) const;
    void solve_in_place(std::span<double> x) const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> perm_;      // perm_[new] = old
    std::vector<std::size_t> first_;     // first column of each envelope row
    std::vector<std::size_t> offset_;    // start of each row in values_
    std::vector<double> values_;         // row i holds L(i, first_[i] .. i)
};

/// Dense row-major square matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static DenseMatrix square(std::size_t n) { return DenseMatrix(n, n); }
    static DenseMatrix identity(std::size_t n);
    static DenseMatrix from_sparse(const SparseSym& a);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    Vector column(std::size_t j) const;
    Vector operator*(std::span<const double> x) const;
    double max_abs() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

/// Lower Cholesky factor of a symmetric positive definite matrix. Throws
/// SolverError naming the smallest pivot on failure.
DenseMatrix cholesky(const DenseMatrix& a);

/// Solves A x = b given the lower Cholesky factor of A.
Vector cholesky_solve(const DenseMatrix& factor, std::span<const double> b);

struct EigenPairs {
    Vector values;        // ascending
    DenseMatrix vectors;  // n x k, column j pairs with values[j]
};

/// All eigenpairs of a dense symmetric matrix (Householder tridiagonalization
/// followed by implicit QL), ascending.
EigenPairs symmetric_eig(const DenseMatrix& a);

/// k smallest eigenpairs of A x = lambda B x with B positive definite.
/// Eigenvectors are B-orthonormal.
EigenPairs generalized_eig_sym(const DenseMatrix& a, const DenseMatrix& b, std::size_t k);

/// Static condensation of an SPD sparse matrix onto the `keep` unknowns:
/// S = A_kk - A_ke A_ee^{-1} A_ek, with A_ee factored once.
class SchurReduction {
public:
    SchurReduction(const SparseSym& a, std::vector<std::size_t> keep);

    const std::vector<std::size_t>& kept() const { return keep_; }
    const DenseMatrix& complement() const { return s_; }

    /// Full vector whose eliminated part solves A_ee x_e = -A_ek x_k.
    Vector extend(std::span<const double> kept_values) const;

    /// Rows and columns `kept()` of another matrix, densified.
    DenseMatrix restrict(const SparseSym& other) const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> keep_;
    std::vector<std::size_t> elim_;
    std::vector<long> local_;  // index within keep_ (>= 0) or -(1 + index within elim_)
    std::vector<std::vector<std::pair<std::size_t, double>>> coupling_;  // per kept column: (elim index, value)
    std::shared_ptr<const EnvelopeCholesky> factor_;  // null when nothing is eliminated
    DenseMatrix s_;
};

} // namespace steklov
