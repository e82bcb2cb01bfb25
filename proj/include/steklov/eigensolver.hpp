#pragma once

#include "steklov/fem.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace steklov {

struct EigenResult {
    double lambda = 0.0;
    DiscreteField u;
    int iterations = 0;
    std::vector<double> energy_history;  // objective after each accepted step
    double constraint_residual = 0.0;     // |constraint| of the returned u
    double max_constraint_residual = 0.0; // worst over accepted iterates
    double weakform_residual = 0.0;
    bool converged = false;
    std::vector<double> spectrum;         // leading nontrivial eigenvalues (p = 2 direct path)
    int restarts = 0;
    std::vector<double> restart_lambdas;  // one per start, the first is the deterministic one
};

/// energy(u; eps = 0) / boundary_pnorm(u). Throws DomainError when the
/// boundary norm vanishes.
double rayleigh(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u);

enum class ShiftMethod { Bisection, Newton };

/// Root c of c -> constraint(u - c), bracketed by the extreme trace values.
/// Newton is safeguarded by the bracket and starts after a few bisections.
double shift_root(const BoundaryQuadrature& q, double p, std::span<const double> u,
                  ShiftMethod method = ShiftMethod::Newton, int* iterations = nullptr);

/// u - c with c = shift_root(u). Throws DomainError for a constant trace.
DiscreteField orthogonalize_shift(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u);

/// Relative residual of the discrete weak eigen-identity tested against all
/// nodal basis functions, with the constraint multiplier direction removed.
double weakform_residual(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u, double lambda);

/// Direct p = 2 path: condensation onto the boundary and a dense pencil.
/// `converged` means the weak-form residual meets the default accept_residual.
EigenResult solve_p2(const Mesh& mesh, bool weighted, std::size_t spectrum_count = 4);

struct SolverOptions {
    std::vector<double> eps_schedule{1e-2, 1e-4, 1e-6};  // used for p < 2, then a final eps = 0 stage
    int max_iterations = 5000;
    double stall_tolerance = 1e-10;  // relative decrease over stall_window steps
    int stall_window = 5;
    double residual_target = 1e-9;  // stop outright below this
    double accept_residual = 1e-6;  // the stall test only ends the final stage below this
    int residual_patience = 200;    // stalled steps without halving the residual before giving up; 0 = never
    double armijo = 1e-4;
    int restarts = 3;
    std::uint64_t seed = 1;
    bool conjugate = true;  // Polak-Ribiere on the preconditioned gradient
    int adapt_every = 10;   // refresh the coefficient-weighted preconditioner; 0 keeps K + M
};

/// Which p-norm sits in the denominator of the quotient.
enum class Denominator { Boundary, Volume };

/// Minimizes energy / denominator over the shifted and normalized set,
/// starting from `initial`. Single start; no restarts.
EigenResult minimize_quotient(const Mesh& mesh, const ProblemConfig& cfg, const SolverOptions& options,
                              Denominator denominator, std::span<const double> initial);

/// Smallest p-Rayleigh quotient on the admissible set. Starts from the
/// p = 2 eigenfunction plus `options.restarts` seeded random fields and
/// keeps the best.
EigenResult solve_p(const Mesh& mesh, const ProblemConfig& cfg, const SolverOptions& options = {});

} // namespace steklov
