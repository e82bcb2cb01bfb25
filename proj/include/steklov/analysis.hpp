#pragma once

#include "steklov/eigensolver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace steklov {

/// Side condition that removes constants in the Friedrichs-Poincare quotient.
enum class FpConstraint {
    WeightedBoundary,  // integral of |u|^(p-2) u w ds = 0
    ZeroMean,          // integral of u dx = 0 (p = 2 only; validation)
};

struct FpResult {
    double constant = 0.0;  // C = mu^(-1/p)
    double mu = 0.0;        // minimum of energy / volume_pnorm
    DiscreteField u;
    int iterations = 0;
    bool converged = false;
    double weakform_residual = 0.0;
};

/// p = 2: smallest eigenvalue of (K, M) on the hyperplane b^T u = 0, by
/// constrained shift-invert subspace iteration.
FpResult fp_pencil(const Mesh& mesh, bool weighted, FpConstraint constraint = FpConstraint::WeightedBoundary);

/// Descent on energy / volume_pnorm under the weighted boundary constraint.
FpResult fp_descent(const Mesh& mesh, const ProblemConfig& cfg, const SolverOptions& options,
                    std::span<const double> initial);

/// Pencil path at p = 2, descent (started from the p = 2 minimizer) otherwise.
FpResult fp_constant(const Mesh& mesh, const ProblemConfig& cfg, const SolverOptions& options = {},
                     FpConstraint constraint = FpConstraint::WeightedBoundary);

/// Top-k eigenvalues of B x = sigma (K + M) x, descending.
std::vector<double> trace_spectrum(const Mesh& mesh, bool weighted, std::size_t k);

enum class Trend { Stable, DecayingToZero, Undetermined };
std::string to_string(Trend trend);

/// Stable when the two finest values differ by at most `threshold`
/// (relative); decaying when otherwise strictly decreasing over at least
/// three levels.
Trend classify_trend(std::span<const double> values, double threshold = 0.05);

enum class SweepAxis { Alpha, P, Refinement };

struct SweepRow {
    double alpha = 0.0;
    double p = 2.0;
    bool weighted = true;
    int level = 0;
    double h_max = 0.0;
    double lambda = 0.0;
    double fp_constant = 0.0;
    int iterations = 0;
    bool converged = false;
    Trend trend = Trend::Undetermined;
    std::string mesh_id;
    std::string error;  // empty unless the cell failed
};

struct SweepReport {
    SweepAxis axis = SweepAxis::Alpha;
    std::uint64_t seed = 0;
    double trend_threshold = 0.05;
    std::vector<SweepRow> rows;  // sorted by (alpha, weighted desc, level)
};

struct SweepConfig {
    ProblemConfig problem;
    MeshParams mesh;
    SolverOptions solver;
    int refinements = 2;          // levels 0..refinements
    bool include_unweighted = true;
    bool include_fp = true;
    int threads = 1;              // alphas solved concurrently
};

/// Weighted and unweighted first eigenvalue plus FP constant for every
/// (alpha, level). A failing cell is recorded, never thrown. Throws
/// DomainError for an alpha <= 1.
SweepReport alpha_sweep(const SweepConfig& config, std::span<const double> alphas);

} // namespace steklov
