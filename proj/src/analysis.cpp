#include "steklov/analysis.hpp"

#include "steklov/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>

namespace steklov {

namespace {

// u <- u + nu A^{-1} b with nu chosen so that b^T u = 0.
void project_constraint(std::span<double> u, const Vector& b, const Vector& ainv_b, double b_ainv_b) {
    const double nu = -dot(b, u) / b_ainv_b;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += nu * ainv_b[i];
}

// |A| |x| for a symmetric matrix stored as its lower triangle.
Vector abs_multiply(const SparseSym& a, const Vector& x) {
    Vector y(x.size(), 0.0);
    const auto& rs = a.row_start();
    const auto& cols = a.columns();
    const auto& vals = a.values();
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = rs[i]; k < rs[i + 1]; ++k) {
            const std::size_t j = cols[k];
            const double v = std::abs(vals[k]);
            y[i] += v * std::abs(x[j]);
            if (j != i) y[j] += v * std::abs(x[i]);
        }
    return y;
}

struct PencilResidual {
    double relative;  // |K u - mu M u| (b removed) over |K u| + mu |M u|
    double floor;     // rounding level of the same quantity
};

PencilResidual pencil_residual(const P2Matrices& mats, const Vector& b, const Vector& u) {
    const Vector ku = mats.K * u, mu_vec = mats.M * u;
    const double mu = dot(u, ku) / dot(u, mu_vec);
    Vector r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = ku[i] - mu * mu_vec[i];
    const double rb = dot(r, b) / dot(b, b);
    for (std::size_t i = 0; i < u.size(); ++i) r[i] -= rb * b[i];
    const double denom = norm2(ku) + mu * norm2(mu_vec);
    Vector scale = abs_multiply(mats.K, u);
    const Vector m_abs = abs_multiply(mats.M, u);
    for (std::size_t i = 0; i < u.size(); ++i) scale[i] += mu * m_abs[i];
    return {norm2(r) / denom, std::numeric_limits<double>::epsilon() * norm2(scale) / denom};
}

} // namespace

FpResult fp_pencil(const Mesh& mesh, bool weighted, FpConstraint constraint) {
    const P2Matrices mats = assemble_p2(mesh, weighted);
    const std::size_t n = mesh.vertex_count();
    const Vector ones(n, 1.0);
    const Vector b = constraint == FpConstraint::ZeroMean ? mats.M * ones : mats.B * ones;

    // Shift-invert with A = K + sigma M; sigma of the order of the answer
    // keeps the iteration contracting quickly.
    const double sigma = 1.0;
    const EnvelopeCholesky a(mats.K.plus(mats.M, sigma));
    const Vector ainv_b = a.solve(b);
    const double b_ainv_b = dot(b, ainv_b);

    // Eight vectors: clustered low modes at sharp cusps make a smaller
    // block converge slowly.
    const std::size_t m = std::min<std::size_t>(8, n - 1);
    std::vector<Vector> x(m, Vector(n));
    for (std::size_t v = 0; v < n; ++v) {
        const Point pt = mesh.vertices[v];
        const double start[8] = {pt.x,        pt.y,        pt.x * pt.y,        pt.x * pt.x,
                                 pt.y * pt.y, pt.x * pt.x * pt.y, pt.x * pt.y * pt.y, pt.y * pt.y * pt.y};
        for (std::size_t j = 0; j < m; ++j) x[j][v] = start[j];
    }

    FpResult result;
    double best = std::numeric_limits<double>::infinity();
    int last_gain = 0;
    for (int it = 1; it <= 500; ++it) {
        std::vector<Vector> y(m);
        for (std::size_t j = 0; j < m; ++j) {
            // y = A^{-1}(M x + nu b), b^T y = 0
            y[j] = a.solve(mats.M * x[j]);
            project_constraint(y[j], b, ainv_b, b_ainv_b);
        }
        // M-orthonormal basis (two Gram-Schmidt passes); the Ritz problem
        // is then an ordinary symmetric one.
        std::vector<Vector> my(m);
        for (std::size_t j = 0; j < m; ++j) {
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t i = 0; i < j; ++i) {
                    const double c = dot(my[i], y[j]);
                    for (std::size_t v = 0; v < n; ++v) y[j][v] -= c * y[i][v];
                }
            Vector mj = mats.M * y[j];
            const double nrm = std::sqrt(dot(y[j], mj));
            if (!(nrm > 0.0)) throw SolverError("subspace iteration lost rank");
            for (double& v : y[j]) v /= nrm;
            for (double& v : mj) v /= nrm;
            my[j] = std::move(mj);
        }
        DenseMatrix kr = DenseMatrix::square(m);
        for (std::size_t j = 0; j < m; ++j) {
            const Vector ky = mats.K * y[j];
            for (std::size_t i = 0; i <= j; ++i) kr(i, j) = kr(j, i) = dot(y[i], ky);
        }
        const EigenPairs ritz = symmetric_eig(kr);
        for (std::size_t j = 0; j < m; ++j) {
            std::fill(x[j].begin(), x[j].end(), 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                const double c = ritz.vectors(i, j);
                for (std::size_t v = 0; v < n; ++v) x[j][v] += c * y[i][v];
            }
        }
        result.iterations = it;
        // Sliver cells in the tip zone put a rounding floor under the
        // residual; near it, stop once the residual no longer halves.
        const PencilResidual res = pencil_residual(mats, b, x[0]);
        if (res.relative < 0.5 * best) {
            best = res.relative;
            last_gain = it;
        }
        const bool at_floor = res.relative <= 1e2 * res.floor && it - last_gain >= 10;
        if (res.relative <= 1e-10 || at_floor) {
            result.converged = true;
            break;
        }
    }

    Vector& u = x[0];
    result.mu = dot(u, mats.K * u) / dot(u, mats.M * u);
    result.weakform_residual = pencil_residual(mats, b, u).relative;
    if (!(result.mu > 0.0)) throw SolverError("constrained Poincare quotient is not positive");
    result.constant = 1.0 / std::sqrt(result.mu);
    result.u = std::move(u);
    return result;
}

FpResult fp_descent(const Mesh& mesh, const ProblemConfig& cfg, const SolverOptions& options,
                    std::span<const double> initial) {
    const EigenResult r = minimize_quotient(mesh, cfg, options, Denominator::Volume, initial);
    FpResult out;
    out.mu = r.lambda;
    out.constant = std::pow(r.lambda, -1.0 / cfg.p);
    out.u = r.u;
    out.iterations = r.iterations;
    out.converged = r.converged;
    out.weakform_residual = r.weakform_residual;
    return out;
}

FpResult fp_constant(const Mesh& mesh, const ProblemConfig& cfg, const SolverOptions& options,
                     FpConstraint constraint) {
    cfg.validate();
    if (cfg.p == 2.0) return fp_pencil(mesh, cfg.weighted, constraint);
    if (constraint == FpConstraint::ZeroMean) throw DomainError("the zero-mean constraint is only available at p = 2");
    const FpResult start = fp_pencil(mesh, cfg.weighted, constraint);
    return fp_descent(mesh, cfg, options, start.u);
}

std::vector<double> trace_spectrum(const Mesh& mesh, bool weighted, std::size_t k) {
    const P2Matrices mats = assemble_p2(mesh, weighted);
    std::vector<std::size_t> boundary;
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
        if (mesh.is_boundary_vertex[v]) boundary.push_back(v);
    // Eigenvectors with sigma != 0 are (K + M)-harmonic inside, so the
    // pencil condenses onto the boundary.
    const SchurReduction schur(mats.K.plus(mats.M), boundary);
    DenseMatrix neg_b = schur.restrict(mats.B);
    for (std::size_t i = 0; i < neg_b.rows(); ++i)
        for (std::size_t j = 0; j < neg_b.cols(); ++j) neg_b(i, j) = -neg_b(i, j);
    const EigenPairs pairs = generalized_eig_sym(neg_b, schur.complement(), std::min(k, boundary.size()));
    std::vector<double> sigma(pairs.values.size());
    for (std::size_t j = 0; j < sigma.size(); ++j) sigma[j] = -pairs.values[j];
    return sigma;
}

std::string to_string(Trend trend) {
    switch (trend) {
    case Trend::Stable: return "stable";
    case Trend::DecayingToZero: return "decaying-to-zero";
    case Trend::Undetermined: return "undetermined";
    }
    return "undetermined";
}

Trend classify_trend(std::span<const double> values, double threshold) {
    const std::size_t n = values.size();
    if (n < 2) return Trend::Undetermined;
    for (double v : values)
        if (!std::isfinite(v)) return Trend::Undetermined;
    const double last = values[n - 1], prev = values[n - 2];
    if (std::abs(last - prev) <= threshold * std::abs(last)) return Trend::Stable;
    if (n >= 3) {
        bool decreasing = true;
        for (std::size_t i = 1; i < n; ++i) decreasing = decreasing && values[i] < values[i - 1];
        if (decreasing) return Trend::DecayingToZero;
    }
    return Trend::Undetermined;
}

namespace {

// All rows for one alpha: levels in order, weighted block first.
std::vector<SweepRow> sweep_alpha(const SweepConfig& config, double alpha, double threshold) {
    std::vector<bool> flags{true};
    if (config.include_unweighted) flags.push_back(false);
    std::vector<std::vector<SweepRow>> per_flag(flags.size());

    std::optional<Mesh> mesh;
    std::string mesh_error;
    for (int level = 0; level <= config.refinements; ++level) {
        try {
            if (!mesh_error.empty()) {
                // later levels inherit the failure
            } else if (!mesh) {
                mesh = build_mesh(DomainSpec::cusp(alpha), config.mesh);
            } else {
                mesh = refine_uniform(*mesh);
            }
        } catch (const Error& e) {
            mesh.reset();
            mesh_error = e.what();
        }
        for (std::size_t f = 0; f < flags.size(); ++f) {
            SweepRow row;
            row.alpha = alpha;
            row.p = config.problem.p;
            row.weighted = flags[f];
            row.level = level;
            row.lambda = std::numeric_limits<double>::quiet_NaN();
            row.fp_constant = std::numeric_limits<double>::quiet_NaN();
            if (!mesh) {
                row.error = mesh_error;
                per_flag[f].push_back(row);
                continue;
            }
            row.h_max = mesh->h_max;
            row.mesh_id = mesh->id;
            ProblemConfig cfg = config.problem;
            cfg.weighted = flags[f];
            try {
                const EigenResult r = solve_p(*mesh, cfg, config.solver);
                row.lambda = r.lambda;
                row.iterations = r.iterations;
                row.converged = r.converged;
                if (config.include_fp) {
                    const FpResult fp = fp_constant(*mesh, cfg, config.solver);
                    row.fp_constant = fp.constant;
                    row.converged = row.converged && fp.converged;
                }
            } catch (const Error& e) {
                row.converged = false;
                row.error = e.what();
            }
            per_flag[f].push_back(row);
        }
    }

    std::vector<SweepRow> out;
    for (auto& rows : per_flag) {
        std::vector<double> lambdas;
        for (const auto& r : rows) lambdas.push_back(r.lambda);
        const Trend trend = classify_trend(lambdas, threshold);
        for (auto& r : rows) {
            r.trend = trend;
            out.push_back(std::move(r));
        }
    }
    return out;
}

} // namespace

SweepReport alpha_sweep(const SweepConfig& config, std::span<const double> alphas) {
    SweepReport report;
    report.axis = SweepAxis::Alpha;
    report.seed = config.solver.seed;

    std::vector<double> sorted(alphas.begin(), alphas.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (double a : sorted)
        if (!(a > 1.0)) throw DomainError(fmt::format("sweep alpha must exceed 1, got {}", a));

    // Cells only read their inputs, so alphas run as independent jobs; the
    // report is assembled in alpha order afterwards.
    const std::size_t width = static_cast<std::size_t>(std::max(1, config.threads));
    std::vector<std::vector<SweepRow>> blocks(sorted.size());
    for (std::size_t first = 0; first < sorted.size(); first += width) {
        const std::size_t last = std::min(sorted.size(), first + width);
        std::vector<std::future<std::vector<SweepRow>>> jobs;
        for (std::size_t i = first; i < last; ++i)
            jobs.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred, sweep_alpha,
                                      std::cref(config), sorted[i], report.trend_threshold));
        for (std::size_t i = first; i < last; ++i) blocks[i] = jobs[i - first].get();
    }
    for (auto& block : blocks)
        for (auto& row : block) report.rows.push_back(std::move(row));
    return report;
}

} // namespace steklov
