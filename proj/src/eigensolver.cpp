#include "steklov/eigensolver.hpp"

#include "steklov/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace steklov {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double abs_pow_m2(double x, double p) {
    if (x == 0.0) return p == 2.0 ? 1.0 : 0.0;
    return std::pow(std::abs(x), p - 2.0);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double sum(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

// Residual of grad_e / p - lambda grad_n / p after removing the multiplier
// direction grad_c, relative to the size of the two terms.
double projected_residual(std::span<const double> grad_e, std::span<const double> grad_n,
                          std::span<const double> grad_c, double lambda, double p) {
    Vector r(grad_e.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = (grad_e[i] - lambda * grad_n[i]) / p;
    const double cc = dot(grad_c, grad_c);
    if (cc > 0.0) axpy(-dot(r, grad_c) / cc, grad_c, r);
    const double scale = (norm2(grad_e) + std::abs(lambda) * norm2(grad_n)) / p;
    return scale > 0.0 ? norm2(r) / scale : norm2(r);
}

double pow_diff_base(double x, double e) { return e == 1.0 ? x : std::pow(x, e); }

// (x + dx)^e - x^e for x >= 0, x + dx >= 0, accurate when |dx| << x.
double pow_change(double x, double dx, double e) {
    if (x == 0.0) return std::pow(std::max(dx, 0.0), e);
    const double r = std::max(dx / x, -1.0);
    return std::pow(x, e) * std::expm1(e * std::log1p(r));
}

// Data shared by every start of one problem.
struct Context {
    const Mesh& mesh;
    ProblemConfig cfg;
    BoundaryQuadrature quad;
    Denominator denominator;
    EnvelopeCholesky precond;

    Context(const Mesh& m, const ProblemConfig& c, Denominator d)
        : mesh(m), cfg(c), quad(BoundaryQuadrature::build(m, c.weighted, c.quadrature_order)), denominator(d),
          precond(preconditioner(m)) {}

    static SparseSym preconditioner(const Mesh& m) {
        const P2Matrices mats = assemble_p2(m, false);
        return mats.K.plus(mats.M);
    }

    // Stiffness with the frozen p-Laplacian coefficient of u, normalized by
    // its area mean, plus mass. Equals K + M at p = 2.
    SparseSym adapted_preconditioner(std::span<const double> u, double eps) const {
        const double p = cfg.p;
        std::vector<double> s(mesh.triangle_count());
        double mean = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            const auto& t = mesh.triangles[k];
            const auto& geo = mesh.geometry[k];
            const Point g = u[t[0]] * geo.grad[0] + u[t[1]] * geo.grad[1] + u[t[2]] * geo.grad[2];
            s[k] = dot(g, g) + eps * eps;
            mean += geo.area * s[k];
        }
        mean /= mesh.area();
        const double floor = 1e-12 * mean;
        std::vector<Triplet> entries;
        entries.reserve(12 * s.size());
        for (std::size_t k = 0; k < s.size(); ++k) {
            const auto& t = mesh.triangles[k];
            const auto& geo = mesh.geometry[k];
            const double c = std::pow(std::max(s[k], floor) / mean, 0.5 * (p - 2.0)) * std::max(1.0, p - 1.0);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j <= i; ++j) {
                    const auto r = static_cast<std::size_t>(t[i]), col = static_cast<std::size_t>(t[j]);
                    entries.push_back({r, col, geo.area * (c * dot(geo.grad[i], geo.grad[j]) + (i == j ? 2.0 : 1.0) / 12.0)});
                }
        }
        return SparseSym::from_triplets(mesh.vertex_count(), entries);
    }

    double denom(std::span<const double> u) const {
        return denominator == Denominator::Boundary ? boundary_pnorm(quad, cfg.p, u) : volume_pnorm(mesh, cfg.p, u);
    }
    Vector denom_gradient(std::span<const double> u) const {
        return denominator == Denominator::Boundary ? boundary_pnorm_gradient(mesh, quad, cfg.p, u)
                                                    : volume_pnorm_gradient(mesh, cfg.p, u);
    }

    std::optional<double> shift(std::span<const double> v) const {
        try {
            return shift_root(quad, cfg.p, v);
        } catch (const DomainError&) {
            return std::nullopt;
        }
    }

    std::optional<Vector> shifted(std::span<const double> v) const {
        const auto c = shift(v);
        if (!c) return std::nullopt;
        Vector w(v.begin(), v.end());
        for (double& x : w) x -= *c;
        return w;
    }

    bool normalize(Vector& w) const {
        const double n = denom(w);
        if (!(n > 0.0) || !std::isfinite(n)) return false;
        const double s = std::pow(n, -1.0 / cfg.p);
        for (double& x : w) x *= s;
        return true;
    }

    // Shift onto the constraint set and scale to unit denominator.
    std::optional<Vector> retract(std::span<const double> v) const {
        auto w = shifted(v);
        if (!w || !normalize(*w)) return std::nullopt;
        return w;
    }

    // R(w) - R(u) for R = energy(eps = 0) / denom, summed from per-element
    // and per-point differences so that changes far below the size of R
    // survive rounding.
    double quotient_change(std::span<const double> u, std::span<const double> delta) const {
        const double p = cfg.p;

        double e = 0.0, de = 0.0;
        for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
            const auto& t = mesh.triangles[k];
            const auto& geo = mesh.geometry[k];
            const Point g = u[t[0]] * geo.grad[0] + u[t[1]] * geo.grad[1] + u[t[2]] * geo.grad[2];
            const Point dg = delta[t[0]] * geo.grad[0] + delta[t[1]] * geo.grad[1] + delta[t[2]] * geo.grad[2];
            const double sq = dot(g, g);
            const double dsq = dot(dg, 2.0 * g + dg);
            e += geo.area * pow_diff_base(sq, p / 2.0);
            de += geo.area * pow_change(sq, dsq, p / 2.0);
        }

        double n = 0.0, dn = 0.0;
        auto point = [&](double coeff, double v, double dv) {
            const double a = std::abs(v);
            n += coeff * pow_diff_base(a, p);
            if (v != 0.0 && std::abs(dv) < a) {
                dn += coeff * pow_change(a, std::copysign(1.0, v) * dv, p);
            } else {
                dn += coeff * (std::pow(std::abs(v + dv), p) - std::pow(a, p));
            }
        };
        if (denominator == Denominator::Boundary) {
            for (const auto& node : quad.nodes) point(node.coeff, quad.value(node, u), quad.value(node, delta));
        } else {
            for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
                const auto& t = mesh.triangles[k];
                const double area = mesh.geometry[k].area;
                for (const auto& qp : triangle_rule()) {
                    const double v = qp.l0 * u[t[0]] + qp.l1 * u[t[1]] + qp.l2 * u[t[2]];
                    const double dv = qp.l0 * delta[t[0]] + qp.l1 * delta[t[1]] + qp.l2 * delta[t[2]];
                    point(area * qp.w, v, dv);
                }
            }
        }
        return (de * n - e * dn) / (n * (n + dn));
    }

    double constraint_residual(std::span<const double> u) const {
        return std::abs(constraint_functional(quad, cfg.p, u));
    }

    // Gradient of v -> energy(retract(v)) at a retracted point, and the
    // relative stationarity residual.
    Vector manifold_gradient(std::span<const double> u, double eps, double& residual) const {
        const Vector ge = energy_gradient(mesh, cfg.p, eps, u);
        const Vector gn = denom_gradient(u);
        const Vector gc = constraint_gradient(mesh, quad, cfg.p, u);
        const double lambda = dot(u, ge) / cfg.p;
        Vector g = ge;
        axpy(-lambda, gn, g);
        const double gc1 = sum(gc);
        if (gc1 > 0.0) axpy(-sum(g) / gc1, gc, g);
        residual = projected_residual(ge, gn, gc, lambda, cfg.p);
        return g;
    }
};

EigenResult run_descent(const Context& ctx, const SolverOptions& opt, std::span<const double> initial) {
    const double p = ctx.cfg.p;
    EigenResult result;
    auto start = ctx.retract(initial);
    if (!start) throw DomainError("initial field has no admissible shift");
    Vector u = std::move(*start);

    std::vector<double> schedule{ctx.cfg.eps_reg};
    if (p < 2.0 && !opt.eps_schedule.empty()) {
        schedule = opt.eps_schedule;
        if (schedule.back() != 0.0) schedule.push_back(0.0);
    }

    int total = 0;
    bool cap_hit = false;
    bool stagnated = false;
    result.max_constraint_residual = ctx.constraint_residual(u);
    for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
        const double eps = schedule[stage];
        const bool exact = eps == 0.0;
        const bool last = stage + 1 == schedule.size();
        // In the exact stage f is carried forward by the measured changes.
        double f = exact ? energy(ctx.mesh, p, 0.0, u) / ctx.denom(u) : energy(ctx.mesh, p, eps, u);
        result.energy_history.push_back(f);
        const std::size_t stage_begin = result.energy_history.size() - 1;

        double residual = 0.0;
        Vector g = ctx.manifold_gradient(u, eps, residual);
        std::optional<EnvelopeCholesky> adapted;
        auto precond = [&](const Vector& v) { return adapted ? adapted->solve(v) : ctx.precond.solve(v); };
        int since_refresh = 0;
        if (opt.adapt_every > 0 && p != 2.0) adapted.emplace(ctx.adapted_preconditioner(u, eps));
        Vector z = precond(g);
        Vector d(u.size(), 0.0), g_prev, z_prev;
        bool have_prev = false;
        double tau = 1.0;
        double best_residual = residual;
        int best_at = total;

        while (residual > opt.residual_target) {
            if (total >= opt.max_iterations) {
                cap_hit = true;
                break;
            }
            double beta = 0.0;
            if (opt.conjugate && have_prev) {
                double num = 0.0;
                for (std::size_t i = 0; i < z.size(); ++i) num += z[i] * (g[i] - g_prev[i]);
                beta = std::max(0.0, num / dot(z_prev, g_prev));
            }
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = -z[i] + beta * d[i];
            double slope = dot(g, d);
            if (!(slope < 0.0)) {
                for (std::size_t i = 0; i < d.size(); ++i) d[i] = -z[i];
                slope = dot(g, d);
                beta = 0.0;
            }
            if (!(slope < 0.0)) break;  // gradient vanished to rounding

            // Backtracking on the retracted objective, then one step of
            // quadratic interpolation. In the exact stage the decrease is
            // measured directly rather than as a difference of two totals.
            auto evaluate = [&](double step) -> std::optional<std::pair<Vector, double>> {
                Vector trial(u.size());
                for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + step * d[i];
                const auto c = ctx.shift(trial);
                if (!c) return std::nullopt;
                auto w = std::make_optional<Vector>(trial);
                for (double& x : *w) x -= *c;
                double change;
                if (exact) {
                    // Form the increment without cancellation against u.
                    Vector delta(u.size());
                    for (std::size_t i = 0; i < u.size(); ++i) delta[i] = step * d[i] - *c;
                    change = ctx.quotient_change(u, delta);
                    if (!ctx.normalize(*w)) return std::nullopt;
                } else {
                    if (!ctx.normalize(*w)) return std::nullopt;
                    change = energy(ctx.mesh, p, eps, *w) - f;
                }
                if (!std::isfinite(change)) return std::nullopt;
                return std::make_pair(std::move(*w), change);
            };
            double t = std::min(1e12, 2.0 * tau);
            bool accepted = false;
            double change = 0.0;
            for (int k = 0; k < 80; ++k, t *= 0.5) {
                auto trial = evaluate(t);
                if (!trial || !(trial->second <= opt.armijo * t * slope)) continue;
                change = trial->second;
                const double curvature = 2.0 * (change - slope * t) / (t * t);
                if (curvature > 0.0) {
                    const double tq = -slope / curvature;
                    if (std::abs(tq - t) > 0.05 * t) {
                        auto refined = evaluate(tq);
                        if (refined && refined->second < change && refined->second <= opt.armijo * tq * slope) {
                            trial = std::move(refined);
                            change = trial->second;
                            t = tq;
                        }
                    }
                }
                u = std::move(trial->first);
                accepted = true;
                break;
            }
            if (!accepted) {
                if (beta != 0.0) {
                    have_prev = false;  // retry along the plain preconditioned gradient
                    continue;
                }
                if (!last || residual <= opt.accept_residual) break;  // rounding floor
                throw SolverError(fmt::format("line search failed at a non-stationary point "
                                              "(relative residual {:.3e})",
                                              residual),
                                  residual);
            }
            tau = t;
            ++total;
            f += change;
            result.energy_history.push_back(f);
            result.max_constraint_residual = std::max(result.max_constraint_residual, ctx.constraint_residual(u));

            g_prev = std::move(g);
            z_prev = std::move(z);
            have_prev = true;
            g = ctx.manifold_gradient(u, eps, residual);
            if (adapted && ++since_refresh >= opt.adapt_every) {
                adapted.emplace(ctx.adapted_preconditioner(u, eps));
                since_refresh = 0;
                have_prev = false;  // the metric changed under the conjugate recurrence
            }
            z = precond(g);
            if (residual < 0.5 * best_residual) {
                best_residual = residual;
                best_at = total;
            }

            // Stall test; the final stage must also meet the residual bound.
            const std::size_t n = result.energy_history.size();
            const auto w = static_cast<std::size_t>(opt.stall_window);
            if (n - stage_begin > w) {
                const double old = result.energy_history[n - 1 - w];
                if (old - f <= opt.stall_tolerance * std::abs(f)) {
                    if (!last || residual <= opt.accept_residual) break;
                    // Residual stuck above the bound at a rounding floor
                    // (slivers at steep cusps); give up unconverged.
                    if (opt.residual_patience > 0 && total - best_at >= opt.residual_patience) {
                        stagnated = true;
                        break;
                    }
                }
            }
        }
        if (cap_hit || stagnated) break;
    }

    result.lambda = energy(ctx.mesh, p, 0.0, u) / ctx.denom(u);
    const Vector ge = energy_gradient(ctx.mesh, p, 0.0, u);
    const Vector gn = ctx.denom_gradient(u);
    const Vector gc = constraint_gradient(ctx.mesh, ctx.quad, p, u);
    result.weakform_residual = projected_residual(ge, gn, gc, result.lambda, p);
    result.constraint_residual = ctx.constraint_residual(u);
    result.iterations = total;
    result.converged = !cap_hit && !stagnated;
    result.u = std::move(u);
    if (!(result.lambda > 0.0)) {
        throw SolverError(fmt::format("quotient minimum is not positive ({})", result.lambda));
    }
    return result;
}
} // namespace

double rayleigh(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u) {
    const double n = boundary_pnorm(mesh, cfg, u);
    if (!(n > 0.0)) throw DomainError("Rayleigh quotient is infinite: the boundary norm vanishes");
    return energy(mesh, cfg.p, 0.0, u) / n;
}

double shift_root(const BoundaryQuadrature& q, double p, std::span<const double> u, ShiftMethod method,
                  int* iterations) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& n : q.nodes) {
        if (!(n.coeff > 0.0)) continue;
        const double v = q.value(n, u);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;
    if (!(span > 64.0 * kEps * std::max(std::abs(lo), std::abs(hi))))
        throw DomainError("no admissible shift: the boundary trace is constant");

    const double tol = 1e-13 * q.measure * std::pow(span, p - 1.0);
    auto F = [&](double c) { return constraint_functional(q, p, u, c); };
    auto dF = [&](double c) {
        double s = 0.0;
        for (const auto& n : q.nodes) s += n.coeff * abs_pow_m2(q.value(n, u) - c, p);
        return -(p - 1.0) * s;
    };
    // F(lo) >= 0 >= F(hi), F strictly decreasing.
    double a = lo, b = hi;
    int it = 0;
    double c = 0.5 * (a + b);
    const int bisections = method == ShiftMethod::Bisection ? 200 : 4;
    for (; it < bisections; ++it) {
        c = 0.5 * (a + b);
        if (c <= a || c >= b) break;
        const double fc = F(c);
        if (fc == 0.0) break;
        if (fc > 0.0) {
            a = c;
        } else {
            b = c;
        }
        if (method == ShiftMethod::Newton) continue;
        if (b - a <= 2.0 * kEps * std::max(std::abs(a), std::abs(b))) break;
    }
    if (method == ShiftMethod::Bisection) {
        c = 0.5 * (a + b);
        if (iterations) *iterations = it;
        return c;
    }

    // Near a nodal trace value F' blows up for p < 2 and Newton creeps; a
    // step that does not halve |F| is followed by a bisection.
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 200; ++k, ++it) {
        const double fc = F(c);
        if (fc == 0.0) break;
        if (fc > 0.0) {
            a = c;
        } else {
            b = c;
        }
        const double d = dF(c);
        const bool slow = std::abs(fc) > 0.5 * prev;
        prev = std::abs(fc);
        double next = (d < 0.0 && !slow) ? c - fc / d : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        const double step = std::abs(next - c);
        c = next;
        if (std::abs(fc) <= tol && step <= 4.0 * kEps * (std::abs(c) + span)) break;
        if (step <= 2.0 * kEps * std::max(std::abs(a), std::abs(b))) break;
    }
    if (iterations) *iterations = it;
    return c;
}

DiscreteField orthogonalize_shift(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u) {
    check_field(mesh, u);
    const BoundaryQuadrature q = BoundaryQuadrature::build(mesh, cfg.weighted, cfg.quadrature_order);
    const double c = shift_root(q, cfg.p, u);
    DiscreteField out(u.begin(), u.end());
    for (double& v : out) v -= c;
    return out;
}

double weakform_residual(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u, double lambda) {
    check_field(mesh, u);
    const BoundaryQuadrature q = BoundaryQuadrature::build(mesh, cfg.weighted, cfg.quadrature_order);
    const Vector ge = energy_gradient(mesh, cfg.p, cfg.eps_reg, u);
    const Vector gn = boundary_pnorm_gradient(mesh, q, cfg.p, u);
    const Vector gc = constraint_gradient(mesh, q, cfg.p, u);
    return projected_residual(ge, gn, gc, lambda, cfg.p);
}

EigenResult solve_p2(const Mesh& mesh, bool weighted, std::size_t spectrum_count) {
    const P2Matrices mats = assemble_p2(mesh, weighted);
    std::vector<std::size_t> boundary;
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
        if (mesh.is_boundary_vertex[v]) boundary.push_back(v);
    const SchurReduction schur(mats.K, boundary);
    const DenseMatrix bb = schur.restrict(mats.B);
    const std::size_t nb = boundary.size();
    if (nb < 3) throw MeshError("too few boundary vertices");

    // B x = theta (S + B) x; theta = 1 / (1 + lambda). Working with the
    // bounded pencil keeps the tiny weights near the tip harmless.
    DenseMatrix shifted = schur.complement();
    DenseMatrix neg_b = bb;
    for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            shifted(i, j) += bb(i, j);
            neg_b(i, j) = -bb(i, j);
        }
    const std::size_t k = std::min(nb, spectrum_count + 1);
    const EigenPairs pairs = generalized_eig_sym(neg_b, shifted, k);
    const double theta0 = -pairs.values[0];
    if (std::abs(theta0 - 1.0) > 1e-8)
        throw SolverError(fmt::format("constant mode not recovered (theta {:.12f})", theta0));

    EigenResult result;
    for (std::size_t j = 1; j < k; ++j) result.spectrum.push_back(1.0 / -pairs.values[j] - 1.0);

    Vector ub = pairs.vectors.column(1);
    const double nrm = std::sqrt(dot(ub, bb * ub));
    std::size_t imax = 0;
    for (std::size_t i = 0; i < nb; ++i)
        if (std::abs(ub[i]) > std::abs(ub[imax]) + 1e-12 * std::abs(ub[imax])) imax = i;
    const double sign = ub[imax] < 0.0 ? -1.0 : 1.0;
    for (double& x : ub) x *= sign / nrm;
    result.u = schur.extend(ub);

    ProblemConfig cfg;
    cfg.p = 2.0;
    cfg.weighted = weighted;
    result.lambda = rayleigh(mesh, cfg, result.u);
    result.energy_history = {result.lambda};
    result.weakform_residual = weakform_residual(mesh, cfg, result.u, result.lambda);
    result.constraint_residual = std::abs(constraint_functional(mesh, cfg, result.u));
    result.max_constraint_residual = result.constraint_residual;
    result.converged = result.weakform_residual <= SolverOptions{}.accept_residual;
    result.restart_lambdas = {result.lambda};
    if (!(result.lambda > 0.0)) throw SolverError("first nontrivial eigenvalue is not positive");
    return result;
}

EigenResult minimize_quotient(const Mesh& mesh, const ProblemConfig& cfg, const SolverOptions& options,
                              Denominator denominator, std::span<const double> initial) {
    cfg.validate();
    check_field(mesh, initial);
    const Context ctx(mesh, cfg, denominator);
    return run_descent(ctx, options, initial);
}

namespace {

Vector random_start(const Context& ctx, const SparseSym& mass, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector r(ctx.mesh.vertex_count());
    for (double& x : r) x = normal(rng);
    // One smoothing solve turns nodal noise into an H1-sized field.
    return ctx.precond.solve(mass * r);
}

} // namespace

EigenResult solve_p(const Mesh& mesh, const ProblemConfig& cfg, const SolverOptions& options) {
    cfg.validate();
    const Context ctx(mesh, cfg, Denominator::Boundary);

    Vector initial;
    if (mesh.domain && mesh.domain->kind == DomainKind::DiskValidation) {
        initial.resize(mesh.vertex_count());
        for (std::size_t v = 0; v < initial.size(); ++v) initial[v] = mesh.vertices[v].x;
    } else {
        initial = solve_p2(mesh, cfg.weighted, 1).u;
    }
    EigenResult best = run_descent(ctx, options, initial);
    std::vector<double> lambdas{best.lambda};

    if (options.restarts > 0) {
        const SparseSym mass = assemble_p2(mesh, false).M;
        std::mt19937_64 rng(options.seed);
        for (int r = 0; r < options.restarts; ++r) {
            const Vector start = random_start(ctx, mass, rng);
            try {
                EigenResult trial = run_descent(ctx, options, start);
                lambdas.push_back(trial.lambda);
                if (trial.lambda < best.lambda) best = std::move(trial);
            } catch (const Error&) {
                lambdas.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
    }
    best.restarts = options.restarts;
    best.restart_lambdas = std::move(lambdas);
    return best;
}

} // namespace steklov
