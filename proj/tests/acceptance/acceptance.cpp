// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "steklov/analysis.hpp"
#include "steklov/cli.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace steklov;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
    }
};

// Every converged eigenpair seen anywhere in the run, for the weak-form check.
struct Pair {
    std::string label;
    double residual;
};
std::vector<Pair> g_pairs;

void record(const std::string& label, const EigenResult& r) {
    if (r.converged) g_pairs.push_back({label, r.weakform_residual});
}

MeshParams disk_params() {
    MeshParams mp;
    mp.n_arc = 64;
    mp.target_h = 0.2;
    return mp;
}

Vector random_field(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Vector u(n);
    for (double& x : u) x = d(rng);
    return u;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome disk_oracle() {
    Outcome o;
    Mesh m = build_mesh(DomainSpec::disk(), disk_params());
    std::vector<double> lam;
    EigenResult last;
    for (int level = 0; level <= 3; ++level) {
        last = solve_p2(m, false);
        record(fmt::format("disk level {}", level), last);
        lam.push_back(last.lambda);
        o.notes.push_back(fmt::format("     level {} V={} lambda={:.12f}", level, m.vertex_count(), last.lambda));
        if (level < 3) m = refine_uniform(m);
    }
    // Richardson with the observed rate from the three finest levels
    const double d1 = lam[2] - lam[1], d2 = lam[3] - lam[2];
    const double ratio = d1 / d2;
    const double extrapolated = lam[3] + (lam[3] - lam[2]) / (ratio - 1.0);
    o.require(std::abs(extrapolated - 1.0) < 0.01,
              fmt::format("extrapolated lambda {:.10f} (observed rate {:.3f}), |lambda - 1| < 0.01", extrapolated, ratio));
    const auto& s = last.spectrum;
    o.require(rel(s[1], s[0]) < 0.01, fmt::format("lambda_1 pair {:.8f} / {:.8f} within 1%", s[0], s[1]));
    o.require(rel(s[3], s[2]) < 0.01, fmt::format("lambda_2 pair {:.8f} / {:.8f} within 1%", s[2], s[3]));
    return o;
}

Outcome dual_path() {
    Outcome o;
    const Mesh m = build_refined_mesh(DomainSpec::cusp(1.5), MeshParams{}, 2);
    ProblemConfig cfg;
    const EigenResult direct = solve_p2(m, true);
    record("cusp 1.5 direct", direct);
    const EigenResult descent = solve_p(m, cfg, SolverOptions{});
    record("cusp 1.5 solve_p", descent);
    o.require(rel(descent.lambda, direct.lambda) <= 1e-3,
              fmt::format("solve_p {:.12f} vs solve_p2 {:.12f}: rel {:.2e} <= 1e-3", descent.lambda, direct.lambda,
                          rel(descent.lambda, direct.lambda)));
    // a descent that never sees the direct eigenvector
    std::mt19937_64 rng(2);
    const EigenResult cold = minimize_quotient(m, cfg, SolverOptions{}, Denominator::Boundary,
                                               random_field(m.vertex_count(), rng));
    record("cusp 1.5 cold descent", cold);
    o.require(rel(cold.lambda, direct.lambda) <= 1e-3,
              fmt::format("descent from a random field {:.12f}: rel {:.2e} <= 1e-3", cold.lambda,
                          rel(cold.lambda, direct.lambda)));
    return o;
}

Outcome gradients() {
    Outcome o;
    const Mesh m = build_mesh(DomainSpec::cusp(1.5), MeshParams{});
    std::mt19937_64 rng(3);
    const double eps = 1e-8, delta = 1e-6;
    for (double p : {1.5, 2.0, 3.0}) {
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            Vector u = random_field(m.vertex_count(), rng);
            const Vector g = energy_gradient(m, p, eps, u);
            double gmax = 0.0, err = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double keep = u[i];
                u[i] = keep + delta;
                const double ep = energy(m, p, eps, u);
                u[i] = keep - delta;
                const double em = energy(m, p, eps, u);
                u[i] = keep;
                gmax = std::max(gmax, std::abs(g[i]));
                err = std::max(err, std::abs((ep - em) / (2 * delta) - g[i]));
            }
            worst = std::max(worst, err / gmax);
        }
        o.require(worst <= 1e-5, fmt::format("p={} worst relative error over 20 fields {:.2e} <= 1e-5", p, worst));
    }
    return o;
}

Outcome invariants() {
    Outcome o;
    std::mt19937_64 rng(4);
    double worst_scale = 0.0, worst_shift = 0.0, worst_constraint = 0.0;
    bool monotone = true, positive = true;
    int runs = 0;
    for (double alpha : {1.5, 2.5}) {
        const Mesh m = build_refined_mesh(DomainSpec::cusp(alpha), MeshParams{}, 1);
        const BoundaryQuadrature q = BoundaryQuadrature::build(m, true);
        for (double p : {1.5, 2.0, 3.0}) {
            ProblemConfig cfg;
            cfg.p = p;
            const Vector u = random_field(m.vertex_count(), rng);
            const double base = rayleigh(m, cfg, u);
            for (double c : {-1.0, 1e-4, 3.0, 1e5}) {
                Vector v = u;
                for (double& x : v) x *= c;
                worst_scale = std::max(worst_scale, rel(rayleigh(m, cfg, v), base));
            }
            for (int k = 0; k < 5; ++k) {
                const Vector w = random_field(m.vertex_count(), rng);
                worst_shift = std::max(worst_shift, std::abs(shift_root(q, p, w, ShiftMethod::Bisection) -
                                                             shift_root(q, p, w, ShiftMethod::Newton)));
            }

            SolverOptions opts;
            opts.restarts = 1;
            std::vector<EigenResult> results{solve_p(m, cfg, opts),
                                             minimize_quotient(m, cfg, opts, Denominator::Boundary, u)};
            const double measure = boundary_measure(m, cfg);
            for (const auto& r : results) {
                ++runs;
                record(fmt::format("alpha {} p {}", alpha, p), r);
                for (std::size_t i = 1; i < r.energy_history.size(); ++i)
                    monotone = monotone && r.energy_history[i] <= r.energy_history[i - 1];
                worst_constraint = std::max(worst_constraint, r.max_constraint_residual / measure);
                if (r.converged) positive = positive && r.lambda > 0.0;
            }
        }
    }
    o.require(worst_scale <= 1e-12, fmt::format("Rayleigh scale invariance, worst rel {:.2e} <= 1e-12", worst_scale));
    o.require(monotone, fmt::format("objective history non-increasing in all {} runs", runs));
    o.require(worst_constraint <= 1e-8,
              fmt::format("constraint residual at accepted iterates, worst {:.2e} * measure <= 1e-8", worst_constraint));
    o.require(worst_shift <= 1e-10, fmt::format("bisection vs Newton shift, worst {:.2e} <= 1e-10", worst_shift));
    o.require(positive, "lambda > 0 on every converged run");
    return o;
}

Outcome fp_constants() {
    Outcome o;
    {
        Mesh m = triangulate(make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), 0.1, 1.0);
        for (int l = 0; l < 3; ++l) m = refine_uniform(m);
        const FpResult r = fp_pencil(m, false, FpConstraint::ZeroMean);
        const double target = 1.0 / std::numbers::pi;
        o.require(r.converged && rel(r.constant, target) < 0.01,
                  fmt::format("unit square zero-mean C {:.8f} vs 1/pi {:.8f}: rel {:.2e} < 1%", r.constant, target,
                              rel(r.constant, target)));
    }
    for (double alpha : {1.5, 2.5}) {
        for (double p : {1.5, 2.0, 3.0}) {
            ProblemConfig cfg;
            cfg.p = p;
            Mesh m = build_mesh(DomainSpec::cusp(alpha), MeshParams{});
            std::vector<double> c;
            bool converged = true;
            for (int level = 0; level <= 2; ++level) {
                const FpResult r = fp_constant(m, cfg);
                converged = converged && r.converged;
                c.push_back(r.constant);
                if (level < 2) m = refine_uniform(m);
            }
            const double change = rel(c[2], c[1]);
            o.require(converged && change <= 0.10,
                      fmt::format("alpha={} p={}: C_h {:.6f} {:.6f} {:.6f}, finest change {:.2e} <= 10%", alpha, p, c[0],
                                  c[1], c[2], change));
        }
    }
    return o;
}

Outcome threshold() {
    Outcome o;
    ProblemConfig cfg;
    {
        cfg.weighted = false;
        Mesh m = build_mesh(DomainSpec::cusp(2.5), MeshParams{});
        std::vector<double> lam;
        for (int level = 0; level <= 3; ++level) {
            const EigenResult r = solve_p(m, cfg, SolverOptions{});
            record(fmt::format("alpha 2.5 unweighted level {}", level), r);
            lam.push_back(r.lambda);
            if (level < 3) m = refine_uniform(m);
        }
        bool decreasing = true;
        for (std::size_t i = 1; i < lam.size(); ++i) decreasing = decreasing && lam[i] < lam[i - 1];
        o.require(decreasing, fmt::format("alpha=2.5 unweighted lambda {:.5f} {:.5f} {:.5f} {:.5f} strictly decreasing",
                                          lam[0], lam[1], lam[2], lam[3]));
        o.require(classify_trend(lam) == Trend::DecayingToZero, "classified decaying-to-zero");
    }
    cfg.weighted = true;
    for (double alpha : {1.25, 1.5, 1.75, 2.5}) {
        Mesh m = build_mesh(DomainSpec::cusp(alpha), MeshParams{});
        std::vector<double> lam;
        for (int level = 0; level <= 3; ++level) {
            const EigenResult r = solve_p(m, cfg, SolverOptions{});
            record(fmt::format("alpha {} weighted level {}", alpha, level), r);
            lam.push_back(r.lambda);
            if (level < 3) m = refine_uniform(m);
        }
        const double change = rel(lam[3], lam[2]);
        o.require(change <= 0.05, fmt::format("alpha={} weighted lambda {:.6f} {:.6f} {:.6f} {:.6f}, finest change {:.2e} <= 5%",
                                              alpha, lam[0], lam[1], lam[2], lam[3], change));
    }
    return o;
}

Outcome weak_form() {
    Outcome o;
    double worst = 0.0;
    std::string where;
    for (const auto& p : g_pairs)
        if (p.residual > worst) {
            worst = p.residual;
            where = p.label;
        }
    for (const auto& p : g_pairs)
        if (!(p.residual <= 1e-6)) o.require(false, fmt::format("{}: residual {:.2e}", p.label, p.residual));
    o.require(!g_pairs.empty() && worst <= 1e-6,
              fmt::format("{} converged eigenpairs, worst residual {:.2e} ({}) <= 1e-6", g_pairs.size(), worst, where));
    return o;
}

Outcome determinism() {
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / "steklov_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "solve.ini";
    std::ofstream(cfg) << "[geometry]\nalpha = 1.5\n[mesh]\nrefinements = 1\n[problem]\np = 1.5\n[solver]\nrestarts = 2\n";
    auto run = [&](const std::string& name) {
        CliRequest req;
        req.command = "solve";
        req.config = cfg;
        req.seed = 11;
        req.out = dir / name;
        std::ostringstream out, err;
        const int code = run_command(req, out, err);
        std::ifstream in(dir / name / "solve.csv", std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return std::make_pair(code, ss.str());
    };
    const auto a = run("first"), b = run("second");
    o.require(a.first == 0 && b.first == 0, fmt::format("exit codes {} and {}", a.first, b.first));
    o.require(!a.second.empty() && a.second == b.second,
              fmt::format("solve.csv byte-identical ({} bytes, fnv1a64 {:016x})", a.second.size(), fnv1a64(a.second)));
    return o;
}

struct Criterion {
    int id;
    const char* title;
    double budget_s;  // <= 0: none
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "disk oracle, p=2 unweighted", 60, disk_oracle},
        {2, "dual-path agreement at p=2, cusp alpha=1.5 weighted", 120, dual_path},
        {3, "energy gradient vs central differences", 30, gradients},
        {4, "invariant suite", 0, invariants},
        {5, "Friedrichs-Poincare constants", 600, fp_constants},
        {6, "threshold experiment at p=2", 900, threshold},
        {7, "weak-form residual of converged eigenpairs", 0, weak_form},
        {8, "determinism of the solve command", 0, determinism},
    };
    // 7 reads the eigenpairs gathered by the others, so it runs last.
    std::vector<std::size_t> order{0, 1, 2, 3, 4, 5, 7, 6};
    std::vector<std::string> lines(criteria.size());
    int failed = 0;
    for (std::size_t idx : order) {
        const Criterion& c = criteria[idx];
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.require(false, fmt::format("threw: {}", e.what()));
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        if (c.budget_s > 0) o.require(secs < c.budget_s, fmt::format("runtime {:.1f} s < {:.0f} s", secs, c.budget_s));
        for (const auto& n : o.notes) fmt::print("    [{}] {}\n", c.id, n);
        lines[idx] = fmt::format("{} [{}] {} ({:.1f} s)", o.pass ? "PASS" : "FAIL", c.id, c.title, secs);
        fmt::print("{}\n", lines[idx]);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    fmt::print("\nsummary\n");
    for (const auto& l : lines) fmt::print("{}\n", l);
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
