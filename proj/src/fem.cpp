#include "steklov/fem.hpp"

#include "steklov/errors.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>

namespace steklov {
namespace {

// |x|^(p-2) x, taken as 0 at x = 0 for every p > 1.
double signed_pow(double x, double p) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(x), p - 1.0), x);
}

double abs_pow_m2(double x, double p) {
    if (x == 0.0) return p == 2.0 ? 1.0 : 0.0;  // infinite for p < 2; dropped
    return std::pow(std::abs(x), p - 2.0);
}

// Six-point degree-4 rule on the reference triangle (weights sum to 1).
constexpr double kA1 = 0.445948490915964886, kB1 = 0.108103018168070227, kW1 = 0.223381589678011065;
constexpr double kA2 = 0.091576213509770743, kB2 = 0.816847572980458514, kW2 = 0.109951743655321599;
constexpr std::array<TriPoint, 6> kTriRule{{
    {kA1, kA1, kB1, kW1},
    {kA1, kB1, kA1, kW1},
    {kB1, kA1, kA1, kW1},
    {kA2, kA2, kB2, kW2},
    {kA2, kB2, kA2, kW2},
    {kB2, kA2, kA2, kW2},
}};

Point triangle_gradient(const Mesh& mesh, std::size_t k, std::span<const double> u) {
    const auto& t = mesh.triangles[k];
    const auto& g = mesh.geometry[k].grad;
    return u[t[0]] * g[0] + u[t[1]] * g[1] + u[t[2]] * g[2];
}

} // namespace

std::span<const TriPoint> triangle_rule() { return kTriRule; }

void ProblemConfig::validate() const {
    if (!(p > 1.0) || !std::isfinite(p)) throw DomainError(fmt::format("p must be in (1, inf), got {}", p));
    if (!(eps_reg >= 0.0)) throw DomainError("eps_reg must be non-negative");
    if (quadrature_order < 1 || quadrature_order > 5) throw DomainError("quadrature_order must be in 1..5");
}

void gauss_legendre_unit(int order, std::vector<double>& points, std::vector<double>& weights) {
    std::vector<double> x, w;
    switch (order) {
    case 1: x = {0.0}; w = {2.0}; break;
    case 2: x = {-0.5773502691896257645, 0.5773502691896257645}; w = {1.0, 1.0}; break;
    case 3:
        x = {-0.7745966692414833770, 0.0, 0.7745966692414833770};
        w = {0.5555555555555555556, 0.8888888888888888889, 0.5555555555555555556};
        break;
    case 4:
        x = {-0.8611363115940525752, -0.3399810435848562648, 0.3399810435848562648, 0.8611363115940525752};
        w = {0.3478548451374538574, 0.6521451548625461427, 0.6521451548625461427, 0.3478548451374538574};
        break;
    case 5:
        x = {-0.9061798459386639928, -0.5384693101056830910, 0.0, 0.5384693101056830910, 0.9061798459386639928};
        w = {0.2369268850561890875, 0.4786286704993664680, 0.5688888888888888889, 0.4786286704993664680,
             0.2369268850561890875};
        break;
    default: throw DomainError(fmt::format("no Gauss rule with {} points", order));
    }
    points.resize(x.size());
    weights.resize(w.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        points[i] = 0.5 * (x[i] + 1.0);
        weights[i] = 0.5 * w[i];
    }
}

BoundaryQuadrature BoundaryQuadrature::build(const Mesh& mesh, bool weighted, int order) {
    std::vector<double> s, gw;
    gauss_legendre_unit(order, s, gw);
    BoundaryQuadrature q;
    q.nodes.reserve(mesh.boundary_edges.size() * s.size());
    for (const auto& e : mesh.boundary_edges) {
        const Point a = mesh.vertices[e.v[0]], b = mesh.vertices[e.v[1]];
        for (std::size_t i = 0; i < s.size(); ++i) {
            double w = 1.0;
            if (weighted && mesh.domain) {
                w = (order == 2) ? e.weight_samples[i] : weight_on_arc(*mesh.domain, e.tag, (1.0 - s[i]) * a + s[i] * b);
            }
            const double c = e.length * gw[i] * w;
            q.nodes.push_back({e.v[0], e.v[1], s[i], c});
            q.measure += c;
        }
    }
    return q;
}

void check_field(const Mesh& mesh, std::span<const double> u) {
    if (u.size() != mesh.vertex_count())
        throw DomainError(fmt::format("field has {} values for {} vertices", u.size(), mesh.vertex_count()));
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!std::isfinite(u[i])) throw DomainError(fmt::format("field value at vertex {} is not finite", i));
}

double energy(const Mesh& mesh, double p, double eps, std::span<const double> u) {
    check_field(mesh, u);
    double e = 0.0;
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        const Point g = triangle_gradient(mesh, k, u);
        const double s = dot(g, g) + eps * eps;
        e += mesh.geometry[k].area * (p == 2.0 ? s : std::pow(s, 0.5 * p));
    }
    return e;
}

double energy(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u) {
    return energy(mesh, cfg.p, cfg.eps_reg, u);
}

DiscreteField energy_gradient(const Mesh& mesh, double p, double eps, std::span<const double> u) {
    check_field(mesh, u);
    DiscreteField grad(u.size(), 0.0);
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        const auto& geo = mesh.geometry[k];
        const Point g = triangle_gradient(mesh, k, u);
        const double s = dot(g, g) + eps * eps;
        double factor;
        if (p == 2.0) {
            factor = 2.0;
        } else if (s == 0.0) {
            factor = 0.0;  // gradient vanishes, so does the contribution
        } else {
            factor = p * std::pow(s, 0.5 * (p - 2.0));
        }
        factor *= geo.area;
        for (int i = 0; i < 3; ++i) grad[mesh.triangles[k][i]] += factor * dot(g, geo.grad[i]);
    }
    return grad;
}

DiscreteField energy_gradient(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u) {
    return energy_gradient(mesh, cfg.p, cfg.eps_reg, u);
}

double boundary_pnorm(const BoundaryQuadrature& q, double p, std::span<const double> u) {
    double total = 0.0;
    for (const auto& n : q.nodes) {
        const double v = std::abs(q.value(n, u));
        total += n.coeff * (p == 2.0 ? v * v : std::pow(v, p));
    }
    return total;
}

double boundary_pnorm(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u) {
    check_field(mesh, u);
    return boundary_pnorm(BoundaryQuadrature::build(mesh, cfg.weighted, cfg.quadrature_order), cfg.p, u);
}

DiscreteField boundary_pnorm_gradient(const Mesh& mesh, const BoundaryQuadrature& q, double p,
                                      std::span<const double> u) {
    DiscreteField grad(mesh.vertex_count(), 0.0);
    for (const auto& n : q.nodes) {
        const double f = p * n.coeff * signed_pow(q.value(n, u), p);
        grad[n.a] += (1.0 - n.s) * f;
        grad[n.b] += n.s * f;
    }
    return grad;
}

double constraint_functional(const BoundaryQuadrature& q, double p, std::span<const double> u, double shift) {
    double total = 0.0;
    for (const auto& n : q.nodes) total += n.coeff * signed_pow(q.value(n, u) - shift, p);
    return total;
}

double constraint_functional(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u) {
    check_field(mesh, u);
    return constraint_functional(BoundaryQuadrature::build(mesh, cfg.weighted, cfg.quadrature_order), cfg.p, u);
}

DiscreteField constraint_gradient(const Mesh& mesh, const BoundaryQuadrature& q, double p,
                                  std::span<const double> u) {
    DiscreteField grad(mesh.vertex_count(), 0.0);
    for (const auto& n : q.nodes) {
        const double f = (p - 1.0) * n.coeff * abs_pow_m2(q.value(n, u), p);
        grad[n.a] += (1.0 - n.s) * f;
        grad[n.b] += n.s * f;
    }
    return grad;
}

double boundary_measure(const Mesh& mesh, const ProblemConfig& cfg) {
    return BoundaryQuadrature::build(mesh, cfg.weighted, cfg.quadrature_order).measure;
}

double volume_pnorm(const Mesh& mesh, double p, std::span<const double> u) {
    check_field(mesh, u);
    double total = 0.0;
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        const auto& t = mesh.triangles[k];
        double s = 0.0;
        for (const auto& qp : kTriRule) {
            const double v = std::abs(qp.l0 * u[t[0]] + qp.l1 * u[t[1]] + qp.l2 * u[t[2]]);
            s += qp.w * (p == 2.0 ? v * v : std::pow(v, p));
        }
        total += mesh.geometry[k].area * s;
    }
    return total;
}

DiscreteField volume_pnorm_gradient(const Mesh& mesh, double p, std::span<const double> u) {
    check_field(mesh, u);
    DiscreteField grad(u.size(), 0.0);
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        const auto& t = mesh.triangles[k];
        const double area = mesh.geometry[k].area;
        for (const auto& qp : kTriRule) {
            const double v = qp.l0 * u[t[0]] + qp.l1 * u[t[1]] + qp.l2 * u[t[2]];
            const double f = p * area * qp.w * signed_pow(v, p);
            grad[t[0]] += qp.l0 * f;
            grad[t[1]] += qp.l1 * f;
            grad[t[2]] += qp.l2 * f;
        }
    }
    return grad;
}

P2Matrices assemble_p2(const Mesh& mesh, bool weighted, int quadrature_order) {
    const std::size_t n = mesh.vertex_count();
    std::vector<Triplet> k_entries, m_entries, b_entries;
    k_entries.reserve(6 * mesh.triangle_count());
    m_entries.reserve(6 * mesh.triangle_count());
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        const auto& t = mesh.triangles[k];
        const auto& geo = mesh.geometry[k];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j <= i; ++j) {
                const auto r = static_cast<std::size_t>(t[i]), c = static_cast<std::size_t>(t[j]);
                k_entries.push_back({r, c, geo.area * dot(geo.grad[i], geo.grad[j])});
                m_entries.push_back({r, c, geo.area * (i == j ? 2.0 : 1.0) / 12.0});
            }
    }
    const BoundaryQuadrature q = BoundaryQuadrature::build(mesh, weighted, quadrature_order);
    b_entries.reserve(3 * q.nodes.size());
    for (const auto& node : q.nodes) {
        const auto a = static_cast<std::size_t>(node.a), b = static_cast<std::size_t>(node.b);
        const double pa = 1.0 - node.s, pb = node.s;
        b_entries.push_back({a, a, node.coeff * pa * pa});
        b_entries.push_back({b, b, node.coeff * pb * pb});
        b_entries.push_back({a, b, node.coeff * pa * pb});
    }
    return {SparseSym::from_triplets(n, k_entries), SparseSym::from_triplets(n, m_entries),
            SparseSym::from_triplets(n, b_entries)};
}

} // namespace steklov
