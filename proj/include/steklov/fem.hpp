#pragma once

#include "steklov/linalg.hpp"
#include "steklov/mesh.hpp"

#include <span>
#include <vector>

namespace steklov {

/// Nodal values of a P1 function, one per mesh vertex.
using DiscreteField = Vector;

struct ProblemConfig {
    double p = 2.0;
    bool weighted = true;       // false: w = 1 everywhere on the boundary
    double eps_reg = 0.0;       // gradient regularization
    int quadrature_order = 2;   // Gauss points per boundary edge, 1..5

    void validate() const;
};

/// Gauss points on the boundary edges with the weight already folded into
/// the quadrature coefficients. Value at a node is (1 - s) u[a] + s u[b].
struct BoundaryQuadrature {
    struct Node {
        Index a;
        Index b;
        double s;
        double coeff;  // edge length * Gauss weight * w(x)
    };
    std::vector<Node> nodes;
    double measure = 0.0;  // integral of w ds

    static BoundaryQuadrature build(const Mesh& mesh, bool weighted, int order = 2);

    double value(const Node& n, std::span<const double> u) const { return (1.0 - n.s) * u[n.a] + n.s * u[n.b]; }
};

/// Gauss-Legendre rule on [0, 1] with 1 to 5 points.
void gauss_legendre_unit(int order, std::vector<double>& points, std::vector<double>& weights);

void check_field(const Mesh& mesh, std::span<const double> u);

/// Sum over triangles of area * (|grad u|^2 + eps^2)^(p/2).
double energy(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u);
double energy(const Mesh& mesh, double p, double eps, std::span<const double> u);

/// Exact derivative of energy() with respect to the nodal values.
DiscreteField energy_gradient(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u);
DiscreteField energy_gradient(const Mesh& mesh, double p, double eps, std::span<const double> u);

/// Integral of |u|^p w ds.
double boundary_pnorm(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u);
double boundary_pnorm(const BoundaryQuadrature& q, double p, std::span<const double> u);
DiscreteField boundary_pnorm_gradient(const Mesh& mesh, const BoundaryQuadrature& q, double p,
                                      std::span<const double> u);

/// Integral of |u|^(p-2) u w ds. Vanishes on the admissible set.
double constraint_functional(const Mesh& mesh, const ProblemConfig& cfg, std::span<const double> u);
double constraint_functional(const BoundaryQuadrature& q, double p, std::span<const double> u, double shift = 0.0);

/// Nodal derivative of the constraint: (p - 1) |u|^(p-2) w tested against each basis function.
DiscreteField constraint_gradient(const Mesh& mesh, const BoundaryQuadrature& q, double p,
                                  std::span<const double> u);

/// Integral of w ds over the boundary.
double boundary_measure(const Mesh& mesh, const ProblemConfig& cfg);

/// Barycentric point and weight of a triangle rule; weights sum to 1.
struct TriPoint {
    double l0, l1, l2, w;
};

/// Six-point rule exact for degree 4.
std::span<const TriPoint> triangle_rule();

/// Integral of |u|^p dx, six-point degree-4 rule per triangle.
double volume_pnorm(const Mesh& mesh, double p, std::span<const double> u);
DiscreteField volume_pnorm_gradient(const Mesh& mesh, double p, std::span<const double> u);

struct P2Matrices {
    SparseSym K;  // stiffness
    SparseSym M;  // volume mass
    SparseSym B;  // weighted boundary mass
};

P2Matrices assemble_p2(const Mesh& mesh, bool weighted, int quadrature_order = 2);

} // namespace steklov
