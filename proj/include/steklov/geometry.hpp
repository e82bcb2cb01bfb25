#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace steklov {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

enum class DomainKind { Cusp, DiskValidation };

/// Boundary pieces of the resolved domain. `Segment` marks plain polygon
/// edges of validation polygons that carry no curve.
enum class ArcTag { CuspLateralLeft, CuspLateralRight, CapArc, DiskCircle, Segment };

std::string to_string(ArcTag tag);

/// Outward cuspidal domain {|x1| < x2^alpha, 0 < x2 <= 1} united with the
/// ball B((0,2), sqrt 2), or a disk used for validation.
struct DomainSpec {
    double alpha = 2.0;
    Point cap_center{0.0, 2.0};
    double cap_radius = std::sqrt(2.0);
    DomainKind kind = DomainKind::Cusp;
    double disk_radius = 1.0;

    static DomainSpec cusp(double alpha);
    static DomainSpec disk(double radius = 1.0);

    /// Throws DomainError when an invariant is violated.
    void validate() const;
};

struct BoundaryArc {
    ArcTag tag;
    double parameter_begin;  // height t for lateral arcs, angle for circles
    double parameter_end;
    double arclength;
};

/// Half-width t^alpha of the cusp cross-section at height t in (0, 1].
double cusp_halfwidth(const DomainSpec& spec, double t);

/// h(t) = t^(2 alpha) + (2 - t)^2 - 2; negative where the lateral curve is
/// inside the cap ball.
double cusp_cap_residual(double alpha, double t);

/// Smallest root t* in (0, 1) of cusp_cap_residual. Below t* the lateral
/// curves are boundary; above it the cap arc takes over.
double cusp_cap_intersection(const DomainSpec& spec);

/// Weight at a point of the boundary: x2^alpha on the lateral curves, 1 on
/// the cap and on the validation circle. The junction belongs to the lateral
/// curve, so the weight jumps from t*^alpha to 1 there.
double boundary_weight(const DomainSpec& spec, Point point);

/// Weight at a point already known to lie on the arc `tag` (or on a chord
/// approximating it). Lateral arcs are parameterized by the height x2.
double weight_on_arc(const DomainSpec& spec, ArcTag tag, Point point);

/// Moves a point near the arc `tag` onto the exact curve: lateral arcs keep
/// the height, circles project radially.
Point project_to_arc(const DomainSpec& spec, ArcTag tag, Point point);

std::vector<BoundaryArc> boundary_arcs(const DomainSpec& spec);

/// Closed polygon; edge i runs from vertices[i] to vertices[(i + 1) % n].
struct BoundaryPolygon {
    std::vector<Point> vertices;
    std::vector<ArcTag> edge_tags;
    std::optional<std::size_t> tip;  // index of the cusp tip vertex
    double tip_radius = 0.0;         // quality refinement is waived inside
};

/// Counterclockwise boundary polygon. Lateral heights are
/// t_i = t* (i / n_lateral)^grading_q; the cap is sampled uniformly in angle.
BoundaryPolygon boundary_polygon(const DomainSpec& spec, std::size_t n_lateral,
                                 std::size_t n_arc, double grading_q = 2.0);

/// Validation polygon with all edges tagged Segment.
BoundaryPolygon make_polygon(std::vector<Point> vertices);

double signed_area(std::span<const Point> polygon);

/// Throws GeometryError naming the first pair of crossing edges.
void check_simple(const BoundaryPolygon& polygon);

} // namespace steklov
