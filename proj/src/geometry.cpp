#include "steklov/geometry.hpp"

#include "steklov/errors.hpp"
#include "steklov/predicates.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <numbers>

namespace steklov {

std::string to_string(ArcTag tag) {
    switch (tag) {
    case ArcTag::CuspLateralLeft: return "lateral_left";
    case ArcTag::CuspLateralRight: return "lateral_right";
    case ArcTag::CapArc: return "cap";
    case ArcTag::DiskCircle: return "disk";
    case ArcTag::Segment: return "segment";
    }
    return "unknown";
}

DomainSpec DomainSpec::cusp(double alpha) {
    DomainSpec spec;
    spec.alpha = alpha;
    spec.validate();
    return spec;
}

DomainSpec DomainSpec::disk(double radius) {
    DomainSpec spec;
    spec.kind = DomainKind::DiskValidation;
    spec.disk_radius = radius;
    spec.validate();
    return spec;
}

void DomainSpec::validate() const {
    if (kind == DomainKind::DiskValidation) {
        if (!(disk_radius > 0.0) || !std::isfinite(disk_radius))
            throw DomainError(fmt::format("disk radius must be positive, got {}", disk_radius));
        return;
    }
    if (!(alpha > 1.0) || !std::isfinite(alpha))
        throw DomainError(fmt::format("cusp exponent alpha must exceed 1, got {}", alpha));
    if (cap_center != Point{0.0, 2.0} || cap_radius != std::sqrt(2.0))
        throw DomainError("cusp domain requires the cap B((0,2), sqrt 2)");
}

double cusp_halfwidth(const DomainSpec& spec, double t) {
    if (spec.kind != DomainKind::Cusp)
        throw DomainError("cusp_halfwidth requires a cusp domain");
    if (!(t > 0.0 && t <= 1.0))
        throw DomainError(fmt::format("cusp height must lie in (0, 1], got {}", t));
    return std::pow(t, spec.alpha);
}

double cusp_cap_residual(double alpha, double t) {
    return std::pow(t, 2.0 * alpha) + (2.0 - t) * (2.0 - t) - 2.0;
}

double cusp_cap_intersection(const DomainSpec& spec) {
    if (spec.kind != DomainKind::Cusp)
        throw DomainError("cusp_cap_intersection requires a cusp domain");
    spec.validate();
    const double alpha = spec.alpha;
    auto h = [alpha](double t) { return cusp_cap_residual(alpha, t); };

    // h is convex with h(2 - sqrt 2) > 0 and h(1) = 0; its minimizer on
    // [2 - sqrt 2, 1] is a point where h < 0 for alpha > 1.
    double lo = 2.0 - std::numbers::sqrt2;
    double a = lo;
    double b = 1.0;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
        if (h(c) < h(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    double hi = 0.5 * (a + b);
    if (!(h(lo) > 0.0) || !(h(hi) < 0.0))
        throw GeometryError(
            fmt::format("cannot bracket the cusp/cap intersection for alpha = {}", alpha));

    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (h(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::abs(h(lo)) <= std::abs(h(hi)) ? lo : hi;
}

namespace {

constexpr double kOnCurveTol = 1e-10;

bool on_lateral(const DomainSpec& spec, Point p, double t_star) {
    if (p.y < -kOnCurveTol || p.y > t_star + kOnCurveTol) return false;
    const double y = std::clamp(p.y, 0.0, t_star);
    return std::abs(std::abs(p.x) - std::pow(y, spec.alpha)) <= kOnCurveTol;
}

} // namespace

double boundary_weight(const DomainSpec& spec, Point point) {
    spec.validate();
    if (spec.kind == DomainKind::DiskValidation) {
        if (std::abs(norm(point) - spec.disk_radius) > kOnCurveTol)
            throw DomainError(fmt::format("point ({}, {}) is not on the validation circle",
                                          point.x, point.y));
        return 1.0;
    }
    const double t_star = cusp_cap_intersection(spec);
    if (on_lateral(spec, point, t_star)) return std::pow(std::clamp(point.y, 0.0, t_star), spec.alpha);
    if (std::abs(distance(point, spec.cap_center) - spec.cap_radius) <= kOnCurveTol &&
        point.y >= t_star - kOnCurveTol)
        return 1.0;
    throw DomainError(
        fmt::format("point ({}, {}) is not on the cusp domain boundary", point.x, point.y));
}

double weight_on_arc(const DomainSpec& spec, ArcTag tag, Point point) {
    switch (tag) {
    case ArcTag::CuspLateralLeft:
    case ArcTag::CuspLateralRight: return std::pow(std::max(point.y, 0.0), spec.alpha);
    default: return 1.0;
    }
}

Point project_to_arc(const DomainSpec& spec, ArcTag tag, Point point) {
    switch (tag) {
    case ArcTag::CuspLateralRight:
    case ArcTag::CuspLateralLeft: {
        const double y = std::max(point.y, 0.0);
        const double x = std::pow(y, spec.alpha);
        return {tag == ArcTag::CuspLateralRight ? x : -x, y};
    }
    case ArcTag::CapArc: {
        const Point d = point - spec.cap_center;
        return spec.cap_center + (spec.cap_radius / norm(d)) * d;
    }
    case ArcTag::DiskCircle: return (spec.disk_radius / norm(point)) * point;
    case ArcTag::Segment: return point;
    }
    return point;
}

namespace {

struct CapAngles {
    double begin;  // right junction
    double end;    // left junction, end > begin
};

CapAngles cap_angles(const DomainSpec& spec, double t_star) {
    const double x = std::pow(t_star, spec.alpha);
    const double begin = std::atan2(t_star - spec.cap_center.y, x);
    return {begin, std::numbers::pi - begin};
}

} // namespace

std::vector<BoundaryArc> boundary_arcs(const DomainSpec& spec) {
    spec.validate();
    if (spec.kind == DomainKind::DiskValidation)
        return {{ArcTag::DiskCircle, 0.0, 2.0 * std::numbers::pi,
                 2.0 * std::numbers::pi * spec.disk_radius}};
    const double t_star = cusp_cap_intersection(spec);
    const double alpha = spec.alpha;
    auto speed = [alpha](double t) {
        const double slope = alpha * std::pow(t, alpha - 1.0);
        return std::sqrt(1.0 + slope * slope);
    };
    const double lateral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(speed, 0.0, t_star, 15, 1e-14);
    const CapAngles cap = cap_angles(spec, t_star);
    return {{ArcTag::CuspLateralRight, 0.0, t_star, lateral},
            {ArcTag::CapArc, cap.begin, cap.end, spec.cap_radius * (cap.end - cap.begin)},
            {ArcTag::CuspLateralLeft, 0.0, t_star, lateral}};
}

BoundaryPolygon boundary_polygon(const DomainSpec& spec, std::size_t n_lateral,
                                 std::size_t n_arc, double grading_q) {
    spec.validate();
    if (n_arc < 16) throw DomainError(fmt::format("n_arc must be at least 16, got {}", n_arc));
    if (!(grading_q >= 1.0))
        throw DomainError(fmt::format("grading_q must be at least 1, got {}", grading_q));

    BoundaryPolygon poly;
    if (spec.kind == DomainKind::DiskValidation) {
        for (std::size_t j = 0; j < n_arc; ++j) {
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / n_arc;
            poly.vertices.push_back({spec.disk_radius * std::cos(theta),
                                     spec.disk_radius * std::sin(theta)});
            poly.edge_tags.push_back(ArcTag::DiskCircle);
        }
        check_simple(poly);
        return poly;
    }
    if (n_lateral < 8)
        throw DomainError(fmt::format("n_lateral must be at least 8, got {}", n_lateral));

    const double t_star = cusp_cap_intersection(spec);
    std::vector<double> heights(n_lateral + 1);
    for (std::size_t i = 0; i <= n_lateral; ++i)
        heights[i] = t_star * std::pow(static_cast<double>(i) / n_lateral, grading_q);
    heights[n_lateral] = t_star;

    poly.tip = 0;
    poly.vertices.push_back({0.0, 0.0});
    for (std::size_t i = 1; i <= n_lateral; ++i) {
        poly.vertices.push_back({std::pow(heights[i], spec.alpha), heights[i]});
        poly.edge_tags.push_back(ArcTag::CuspLateralRight);
    }
    const CapAngles cap = cap_angles(spec, t_star);
    for (std::size_t j = 1; j < n_arc; ++j) {
        const double theta = cap.begin + (cap.end - cap.begin) * static_cast<double>(j) / n_arc;
        poly.vertices.push_back(spec.cap_center +
                                spec.cap_radius * Point{std::cos(theta), std::sin(theta)});
        poly.edge_tags.push_back(ArcTag::CapArc);
    }
    poly.edge_tags.push_back(ArcTag::CapArc);
    for (std::size_t i = n_lateral; i >= 1; --i) {
        poly.vertices.push_back({-std::pow(heights[i], spec.alpha), heights[i]});
        poly.edge_tags.push_back(ArcTag::CuspLateralLeft);
    }

    // Below this height the cusp is narrower than the lateral sample spacing
    // and no triangle spanning it can meet an angle bound.
    std::size_t first_resolved = n_lateral;
    while (first_resolved > 1) {
        const std::size_t i = first_resolved - 1;
        if (2.0 * std::pow(heights[i], spec.alpha) < heights[i] - heights[i - 1]) break;
        first_resolved = i;
    }
    poly.tip_radius = heights[first_resolved];

    check_simple(poly);
    return poly;
}

BoundaryPolygon make_polygon(std::vector<Point> vertices) {
    BoundaryPolygon poly;
    poly.edge_tags.assign(vertices.size(), ArcTag::Segment);
    poly.vertices = std::move(vertices);
    check_simple(poly);
    return poly;
}

double signed_area(std::span<const Point> polygon) {
    double twice = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = polygon[i];
        const Point b = polygon[(i + 1) % n];
        twice += a.x * b.y - a.y * b.x;
    }
    return 0.5 * twice;
}

namespace {

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment(Point a, Point b, Point p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_touch(Point a, Point b, Point c, Point d) {
    using predicates::orient2d;
    const double o1 = sgn(orient2d(a, b, c));
    const double o2 = sgn(orient2d(a, b, d));
    const double o3 = sgn(orient2d(c, d, a));
    const double o4 = sgn(orient2d(c, d, b));
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

} // namespace

void check_simple(const BoundaryPolygon& polygon) {
    const auto& v = polygon.vertices;
    const std::size_t n = v.size();
    if (n < 3) throw GeometryError("polygon needs at least three vertices");
    if (polygon.edge_tags.size() != n)
        throw GeometryError("polygon edge tag count does not match vertex count");
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = v[i];
        const Point b = v[(i + 1) % n];
        if (a == b) throw GeometryError(fmt::format("polygon edge {} is degenerate", i));
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point c = v[j];
            const Point d = v[(j + 1) % n];
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) {
                // Shared endpoint only; reject folding back onto the same line.
                const Point shared = (j == i + 1) ? b : a;
                const Point p = (j == i + 1) ? a : b;
                const Point q = (j == i + 1) ? d : c;
                if (predicates::orient2d(p, shared, q) == 0.0 && dot(p - shared, q - shared) > 0.0)
                    throw GeometryError(
                        fmt::format("polygon edges {} and {} overlap", i, j));
                continue;
            }
            if (segments_touch(a, b, c, d))
                throw GeometryError(
                    fmt::format("polygon self-intersects: edges {} and {}", i, j));
        }
    }
}

} // namespace steklov
