#pragma once

#include "steklov/geometry.hpp"

namespace steklov::predicates {

// Sign-exact geometric predicates: a floating-point filter backed by exact
// expansion arithmetic when the filter cannot certify the sign.

/// Positive if a, b, c are in counterclockwise order, zero if collinear.
double orient2d(Point a, Point b, Point c);

/// Positive if d lies inside the circle through the counterclockwise
/// triangle a, b, c.
double incircle(Point a, Point b, Point c, Point d);

} // namespace steklov::predicates
