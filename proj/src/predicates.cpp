#include "steklov/predicates.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace steklov::predicates {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2;
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIncircleBound = (10.0 + 96.0 * kEps) * kEps;

// Nonoverlapping expansion, components in increasing magnitude.
using Expansion = std::vector<double>;

inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bv = s - a;
    const double av = s - bv;
    e = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& p, double& e) {
    p = a * b;
    e = std::fma(a, b, -p);
}

Expansion grow(const Expansion& e, double b) {
    Expansion h;
    h.reserve(e.size() + 1);
    double q = b;
    for (double component : e) {
        double sum = 0.0;
        double err = 0.0;
        two_sum(q, component, sum, err);
        if (err != 0.0) h.push_back(err);
        q = sum;
    }
    if (q != 0.0 || h.empty()) h.push_back(q);
    return h;
}

Expansion add(const Expansion& a, const Expansion& b) {
    Expansion h = a;
    for (double component : b) h = grow(h, component);
    return h;
}

Expansion negate(Expansion a) {
    for (double& c : a) c = -c;
    return a;
}

Expansion scale(const Expansion& e, double b) {
    Expansion h;
    for (double component : e) {
        double p = 0.0;
        double err = 0.0;
        two_product(component, b, p, err);
        h = grow(h, err);
        h = grow(h, p);
    }
    return h;
}

Expansion mul(const Expansion& a, const Expansion& b) {
    Expansion h;
    for (double component : b) h = add(h, scale(a, component));
    return h;
}

Expansion diff(double a, double b) {
    double s = 0.0;
    double e = 0.0;
    two_sum(a, -b, s, e);
    Expansion h;
    if (e != 0.0) h.push_back(e);
    h.push_back(s);
    return h;
}

double sign_of(const Expansion& e) {
    for (auto it = e.rbegin(); it != e.rend(); ++it)
        if (*it != 0.0) return *it;
    return 0.0;
}

double orient2d_exact(Point a, Point b, Point c) {
    const Expansion acx = diff(a.x, c.x);
    const Expansion acy = diff(a.y, c.y);
    const Expansion bcx = diff(b.x, c.x);
    const Expansion bcy = diff(b.y, c.y);
    return sign_of(add(mul(acx, bcy), negate(mul(acy, bcx))));
}

double incircle_exact(Point a, Point b, Point c, Point d) {
    const Expansion adx = diff(a.x, d.x), ady = diff(a.y, d.y);
    const Expansion bdx = diff(b.x, d.x), bdy = diff(b.y, d.y);
    const Expansion cdx = diff(c.x, d.x), cdy = diff(c.y, d.y);
    const Expansion alift = add(mul(adx, adx), mul(ady, ady));
    const Expansion blift = add(mul(bdx, bdx), mul(bdy, bdy));
    const Expansion clift = add(mul(cdx, cdx), mul(cdy, cdy));
    const Expansion bc = add(mul(bdx, cdy), negate(mul(cdx, bdy)));
    const Expansion ca = add(mul(cdx, ady), negate(mul(adx, cdy)));
    const Expansion ab = add(mul(adx, bdy), negate(mul(bdx, ady)));
    return sign_of(add(add(mul(alift, bc), mul(blift, ca)), mul(clift, ab)));
}

} // namespace

double orient2d(Point a, Point b, Point c) {
    const double left = (a.x - c.x) * (b.y - c.y);
    const double right = (a.y - c.y) * (b.x - c.x);
    const double det = left - right;
    const double bound = kOrientBound * (std::abs(left) + std::abs(right));
    if (det > bound || -det > bound) return det;
    return orient2d_exact(a, b, c);
}

double incircle(Point a, Point b, Point c, Point d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;

    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;

    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                       clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                             (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                             (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double bound = kIncircleBound * permanent;
    if (det > bound || -det > bound) return det;
    return incircle_exact(a, b, c, d);
}

} // namespace steklov::predicates
