#pragma once

#include <cmath>
#include <stdexcept>

namespace fruitgrade {

/// Area of the superellipse |x/a|^n + |y/b|^n <= 1.
/// A = 4ab * Gamma(1+1/n)^2 / Gamma(1+2/n); n = 2 reduces to pi*a*b.
inline double superellipse_area(double a, double b, double n) {
    if (a <= 0.0 || b <= 0.0 || n <= 0.0)
        throw std::invalid_argument("superellipse_area: non-positive argument");
    double g1 = std::tgamma(1.0 + 1.0 / n);
    double g2 = std::tgamma(1.0 + 2.0 / n);
    return 4.0 * a * b * g1 * g1 / g2;
}

/// Volume of the superellipsoid |x/a|^n + |y/b|^n + |z/c|^n <= 1.
/// V = 8abc * Gamma(1+1/n)^3 / Gamma(1+3/n); n = 2 reduces to (4/3)pi*abc.
inline double superellipsoid_volume(double a, double b, double c, double n) {
    if (a <= 0.0 || b <= 0.0 || c <= 0.0 || n <= 0.0)
        throw std::invalid_argument("superellipsoid_volume: non-positive argument");
    double g1 = std::tgamma(1.0 + 1.0 / n);
    double g3 = std::tgamma(1.0 + 3.0 / n);
    return 8.0 * a * b * c * g1 * g1 * g1 / g3;
}

/// Solves superellipse_area(a, b, n) == target for the exponent n >= 2 by
/// bisection. Area is strictly increasing in n, from pi*a*b (n = 2) toward
/// 4ab (n -> inf).
inline double solve_superellipse_exponent(double a, double b, double target_area,
                                          double tol = 1e-10) {
    double lo = 2.0, hi = 2.0;
    if (target_area <= superellipse_area(a, b, lo))
        return 2.0;
    if (target_area >= 4.0 * a * b)
        throw std::domain_error("solve_superellipse_exponent: target exceeds 4ab limit");
    hi = 4.0;
    while (superellipse_area(a, b, hi) < target_area) {
        hi *= 2.0;
        if (hi > 1e6)
            throw std::domain_error("solve_superellipse_exponent: no bracket");
    }
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        (superellipse_area(a, b, mid) < target_area ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace fruitgrade
