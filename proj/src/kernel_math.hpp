#pragma once

// Per-sample formulas shared by the scalar kernels, the AVX2 remainder loops
// and the throwing single-sample API. The AVX2 bodies mirror these line by
// line; keep the operation order in sync.

#include <esaccel/kernels.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace esaccel::kernels::detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct GResult {
    double g;          // NaN when degenerate
    bool clamped;
};

inline double max_abs4(double a, double b, double c, double d) noexcept {
    return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
}

inline double max_abs3(double a, double b, double c) noexcept {
    return std::max(std::max(std::abs(a), std::abs(b)), std::abs(c));
}

inline GResult cross_ratio(double x0, double x1, double x2, double x3) noexcept {
    const double tol = kDegeneracyTolerance * max_abs4(x0, x1, x2, x3);
    const double d12 = x1 - x2;
    const double d03 = x0 - x3;
    if (!(std::abs(d12) > tol) || !(std::abs(d03) > tol)) return {kNaN, false};
    const double g = ((x0 - x1) * (x2 - x3)) / (d12 * d03);
    if (g > kGUpper) return {kGUpper, true};
    if (g < kGLower) return {kGLower, true};
    return {g, false};
}

// Minus branch of the quadratic g theta^2 + (g - 1) theta + g = 0.
// Returns NaN for g = 0, g at or above 1/3 (theta = 1 there, rounding aside),
// a negative discriminant or a root outside (0, 1).
inline double theta_from_g(double g) noexcept {
    const double two_g = 2.0 * g;
    const double gm1 = g - 1.0;
    const double disc = gm1 * gm1 - 4.0 * g * g;
    if (!(g != 0.0) || !(g < kGUpper) || !(disc >= 0.0)) return kNaN;
    const double theta = (1.0 - g) / two_g - std::sqrt(disc) / two_g;
    if (!(theta > 0.0) || !(theta < 1.0)) return kNaN;
    return theta;
}

// The limit laws are evaluated as x2 + correction. This is the same rational
// function as the textbook numerator / denominator form, but the correction
// is built from sample differences only, so a large common offset does not
// cancel catastrophically.
inline double l_basic(double x0, double x1, double x2, double theta) noexcept {
    const double tol = kDegeneracyTolerance * max_abs3(x0, x1, x2);
    const double d01 = x0 - x1;
    const double d12 = x1 - x2;
    const double den = d01 - theta * d12;
    if (!(std::abs(den) > tol)) return kNaN;
    return x2 + theta * (x2 - x1) * (x0 - x2) / den;
}

inline double l_drift_zeroth(double h0, double h1, double h2, double growth) noexcept {
    const double tol = kDegeneracyTolerance * max_abs3(h0, h1, h2);
    const double d01 = h0 - h1;
    const double d12 = h1 - h2;
    const double den = d12 - growth * d01;
    if (!(std::abs(den) > tol)) return kNaN;
    return h2 + d12 * (h0 - h2) / den;
}

}  // namespace esaccel::kernels::detail
