#pragma once

// Analysis tools for the drift loop and for sequence acceleration.
//
// With z = 1 / (x - L - q) and the eps^2 forcing dropped, the drift loop is
//   z' - 2 eps sin^2(wt) z + delta q(t) z^2 = sin wt.
// Expanding z = sum_n z_n delta^n (q held fixed) gives a triangular family of
// linear equations
//   z_0' - 2 eps sin^2 z_0 = sin wt,                            z_0(0) = z(0)
//   z_n' - 2 eps sin^2 z_n = -q(t) sum_{j<n} z_j z_{n-1-j},     z_n(0) = 0.

#include <esaccel/dynamics.hpp>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace esaccel {

inline constexpr int kDefaultSeriesOrder = 4;

struct SeriesTerm {
    int order;
    Trajectory samples;
};

/// z_0..z_max_order on [0, t_end], all orders integrated together as one
/// coupled RK4 system so every stage sees consistent lower-order values.
[[nodiscard]] std::vector<SeriesTerm> solve_series_terms(const DriftParams& params, int max_order,
                                                         double t_end,
                                                         int step_divisor = kDefaultStepDivisor);

/// sum_n z_n(t) delta^n.
[[nodiscard]] double series_sum(const std::vector<SeriesTerm>& terms, double delta, double t);

/// Direct solve of z' = 2 eps sin^2 z + sin wt - coupling q(t) z^2 with z(0) = z_init.
[[nodiscard]] Trajectory solve_reciprocal_riccati(const DriftParams& params, double coupling,
                                                  double t_end,
                                                  int step_divisor = kDefaultStepDivisor);

// Remainder R = z - sum_{n<=N} coupling^n z_n, integrated from its own
// equation instead of by subtraction:
//   R' = 2 eps sin^2 R - coupling q (R (2 S + R) + E),
// where E collects the orders > N of the truncated product S^2.
[[nodiscard]] Trajectory series_remainder(const DriftParams& params, int order, double coupling,
                                          double t_end, int step_divisor = kDefaultStepDivisor);

struct GammaReport {
    double gamma;    // 24 exp(2 eps / w) |q0| (|z(0)| + 1 / delta)
    double c_const;  // 4 exp(eps / w) |q0| / (e delta)
    double alpha0;   // bound on sup |z_0| over [0, horizon]
    double horizon;  // 1 / (2 delta)
    bool convergent; // gamma < 1
};

[[nodiscard]] GammaReport gamma_criterion(const DriftParams& params);

struct AlphaSequence {
    std::vector<double> values;               // alpha_0 .. alpha_k
    std::optional<std::size_t> overflow_at;   // first index that was not finite
};

/// alpha_{n+1} = C sum_{j<=n} alpha_j alpha_{n-j}; truncated at the first overflow.
[[nodiscard]] AlphaSequence alpha_sequence(double c_const, double alpha0, std::size_t n_max);

/// n-th Taylor coefficient of (1 - sqrt(1 - 4 C alpha0 x)) / (2 C x).
[[nodiscard]] double generating_function_coefficient(double c_const, double alpha0, std::size_t n);
/// Large-n form (4C)^n alpha0^(n+1) / (sqrt(pi) (n+1)^(3/2)).
[[nodiscard]] double generating_function_asymptotic(double c_const, double alpha0, std::size_t n);

struct ScaledPeriodicDecomposition {
    double alpha;
    Trajectory p_samples;       // P on the grid of the input
    double constant_residual;   // max deviation of y(x) - a y(x - L) from its median
    double periodic_residual;   // max |P(x) - P(x - L)|
};

// Writes y = alpha + a^(x/L) P(x) with P L-periodic, which holds whenever
// y'(x + L) = a y'(x). Throws HypothesisViolated when either residual exceeds
// 1e-8 times the data scale. `shift` must be a whole number of grid steps.
[[nodiscard]] ScaledPeriodicDecomposition decompose_scaled_periodic(const Trajectory& y, double a,
                                                                    double shift);

/// Monic polynomial with the given roots, coefficients in ascending order.
[[nodiscard]] std::vector<double> annihilator_coefficients(std::span<const double> roots);

/// Per-period growth ratios of the exponential modes present in z_n (n <= 2).
[[nodiscard]] std::vector<double> series_term_ratios(const DriftParams& params, int order);

// max over grid t in [t_begin, t_end] of |sum_k c_k f(t + kT)| / sum_k |c_k f(t + kT)|,
// i.e. how far the samples are from satisfying the recurrence with these roots.
[[nodiscard]] double annihilator_residual(const Trajectory& f, std::span<const double> roots,
                                          double t_begin, double t_end);

/// sum_{j=1}^n 1/j^2, summed from the small terms up.
[[nodiscard]] double partial_sum_basel(int n);

/// (1/2)((n+2)^2 S_{n+2} - 2 (n+1)^2 S_{n+1} + n^2 S_n); exact for S_n = L + a/n + b/n^2.
[[nodiscard]] double richardson_accelerate(const std::function<double(int)>& s, int n);

}  // namespace esaccel
