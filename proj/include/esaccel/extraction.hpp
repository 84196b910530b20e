#pragma once

// Extraction laws: recover the limit L (and the contraction theta) of a loop
// from a handful of samples taken one period apart.
//
// Single-sample functions throw on invalid input; the series functions never
// abort and mark bad grid points with NaN instead.

#include <esaccel/dynamics.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace esaccel {

struct SampleQuadruple {
    double x0 = 0.0, x1 = 0.0, x2 = 0.0, x3 = 0.0;  // x(t + nT), n = 0..3
};

struct GValue {
    double g;
    bool clamped;  // raw value fell outside [-1, 1/3]
};

/// Cross-ratio of four period samples, clamped to [-1, 1/3].
[[nodiscard]] GValue compute_g(const SampleQuadruple& q);
/// Contraction factor from g (minus branch); throws unless the result is in (0, 1).
[[nodiscard]] double extract_theta(double g);
/// Limit from three period samples and a known contraction factor.
[[nodiscard]] double extract_l_basic(double x0, double x1, double x2, double theta);

/// Zeroth-order drift law; h_n = x(t + nT) - q(t + nT), growth = exp(eps T).
[[nodiscard]] double extract_l_drift_zeroth(double h0, double h1, double h2, double growth);

/// Coefficients mu_0..mu_5 of the identity sum mu_i z_i = 0 satisfied by the
/// first-order drift model; they are the coefficients of
/// (x - 1)(x - A)(x - B)(x - AB)(x - A^2 B).
[[nodiscard]] std::array<double, 6> drift_first_order_coefficients(double growth, double decay);

/// Root of sum_i mu_i prod_{j != i} (h_j - L) nearest to l_seed, h_j = x_j - q_j,
/// searched only beyond the end of the h range the samples approach. A seed on
/// the wrong side is moved out by one spread of h. Throws RootNotFound when no
/// sign change is found.
[[nodiscard]] double extract_l_drift_first(const std::array<double, 6>& x,
                                           const std::array<double, 6>& q, double growth,
                                           double decay, double l_seed);

struct ExtractionSeries {
    std::vector<double> t_grid;
    std::vector<double> g_values;           // NaN for schemes that do not use g
    std::vector<double> theta_hat;          // NaN where invalid
    std::vector<double> l_hat;              // NaN where invalid
    std::vector<std::uint8_t> clamped_flags;

    [[nodiscard]] std::size_t size() const noexcept { return t_grid.size(); }
    [[nodiscard]] bool valid(std::size_t i) const noexcept { return !std::isnan(l_hat[i]); }
};

// Extraction grid: trajectory grid points in [t_begin, t_end] taken every
// `stride` samples. Without t_end the grid runs as far as the samples allow.
struct ExtractionWindow {
    double t_begin = 0.0;
    std::optional<double> t_end;
    std::size_t stride = 1;
};

/// g, theta and L at every grid point from four period samples.
[[nodiscard]] ExtractionSeries accelerate_basic(const Trajectory& traj,
                                                const ExtractionWindow& window = {});
/// L at every grid point from three samples with theta held fixed; g is still reported.
[[nodiscard]] ExtractionSeries accelerate_basic_fixed_theta(const Trajectory& traj, double theta,
                                                            const ExtractionWindow& window = {});
/// Trapezoid mean of the valid theta samples on [0, k T]; invalid samples are bridged.
[[nodiscard]] double average_theta(const ExtractionSeries& series, double period, int k);

[[nodiscard]] ExtractionSeries accelerate_drift_zeroth(const Trajectory& traj,
                                                       const DriftParams& params,
                                                       const ExtractionWindow& window = {});
/// First-order law at every grid point, seeded by the zeroth-order law.
[[nodiscard]] ExtractionSeries accelerate_drift_first(const Trajectory& traj,
                                                      const DriftParams& params,
                                                      const ExtractionWindow& window = {});

}  // namespace esaccel
