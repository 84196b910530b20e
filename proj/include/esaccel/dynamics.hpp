#pragma once

// Extremum-seeking loop dynamics on a period-aligned grid.
//
// Two loops are modelled, both written for the tracking error y:
//
//   basic:  f(x) = a + b (x - L)^2,   y = x - L
//     y' = -eps b (1 - cos 2wt) y - b y^2 sin wt - b eps^2 sin^3 wt + nu(t) sin wt
//
//   drift:  f(x, t) = (x - L - q(t))^2,  q(t) = q0 exp(-delta t),  y = x - L - q
//     y' = -2 eps sin^2(wt) y - y^2 sin wt - eps^2 sin^3 wt + delta q(t) - nu(t) sin wt
//
// Trajectories always store the loop output x(t), never y.

#include <esaccel/error.hpp>

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace esaccel {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr int kDefaultStepDivisor = 2048;
/// |y| beyond this aborts integration (the Riccati term blows up in finite time).
inline constexpr double kDivergenceBound = 1e6;

struct LoopParams {
    double epsilon = 0.01;  // dither amplitude
    double b = 2.0;         // curvature gain
    double period = 3.0;    // T
    double l_true = 0.0;    // optimum L
    double x_init = 1.3;    // x(0)

    [[nodiscard]] double omega() const noexcept { return kTwoPi / period; }
    /// Per-period contraction exp(-eps b T) of the homogeneous solution.
    [[nodiscard]] double theta() const noexcept { return std::exp(-epsilon * b * period); }
    void validate() const;
};

struct DriftParams {
    double epsilon = 0.1;
    double delta = 0.4;
    double q0 = 0.01;
    double period = 3.0;
    double l_true = 0.0;
    double z_init = 0.5;  // z(0) = 1 / y(0)

    [[nodiscard]] double omega() const noexcept { return kTwoPi / period; }
    /// A = exp(eps T), growth of the reciprocal error per period.
    [[nodiscard]] double growth_factor() const noexcept { return std::exp(epsilon * period); }
    /// B = exp(-delta T), per-period decay of the drift.
    [[nodiscard]] double decay_factor() const noexcept { return std::exp(-delta * period); }
    [[nodiscard]] double drift(double t) const noexcept { return q0 * std::exp(-delta * t); }
    [[nodiscard]] double y_init() const noexcept { return 1.0 / z_init; }
    void validate() const;
};

// Piecewise-constant dither noise: constant on [k dt, (k+1) dt), value
// offset + amplitude * u_k with u_k uniform on [-1, 1) drawn from a
// counter-based generator, so nu(t) is a pure function of (seed, k).
struct NoiseSpec {
    double amplitude = 0.0;
    double hold_interval = 0.5;
    double offset = 0.0;
    std::uint64_t seed = 42;

    void validate() const;
};

/// Uniform draw on [-1, 1) for interval index k.
[[nodiscard]] double noise_draw(std::uint64_t seed, std::int64_t k) noexcept;
[[nodiscard]] double piecewise_noise(const NoiseSpec& spec, double t) noexcept;

enum class Forcing {
    full,             // keep the eps^2 sin^3 term
    drop_second_order // Bernoulli truncation used by the closed-form solution
};

[[nodiscard]] double basic_rhs(const LoopParams& params, const std::optional<NoiseSpec>& noise,
                               double t, double y, Forcing forcing = Forcing::full) noexcept;
[[nodiscard]] double drift_rhs(const DriftParams& params, const std::optional<NoiseSpec>& noise,
                               double t, double y) noexcept;

// Uniformly sampled solution. The step is period / samples_per_period, so a
// shift by n periods is a shift by n * samples_per_period indices.
class Trajectory {
public:
    Trajectory(double t0, double period, int samples_per_period, std::vector<double> values);

    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] double step() const noexcept { return step_; }
    [[nodiscard]] double period() const noexcept { return period_; }
    [[nodiscard]] int samples_per_period() const noexcept { return samples_per_period_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double time(std::size_t i) const noexcept {
        return t0_ + static_cast<double>(i) * step_;
    }
    [[nodiscard]] double end_time() const noexcept { return time(values_.size() - 1); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// Grid index of t. Throws std::invalid_argument when t is off-grid and
    /// HorizonExceeded when t lies past the last sample.
    [[nodiscard]] std::size_t index_of(double t) const;
    [[nodiscard]] double at(double t) const { return values_[index_of(t)]; }

private:
    double t0_;
    double period_;
    int samples_per_period_;
    double step_;
    std::vector<double> values_;
};

/// x(t + n T) by direct index lookup.
[[nodiscard]] double sample_shifted(const Trajectory& traj, double t, std::size_t n);

namespace detail {
[[noreturn]] void throw_diverged(double t, double y);
std::size_t step_count(double t0, double t_end, double step);
}  // namespace detail

template <class F>
concept ScalarField = std::invocable<F&, double, double> &&
    std::convertible_to<std::invoke_result_t<F&, double, double>, double>;

// Classical fixed-step RK4 from t0 to (at least) t_end on the grid
// t0 + i * period / samples_per_period.
template <ScalarField Rhs>
[[nodiscard]] Trajectory integrate(Rhs&& rhs, double y0, double t0, double t_end, double period,
                                   int samples_per_period) {
    if (!(period > 0.0) || samples_per_period <= 0) {
        throw std::invalid_argument("integrate: period and samples_per_period must be positive");
    }
    if (!(t_end > t0)) {
        throw std::invalid_argument("integrate: t_end must exceed t0");
    }
    const double h = period / samples_per_period;
    const std::size_t n = detail::step_count(t0, t_end, h);

    std::vector<double> values(n + 1);
    double y = y0;
    values[0] = y;
    if (!std::isfinite(y)) detail::throw_diverged(t0, y);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) * h;
        const double k1 = rhs(t, y);
        const double k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        const double k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        const double k4 = rhs(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(y) || std::abs(y) > kDivergenceBound) {
            detail::throw_diverged(t + h, y);
        }
        values[i + 1] = y;
    }
    return Trajectory(t0, period, samples_per_period, std::move(values));
}

// RK4 for a small coupled system; rhs(t, state, derivative) fills derivative.
// Returns one trajectory per component, all on the same grid.
template <class Rhs>
    requires std::invocable<Rhs&, double, std::span<const double>, std::span<double>>
[[nodiscard]] std::vector<Trajectory> integrate_system(Rhs&& rhs, std::vector<double> y0, double t0,
                                                       double t_end, double period,
                                                       int samples_per_period) {
    if (!(period > 0.0) || samples_per_period <= 0 || !(t_end > t0) || y0.empty()) {
        throw std::invalid_argument("integrate_system: bad grid or empty state");
    }
    const double h = period / samples_per_period;
    const std::size_t n = detail::step_count(t0, t_end, h);
    const std::size_t dim = y0.size();

    std::vector<std::vector<double>> columns(dim, std::vector<double>(n + 1));
    std::vector<double> y = std::move(y0);
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    for (std::size_t c = 0; c < dim; ++c) columns[c][0] = y[c];

    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) * h;
        rhs(t, std::span<const double>(y), std::span<double>(k1));
        for (std::size_t c = 0; c < dim; ++c) tmp[c] = y[c] + 0.5 * h * k1[c];
        rhs(t + 0.5 * h, std::span<const double>(tmp), std::span<double>(k2));
        for (std::size_t c = 0; c < dim; ++c) tmp[c] = y[c] + 0.5 * h * k2[c];
        rhs(t + 0.5 * h, std::span<const double>(tmp), std::span<double>(k3));
        for (std::size_t c = 0; c < dim; ++c) tmp[c] = y[c] + h * k3[c];
        rhs(t + h, std::span<const double>(tmp), std::span<double>(k4));
        for (std::size_t c = 0; c < dim; ++c) {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            if (!std::isfinite(y[c]) || std::abs(y[c]) > kDivergenceBound) {
                detail::throw_diverged(t + h, y[c]);
            }
            columns[c][i + 1] = y[c];
        }
    }

    std::vector<Trajectory> out;
    out.reserve(dim);
    for (auto& col : columns) out.emplace_back(t0, period, samples_per_period, std::move(col));
    return out;
}

/// Loop output x(t) of the basic loop on [0, t_end].
[[nodiscard]] Trajectory simulate_basic(const LoopParams& params,
                                        const std::optional<NoiseSpec>& noise, double t_end,
                                        int step_divisor = kDefaultStepDivisor,
                                        Forcing forcing = Forcing::full);

/// Loop output x(t) = L + q(t) + y(t) of the drift loop on [0, t_end].
[[nodiscard]] Trajectory simulate_drift(const DriftParams& params,
                                        const std::optional<NoiseSpec>& noise, double t_end,
                                        int step_divisor = kDefaultStepDivisor);

/// Drift q(t) sampled on the grid of `like`.
[[nodiscard]] Trajectory drift_samples(const DriftParams& params, const Trajectory& like);

/// Homogeneous factor x0(t) = exp(-eps b t + eps b / (2 w) sin 2wt); x0(t + T) = theta x0(t).
[[nodiscard]] double homogeneous_factor(const LoopParams& params, double t) noexcept;

/// Integration constant C = 1 / (x(0) - L) of the closed-form solution.
[[nodiscard]] double initial_constant(const LoopParams& params);

// Closed form of the eps^2-truncated basic loop,
//   x(t) = L + x0(t) / (C + b int_0^t sin(ws) x0(s) ds),
// with the integral taken by composite Simpson (one panel per grid step,
// panel width period / step_divisor). Throws SingularSolution when the
// denominator vanishes.
[[nodiscard]] double analytic_basic_solution(const LoopParams& params, double c_const, double t,
                                             int step_divisor = kDefaultStepDivisor);
[[nodiscard]] Trajectory analytic_basic_trajectory(const LoopParams& params, double c_const,
                                                   double t_end,
                                                   int step_divisor = kDefaultStepDivisor);

}  // namespace esaccel
