#include <esaccel/extraction.hpp>
#include <esaccel/kernels.hpp>

#include "kernel_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace esaccel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct GridPlan {
    std::size_t first = 0;
    std::size_t count = 0;
    std::size_t stride = 1;
};

// Grid points whose n-period shifts stay inside the trajectory.
GridPlan plan_grid(const Trajectory& traj, const ExtractionWindow& w, std::size_t shifts) {
    if (w.stride == 0) throw std::invalid_argument("extraction window stride must be positive");
    const std::size_t span = shifts * static_cast<std::size_t>(traj.samples_per_period());
    const double need_begin = w.t_begin + static_cast<double>(shifts) * traj.period();
    if (traj.size() <= span) {
        throw HorizonExceeded(need_begin, "trajectory shorter than the extraction stencil");
    }
    const std::size_t last_possible = traj.size() - 1 - span;

    GridPlan plan;
    plan.stride = w.stride;
    const double pos = (w.t_begin - traj.t0()) / traj.step();
    if (std::abs(pos - std::round(pos)) > 1e-6 || pos < -1e-6) {
        throw std::invalid_argument("extraction window start is not on the sample grid");
    }
    plan.first = static_cast<std::size_t>(std::llround(pos));
    if (plan.first > last_possible) {
        std::ostringstream os;
        os << "extraction at t = " << w.t_begin << " needs t_end >= " << need_begin;
        throw HorizonExceeded(need_begin, os.str());
    }
    std::size_t last = last_possible;
    if (w.t_end) {
        const auto req = static_cast<std::size_t>(
            std::floor((*w.t_end - traj.t0()) / traj.step() + 1e-6));
        if (req > last_possible) {
            const double need = *w.t_end + static_cast<double>(shifts) * traj.period();
            std::ostringstream os;
            os << "extraction window end " << *w.t_end << " needs t_end >= " << need
               << ", trajectory ends at " << traj.end_time();
            throw HorizonExceeded(need, os.str());
        }
        if (req < plan.first) throw std::invalid_argument("extraction window is empty");
        last = req;
    }
    plan.count = (last - plan.first) / plan.stride + 1;
    return plan;
}

// Column of x(t_i + n T) over the plan, optionally minus a per-sample offset.
std::vector<double> gather(std::span<const double> v, const GridPlan& plan, std::size_t offset) {
    std::vector<double> out(plan.count);
    for (std::size_t i = 0; i < plan.count; ++i) out[i] = v[plan.first + i * plan.stride + offset];
    return out;
}

ExtractionSeries empty_series(const Trajectory& traj, const GridPlan& plan) {
    ExtractionSeries s;
    s.t_grid.resize(plan.count);
    for (std::size_t i = 0; i < plan.count; ++i) s.t_grid[i] = traj.time(plan.first + i * plan.stride);
    s.g_values.assign(plan.count, kNaN);
    s.theta_hat.assign(plan.count, kNaN);
    s.l_hat.assign(plan.count, kNaN);
    s.clamped_flags.assign(plan.count, 0);
    return s;
}

std::vector<double> drift_corrected(const Trajectory& traj, const DriftParams& params) {
    std::vector<double> h(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) h[i] = traj[i] - params.drift(traj.time(i));
    return h;
}

double first_order_residual(const std::array<double, 6>& mu, const std::array<double, 6>& h,
                            double l, double* derivative) {
    std::array<double, 6> d{};
    for (std::size_t j = 0; j < 6; ++j) d[j] = h[j] - l;
    double p = 0.0;
    double dp = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        double prod = 1.0;
        for (std::size_t j = 0; j < 6; ++j) {
            if (j != i) prod *= d[j];
        }
        p += mu[i] * prod;
        double sum = 0.0;
        for (std::size_t k = 0; k < 6; ++k) {
            if (k == i) continue;
            double partial = 1.0;
            for (std::size_t j = 0; j < 6; ++j) {
                if (j != i && j != k) partial *= d[j];
            }
            sum += partial;
        }
        dp -= mu[i] * sum;
    }
    if (derivative) *derivative = dp;
    return p;
}

}  // namespace

GValue compute_g(const SampleQuadruple& q) {
    const auto r = kernels::detail::cross_ratio(q.x0, q.x1, q.x2, q.x3);
    if (std::isnan(r.g)) {
        throw DegenerateSamples("compute_g: consecutive samples coincide within tolerance");
    }
    return {r.g, r.clamped};
}

double extract_theta(double g) {
    if (!std::isfinite(g) || g == 0.0) throw InvalidG("extract_theta: g must be finite and nonzero");
    const double gm1 = g - 1.0;
    if (gm1 * gm1 - 4.0 * g * g < 0.0) {
        throw InvalidG("extract_theta: negative discriminant (g above 1/3)");
    }
    if (g >= kernels::kGUpper) {
        throw ExtractionOutOfRange("extract_theta: g at the 1/3 cutoff gives theta = 1");
    }
    const double theta = kernels::detail::theta_from_g(g);
    if (std::isnan(theta)) {
        std::ostringstream os;
        os << "extract_theta: g = " << g << " gives theta outside (0, 1)";
        throw ExtractionOutOfRange(os.str());
    }
    return theta;
}

double extract_l_basic(double x0, double x1, double x2, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw ExtractionOutOfRange("extract_l_basic: theta must lie in (0, 1)");
    }
    const double l = kernels::detail::l_basic(x0, x1, x2, theta);
    if (std::isnan(l)) throw DegenerateSamples("extract_l_basic: denominator vanishes");
    return l;
}

double extract_l_drift_zeroth(double h0, double h1, double h2, double growth) {
    if (!(growth > 1.0)) throw std::invalid_argument("extract_l_drift_zeroth: growth must exceed 1");
    const double l = kernels::detail::l_drift_zeroth(h0, h1, h2, growth);
    if (std::isnan(l)) throw DegenerateSamples("extract_l_drift_zeroth: denominator vanishes");
    return l;
}

std::array<double, 6> drift_first_order_coefficients(double a, double b) {
    const double a2 = a * a;
    const double a3 = a2 * a;
    const double s = 1.0 + a + a2;
    const double b2 = b * b;
    const double b3 = b2 * b;
    std::array<double, 6> mu{};
    mu[5] = 1.0;
    mu[4] = -(1.0 + a + b * s);
    mu[3] = a + b * (1.0 + a) * s + b2 * a * s;
    mu[2] = -(a * b * s + (a + 1.0) * b2 * (a + a2 + a3) + a3 * b3);
    mu[1] = a * b2 * (a + a2 + a3) + (a + 1.0) * a3 * b3;
    mu[0] = -a3 * a * b3;
    return mu;
}

double extract_l_drift_first(const std::array<double, 6>& x, const std::array<double, 6>& q,
                             double growth, double decay, double l_seed) {
    const auto mu = drift_first_order_coefficients(growth, decay);
    std::array<double, 6> h{};
    for (std::size_t j = 0; j < 6; ++j) h[j] = x[j] - q[j];
    const auto [h_min, h_max] = std::minmax_element(h.begin(), h.end());
    const double spread = *h_max - *h_min;
    if (!(spread > 0.0) || !std::isfinite(spread)) {
        throw DegenerateSamples("extract_l_drift_first: samples do not move");
    }

    // h_n - L = 1 / z_n keeps one sign and shrinks in magnitude, so L lies
    // beyond the end of the range that the samples move towards. The other
    // roots of the law sit between the poles h_j and are rejected this way.
    const bool below = h[5] < h[0];
    const double edge = below ? *h_min : *h_max;
    const double outward = below ? -1.0 : 1.0;
    if (!((l_seed - edge) * outward > 0.0)) l_seed = edge + outward * spread;
    const double scale = std::abs(l_seed - edge) + spread;
    auto clip = [&](double r) { return below ? std::min(r, edge) : std::max(r, edge); };

    const double f_seed = first_order_residual(mu, h, l_seed, nullptr);
    if (f_seed == 0.0) return l_seed;
    if (!std::isfinite(f_seed)) {
        throw RootNotFound(std::abs(f_seed), "extract_l_drift_first: degenerate samples");
    }

    // Grow a bracket around the seed until one side changes sign.
    double lo = 0.0, hi = 0.0;
    bool found = false;
    for (double r = 1e-9 * scale; r <= 4.0 * scale && !found; r *= 2.0) {
        const double p_hi = clip(l_seed + r), p_lo = clip(l_seed - r);
        const double f_hi = first_order_residual(mu, h, p_hi, nullptr);
        const double f_lo = first_order_residual(mu, h, p_lo, nullptr);
        const bool up = std::signbit(f_hi) != std::signbit(f_seed);
        const bool down = std::signbit(f_lo) != std::signbit(f_seed);
        if (up && down) {
            // Both sides flip: take the side whose secant root lies closer.
            const double du = (p_hi - l_seed) * f_seed / (f_seed - f_hi);
            const double dd = (l_seed - p_lo) * f_seed / (f_seed - f_lo);
            if (du <= dd) {
                lo = l_seed, hi = p_hi;
            } else {
                lo = p_lo, hi = l_seed;
            }
            found = true;
        } else if (up) {
            lo = l_seed, hi = p_hi;
            found = true;
        } else if (down) {
            lo = p_lo, hi = l_seed;
            found = true;
        }
    }
    if (!found) {
        throw RootNotFound(std::abs(f_seed), "extract_l_drift_first: no sign change near the seed");
    }

    // Safeguarded Newton on [lo, hi].
    double f_lo = first_order_residual(mu, h, lo, nullptr);
    double l = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double df = 0.0;
        const double f = first_order_residual(mu, h, l, &df);
        if (f == 0.0) return l;
        if (std::signbit(f) == std::signbit(f_lo)) {
            lo = l;
            f_lo = f;
        } else {
            hi = l;
        }
        double next = (df != 0.0) ? l - f / df : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double tol = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(next));
        if (std::abs(next - l) <= tol || hi - lo <= tol) return next;
        l = next;
    }
    return l;
}

ExtractionSeries accelerate_basic(const Trajectory& traj, const ExtractionWindow& window) {
    const auto plan = plan_grid(traj, window, 3);
    auto s = empty_series(traj, plan);
    const auto spp = static_cast<std::size_t>(traj.samples_per_period());
    const auto v = traj.values();
    const auto x0 = gather(v, plan, 0);
    const auto x1 = gather(v, plan, spp);
    const auto x2 = gather(v, plan, 2 * spp);
    const auto x3 = gather(v, plan, 3 * spp);
    kernels::extract_basic({x0, x1, x2, x3}, {s.g_values, s.clamped_flags, s.theta_hat, s.l_hat});
    return s;
}

ExtractionSeries accelerate_basic_fixed_theta(const Trajectory& traj, double theta,
                                              const ExtractionWindow& window) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw ExtractionOutOfRange("accelerate_basic_fixed_theta: theta must lie in (0, 1)");
    }
    auto s = accelerate_basic(traj, window);
    const auto plan = plan_grid(traj, window, 3);
    const auto spp = static_cast<std::size_t>(traj.samples_per_period());
    const auto v = traj.values();
    const auto x0 = gather(v, plan, 0);
    const auto x1 = gather(v, plan, spp);
    const auto x2 = gather(v, plan, 2 * spp);
    std::fill(s.theta_hat.begin(), s.theta_hat.end(), theta);
    kernels::extract_l_fixed_theta(x0, x1, x2, theta, s.l_hat);
    return s;
}

double average_theta(const ExtractionSeries& series, double period, int k) {
    if (k <= 0 || !(period > 0.0)) throw std::invalid_argument("average_theta: k and period must be positive");
    const double window_end = k * period;
    if (series.size() == 0 || series.t_grid.back() < window_end - 1e-9 * window_end) {
        throw HorizonExceeded(window_end, "average_theta: series does not cover [0, kT]");
    }
    double area = 0.0;
    double first_t = kNaN, prev_t = kNaN, prev_v = kNaN;
    std::size_t used = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double t = series.t_grid[i];
        if (t > window_end + 1e-9 * window_end) break;
        const double v = series.theta_hat[i];
        if (std::isnan(v)) continue;
        if (used == 0) {
            first_t = t;
        } else {
            area += 0.5 * (t - prev_t) * (v + prev_v);
        }
        prev_t = t;
        prev_v = v;
        ++used;
    }
    if (used == 0) throw EmptyWindow("average_theta: no valid theta samples in [0, kT]");
    if (used == 1) return prev_v;
    return area / (prev_t - first_t);
}

ExtractionSeries accelerate_drift_zeroth(const Trajectory& traj, const DriftParams& params,
                                         const ExtractionWindow& window) {
    const auto plan = plan_grid(traj, window, 2);
    auto s = empty_series(traj, plan);
    const auto spp = static_cast<std::size_t>(traj.samples_per_period());
    const auto h = drift_corrected(traj, params);
    const auto h0 = gather(h, plan, 0);
    const auto h1 = gather(h, plan, spp);
    const auto h2 = gather(h, plan, 2 * spp);
    kernels::extract_drift_zeroth(h0, h1, h2, params.growth_factor(), s.l_hat);
    return s;
}

ExtractionSeries accelerate_drift_first(const Trajectory& traj, const DriftParams& params,
                                        const ExtractionWindow& window) {
    const auto plan = plan_grid(traj, window, 5);
    auto s = empty_series(traj, plan);
    const auto spp = static_cast<std::size_t>(traj.samples_per_period());
    const double a = params.growth_factor();
    const double b = params.decay_factor();
    for (std::size_t i = 0; i < plan.count; ++i) {
        const std::size_t base = plan.first + i * plan.stride;
        std::array<double, 6> x{}, q{};
        for (std::size_t n = 0; n < 6; ++n) {
            x[n] = traj[base + n * spp];
            q[n] = params.drift(traj.time(base + n * spp));
        }
        // seeded from the latest three samples, where the decaying modes weigh least
        const double seed = kernels::detail::l_drift_zeroth(x[3] - q[3], x[4] - q[4], x[5] - q[5], a);
        if (std::isnan(seed)) continue;
        try {
            s.l_hat[i] = extract_l_drift_first(x, q, a, b, seed);
        } catch (const Error&) {
            // left invalid
        }
    }
    return s;
}

}  // namespace esaccel
