#include <esaccel/dynamics.hpp>

#include <sstream>

namespace esaccel {

namespace {

constexpr double kSingularTolerance = 1e-14;

std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void LoopParams::validate() const {
    require(epsilon > 0.0 && std::isfinite(epsilon), "LoopParams: epsilon must be positive");
    require(b != 0.0 && std::isfinite(b), "LoopParams: b must be nonzero");
    require(period > 0.0 && std::isfinite(period), "LoopParams: period must be positive");
    require(std::isfinite(l_true) && std::isfinite(x_init), "LoopParams: non-finite L or x(0)");
}

void DriftParams::validate() const {
    require(epsilon > 0.0 && std::isfinite(epsilon), "DriftParams: epsilon must be positive");
    require(delta > 0.0 && std::isfinite(delta), "DriftParams: delta must be positive");
    require(period > 0.0 && std::isfinite(period), "DriftParams: period must be positive");
    require(std::isfinite(q0) && std::isfinite(l_true), "DriftParams: non-finite q0 or L");
    require(z_init != 0.0 && std::isfinite(z_init), "DriftParams: z_init must be nonzero");
}

void NoiseSpec::validate() const {
    require(amplitude >= 0.0 && std::isfinite(amplitude), "NoiseSpec: amplitude must be >= 0");
    require(hold_interval > 0.0 && std::isfinite(hold_interval),
            "NoiseSpec: hold_interval must be positive");
    require(std::isfinite(offset), "NoiseSpec: offset must be finite");
}

double noise_draw(std::uint64_t seed, std::int64_t k) noexcept {
    const std::uint64_t bits = splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(k));
    const double unit = static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
    return 2.0 * unit - 1.0;
}

double piecewise_noise(const NoiseSpec& spec, double t) noexcept {
    if (spec.amplitude == 0.0) return spec.offset;
    const auto k = static_cast<std::int64_t>(std::floor(t / spec.hold_interval));
    return spec.offset + spec.amplitude * noise_draw(spec.seed, k);
}

double basic_rhs(const LoopParams& p, const std::optional<NoiseSpec>& noise, double t, double y,
                 Forcing forcing) noexcept {
    const double w = p.omega();
    const double s = std::sin(w * t);
    double dy = -p.epsilon * p.b * (1.0 - std::cos(2.0 * w * t)) * y - p.b * y * y * s;
    if (forcing == Forcing::full) dy -= p.b * p.epsilon * p.epsilon * s * s * s;
    if (noise) dy += piecewise_noise(*noise, t) * s;
    return dy;
}

double drift_rhs(const DriftParams& p, const std::optional<NoiseSpec>& noise, double t,
                 double y) noexcept {
    const double w = p.omega();
    const double s = std::sin(w * t);
    double dy = -2.0 * p.epsilon * s * s * y - y * y * s - p.epsilon * p.epsilon * s * s * s +
                p.delta * p.drift(t);
    if (noise) dy -= piecewise_noise(*noise, t) * s;
    return dy;
}

Trajectory::Trajectory(double t0, double period, int samples_per_period,
                       std::vector<double> values)
    : t0_(t0),
      period_(period),
      samples_per_period_(samples_per_period),
      step_(period / samples_per_period),
      values_(std::move(values)) {
    if (!(period > 0.0) || samples_per_period <= 0) {
        throw std::invalid_argument("Trajectory: period and samples_per_period must be positive");
    }
    if (values_.empty()) throw std::invalid_argument("Trajectory: no samples");
}

std::size_t Trajectory::index_of(double t) const {
    const double pos = (t - t0_) / step_;
    const double idx = std::round(pos);
    if (std::abs(pos - idx) > 1e-6 || idx < 0.0) {
        std::ostringstream os;
        os << "time " << t << " is not on the sample grid (step " << step_ << ")";
        throw std::invalid_argument(os.str());
    }
    const auto i = static_cast<std::size_t>(idx);
    if (i >= values_.size()) {
        std::ostringstream os;
        os << "time " << t << " lies beyond trajectory end " << end_time();
        throw HorizonExceeded(t, os.str());
    }
    return i;
}

double sample_shifted(const Trajectory& traj, double t, std::size_t n) {
    const double pos = (t - traj.t0()) / traj.step();
    const double idx = std::round(pos);
    if (std::abs(pos - idx) > 1e-6 || idx < 0.0) {
        throw std::invalid_argument("sample_shifted: t is not on the sample grid");
    }
    const std::size_t i = static_cast<std::size_t>(idx) +
                          n * static_cast<std::size_t>(traj.samples_per_period());
    if (i >= traj.size()) {
        const double need = t + static_cast<double>(n) * traj.period();
        std::ostringstream os;
        os << "sample_shifted: x(t + " << n << "T) needs t_end >= " << need << ", trajectory ends at "
           << traj.end_time();
        throw HorizonExceeded(need, os.str());
    }
    return traj[i];
}

namespace detail {

void throw_diverged(double t, double y) {
    std::ostringstream os;
    os << "integration diverged at t = " << t << " (state " << y << ")";
    throw IntegrationDiverged(t, os.str());
}

std::size_t step_count(double t0, double t_end, double step) {
    return static_cast<std::size_t>(std::ceil((t_end - t0) / step - 1e-9));
}

}  // namespace detail

Trajectory simulate_basic(const LoopParams& params, const std::optional<NoiseSpec>& noise,
                          double t_end, int step_divisor, Forcing forcing) {
    params.validate();
    if (noise) noise->validate();
    const Trajectory y = integrate(
        [&](double t, double v) { return basic_rhs(params, noise, t, v, forcing); },
        params.x_init - params.l_true, 0.0, t_end, params.period, step_divisor);
    std::vector<double> x(y.values().begin(), y.values().end());
    for (double& v : x) v += params.l_true;
    return Trajectory(y.t0(), y.period(), y.samples_per_period(), std::move(x));
}

Trajectory simulate_drift(const DriftParams& params, const std::optional<NoiseSpec>& noise,
                          double t_end, int step_divisor) {
    params.validate();
    if (noise) noise->validate();
    const Trajectory y = integrate(
        [&](double t, double v) { return drift_rhs(params, noise, t, v); }, params.y_init(), 0.0,
        t_end, params.period, step_divisor);
    std::vector<double> x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        x[i] = y[i] + params.l_true + params.drift(y.time(i));
    }
    return Trajectory(y.t0(), y.period(), y.samples_per_period(), std::move(x));
}

Trajectory drift_samples(const DriftParams& params, const Trajectory& like) {
    std::vector<double> q(like.size());
    for (std::size_t i = 0; i < like.size(); ++i) q[i] = params.drift(like.time(i));
    return Trajectory(like.t0(), like.period(), like.samples_per_period(), std::move(q));
}

double homogeneous_factor(const LoopParams& p, double t) noexcept {
    const double eb = p.epsilon * p.b;
    return std::exp(-eb * t + eb / (2.0 * p.omega()) * std::sin(2.0 * p.omega() * t));
}

double initial_constant(const LoopParams& params) {
    const double y0 = params.x_init - params.l_true;
    if (y0 == 0.0) {
        throw SingularSolution("initial_constant: x(0) = L has no Bernoulli representation");
    }
    return 1.0 / y0;
}

namespace {

double forcing_integrand(const LoopParams& p, double s) noexcept {
    return std::sin(p.omega() * s) * homogeneous_factor(p, s);
}

// Simpson panel over [a, a + h].
double simpson_panel(const LoopParams& p, double a, double h) noexcept {
    return h / 6.0 *
           (forcing_integrand(p, a) + 4.0 * forcing_integrand(p, a + 0.5 * h) +
            forcing_integrand(p, a + h));
}

double closed_form(const LoopParams& p, double c_const, double integral, double t) {
    const double denom = c_const + p.b * integral;
    if (std::abs(denom) < kSingularTolerance) {
        std::ostringstream os;
        os << "analytic solution is singular at t = " << t << " (denominator " << denom << ")";
        throw SingularSolution(os.str());
    }
    return p.l_true + homogeneous_factor(p, t) / denom;
}

}  // namespace

double analytic_basic_solution(const LoopParams& params, double c_const, double t,
                               int step_divisor) {
    if (t < 0.0) throw std::invalid_argument("analytic_basic_solution: t must be >= 0");
    const double h = params.period / step_divisor;
    const auto full = static_cast<std::size_t>(std::floor(t / h + 1e-9));
    double integral = 0.0;
    for (std::size_t i = 0; i < full; ++i) {
        integral += simpson_panel(params, static_cast<double>(i) * h, h);
    }
    const double rest = t - static_cast<double>(full) * h;
    if (rest > 0.0) integral += simpson_panel(params, static_cast<double>(full) * h, rest);
    return closed_form(params, c_const, integral, t);
}

Trajectory analytic_basic_trajectory(const LoopParams& params, double c_const, double t_end,
                                     int step_divisor) {
    const double h = params.period / step_divisor;
    const std::size_t n = detail::step_count(0.0, t_end, h);
    std::vector<double> x(n + 1);
    double integral = 0.0;
    x[0] = closed_form(params, c_const, 0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        integral += simpson_panel(params, static_cast<double>(i) * h, h);
        x[i + 1] = closed_form(params, c_const, integral, static_cast<double>(i + 1) * h);
    }
    return Trajectory(0.0, params.period, step_divisor, std::move(x));
}

}  // namespace esaccel
