#include <esaccel/perturbation.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace esaccel {

namespace {

int checked_divisor(int step_divisor) {
    if (step_divisor <= 0) throw std::invalid_argument("step_divisor must be positive");
    return step_divisor;
}

// Truncated Cauchy product: sum_{j+k=m, j,k<=n_max} z_j z_k.
double cauchy(std::span<const double> z, int m, int n_max) {
    double sum = 0.0;
    for (int j = std::max(0, m - n_max); j <= std::min(m, n_max); ++j) {
        sum += z[static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(m - j)];
    }
    return sum;
}

}  // namespace

std::vector<SeriesTerm> solve_series_terms(const DriftParams& params, int max_order, double t_end,
                                           int step_divisor) {
    params.validate();
    if (max_order < 0) throw std::invalid_argument("solve_series_terms: max_order must be >= 0");
    const double w = params.omega();
    const double two_eps = 2.0 * params.epsilon;
    const auto dim = static_cast<std::size_t>(max_order) + 1;

    auto rhs = [&](double t, std::span<const double> z, std::span<double> dz) {
        const double s = std::sin(w * t);
        const double gain = two_eps * s * s;
        const double q = params.drift(t);
        dz[0] = gain * z[0] + s;
        for (std::size_t n = 1; n < dim; ++n) {
            dz[n] = gain * z[n] - q * cauchy(z, static_cast<int>(n) - 1, static_cast<int>(n) - 1);
        }
    };
    std::vector<double> y0(dim, 0.0);
    y0[0] = params.z_init;
    auto columns = integrate_system(rhs, std::move(y0), 0.0, t_end, params.period,
                                    checked_divisor(step_divisor));

    std::vector<SeriesTerm> terms;
    terms.reserve(dim);
    for (std::size_t n = 0; n < dim; ++n) {
        terms.push_back({static_cast<int>(n), std::move(columns[n])});
    }
    return terms;
}

double series_sum(const std::vector<SeriesTerm>& terms, double delta, double t) {
    double sum = 0.0;
    double power = 1.0;
    for (const auto& term : terms) {
        sum += term.samples.at(t) * power;
        power *= delta;
    }
    return sum;
}

Trajectory solve_reciprocal_riccati(const DriftParams& params, double coupling, double t_end,
                                    int step_divisor) {
    params.validate();
    const double w = params.omega();
    auto rhs = [&](double t, double z) {
        const double s = std::sin(w * t);
        return 2.0 * params.epsilon * s * s * z + s - coupling * params.drift(t) * z * z;
    };
    return integrate(rhs, params.z_init, 0.0, t_end, params.period, checked_divisor(step_divisor));
}

Trajectory series_remainder(const DriftParams& params, int order, double coupling, double t_end,
                            int step_divisor) {
    params.validate();
    if (order < 0) throw std::invalid_argument("series_remainder: order must be >= 0");
    const double w = params.omega();
    const double two_eps = 2.0 * params.epsilon;
    const auto n_terms = static_cast<std::size_t>(order) + 1;

    // State: z_0 .. z_N, then R.
    auto rhs = [&](double t, std::span<const double> u, std::span<double> du) {
        const double s = std::sin(w * t);
        const double gain = two_eps * s * s;
        const double q = params.drift(t);
        const auto z = u.first(n_terms);
        du[0] = gain * z[0] + s;
        for (std::size_t n = 1; n < n_terms; ++n) {
            du[n] = gain * z[n] - q * cauchy(z, static_cast<int>(n) - 1, static_cast<int>(n) - 1);
        }
        double partial = 0.0;
        double power = 1.0;
        for (std::size_t n = 0; n < n_terms; ++n) {
            partial += power * z[n];
            power *= coupling;
        }
        double excess = 0.0;
        power = std::pow(coupling, order);
        for (int m = order; m <= 2 * order; ++m) {
            excess += power * cauchy(z, m, order);
            power *= coupling;
        }
        const double r = u[n_terms];
        du[n_terms] = gain * r - coupling * q * (r * (2.0 * partial + r) + excess);
    };
    std::vector<double> y0(n_terms + 1, 0.0);
    y0[0] = params.z_init;
    auto columns = integrate_system(rhs, std::move(y0), 0.0, t_end, params.period,
                                    checked_divisor(step_divisor));
    return std::move(columns.back());
}

GammaReport gamma_criterion(const DriftParams& params) {
    if (!(params.delta > 0.0)) throw std::invalid_argument("gamma_criterion: delta must be positive");
    const double w = params.omega();
    const double eps = params.epsilon;
    const double q0 = std::abs(params.q0);
    const double z0 = std::abs(params.z_init);
    GammaReport r{};
    r.horizon = 1.0 / (2.0 * params.delta);
    r.gamma = 24.0 * std::exp(2.0 * eps / w) * q0 * (z0 + 1.0 / params.delta);
    r.c_const = 4.0 / (std::numbers::e * params.delta) * std::exp(eps / w) * q0;
    r.alpha0 = z0 * std::exp(eps / (2.0 * w) + eps * r.horizon) + 2.0 * std::exp(eps / w) * r.horizon;
    r.convergent = r.gamma < 1.0;
    return r;
}

AlphaSequence alpha_sequence(double c_const, double alpha0, std::size_t n_max) {
    if (c_const < 0.0 || alpha0 < 0.0) {
        throw std::invalid_argument("alpha_sequence: C and alpha0 must be nonnegative");
    }
    AlphaSequence out;
    out.values.reserve(n_max + 1);
    out.values.push_back(alpha0);
    for (std::size_t n = 0; n < n_max; ++n) {
        double sum = 0.0;
        for (std::size_t j = 0; j <= n; ++j) sum += out.values[j] * out.values[n - j];
        const double next = c_const * sum;
        if (!std::isfinite(next)) {
            out.overflow_at = n + 1;
            break;
        }
        out.values.push_back(next);
    }
    return out;
}

double generating_function_coefficient(double c_const, double alpha0, std::size_t n) {
    if (!(c_const > 0.0)) throw std::invalid_argument("generating_function_coefficient: C must be positive");
    // binom(1/2, k) (-4 C alpha0)^k built up one factor at a time, k = n + 1.
    const double x = -4.0 * c_const * alpha0;
    double term = 1.0;
    for (std::size_t k = 1; k <= n + 1; ++k) {
        term *= (0.5 - static_cast<double>(k - 1)) / static_cast<double>(k) * x;
    }
    return -term / (2.0 * c_const);
}

double generating_function_asymptotic(double c_const, double alpha0, std::size_t n) {
    const double nn = static_cast<double>(n);
    const double log_value = nn * std::log(4.0 * c_const) + (nn + 1.0) * std::log(alpha0) -
                             0.5 * std::log(std::numbers::pi) - 1.5 * std::log(nn + 1.0);
    return std::exp(log_value);
}

ScaledPeriodicDecomposition decompose_scaled_periodic(const Trajectory& y, double a, double shift) {
    if (!(a > 0.0) || a == 1.0) throw std::invalid_argument("decompose_scaled_periodic: need a > 0, a != 1");
    const double steps = shift / y.step();
    const auto m = static_cast<std::size_t>(std::llround(steps));
    if (m == 0 || std::abs(steps - static_cast<double>(m)) > 1e-6) {
        throw std::invalid_argument("decompose_scaled_periodic: shift must be a positive whole number of steps");
    }
    if (y.size() <= m) throw HorizonExceeded(y.t0() + 2.0 * shift, "decompose_scaled_periodic: need more than one shift of data");

    const auto v = y.values();
    double scale = 1.0;
    for (double s : v) scale = std::max(scale, std::abs(s));

    std::vector<double> diffs(v.size() - m);
    for (std::size_t i = m; i < v.size(); ++i) diffs[i - m] = v[i] - a * v[i - m];
    std::vector<double> sorted = diffs;
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    double c = *mid;
    if (sorted.size() % 2 == 0) {
        c = 0.5 * (c + *std::max_element(sorted.begin(), mid));
    }
    double constant_residual = 0.0;
    for (double d : diffs) constant_residual = std::max(constant_residual, std::abs(d - c));
    const double tol = 1e-8 * scale;
    if (constant_residual > tol) {
        std::ostringstream os;
        os << "decompose_scaled_periodic: y(x) - a y(x - L) varies by " << constant_residual;
        throw HypothesisViolated(constant_residual, os.str());
    }

    const double alpha = -c / (a - 1.0);
    std::vector<double> p(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        p[i] = std::pow(a, -y.time(i) / shift) * (v[i] - alpha);
    }
    double p_scale = 1.0;
    for (double s : p) p_scale = std::max(p_scale, std::abs(s));
    double periodic_residual = 0.0;
    for (std::size_t i = m; i < p.size(); ++i) {
        periodic_residual = std::max(periodic_residual, std::abs(p[i] - p[i - m]));
    }
    if (periodic_residual > 1e-8 * p_scale) {
        std::ostringstream os;
        os << "decompose_scaled_periodic: P is not periodic, max jump " << periodic_residual;
        throw HypothesisViolated(periodic_residual, os.str());
    }
    return {alpha, Trajectory(y.t0(), y.period(), y.samples_per_period(), std::move(p)),
            constant_residual, periodic_residual};
}

std::vector<double> annihilator_coefficients(std::span<const double> roots) {
    std::vector<double> c{1.0};
    for (double r : roots) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = std::move(next);
    }
    return c;
}

std::vector<double> series_term_ratios(const DriftParams& params, int order) {
    const double a = params.growth_factor();
    const double b = params.decay_factor();
    switch (order) {
        case 0: return {1.0, a};
        case 1: return {a, b, a * b, a * a * b};
        case 2: {
            const double b2 = b * b;
            return {a, b, a * b, a * a * b, b2, a * b2, a * a * b2, a * a * a * b2};
        }
        default: break;
    }
    throw std::invalid_argument("series_term_ratios: only orders 0..2 are tabulated");
}

double annihilator_residual(const Trajectory& f, std::span<const double> roots, double t_begin,
                            double t_end) {
    const auto c = annihilator_coefficients(roots);
    const std::size_t spp = static_cast<std::size_t>(f.samples_per_period());
    const std::size_t first = f.index_of(t_begin);
    const std::size_t last = f.index_of(t_end);
    const std::size_t reach = (c.size() - 1) * spp;
    if (last + reach >= f.size()) {
        throw HorizonExceeded(t_end + static_cast<double>(c.size() - 1) * f.period(),
                              "annihilator_residual: samples do not reach the last shift");
    }
    double worst = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        double sum = 0.0;
        double mag = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double term = c[k] * f[i + k * spp];
            sum += term;
            mag += std::abs(term);
        }
        if (mag > 0.0) worst = std::max(worst, std::abs(sum) / mag);
    }
    return worst;
}

double partial_sum_basel(int n) {
    if (n < 1) throw std::invalid_argument("partial_sum_basel: n must be >= 1");
    double sum = 0.0;
    for (int j = n; j >= 1; --j) {
        const double jj = static_cast<double>(j);
        sum += 1.0 / (jj * jj);
    }
    return sum;
}

double richardson_accelerate(const std::function<double(int)>& s, int n) {
    if (n < 1) throw std::invalid_argument("richardson_accelerate: n must be >= 1");
    const double n0 = n, n1 = n + 1.0, n2 = n + 2.0;
    return 0.5 * (n2 * n2 * s(n + 2) - 2.0 * n1 * n1 * s(n + 1) + n0 * n0 * s(n));
}

}  // namespace esaccel
