// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <esaccel/dynamics.hpp>
#include <esaccel/extraction.hpp>
#include <esaccel/perturbation.hpp>
#include <esaccel/report.hpp>
#include <esaccel/scenarios.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace esaccel;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    // Records a sub-check; failed ones are marked in the detail text.
    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        if (detail.tellp() > 0) detail << "; ";
        detail << (ok ? "" : "FAILED ") << what;
    }
};

std::string num(double v) { return format_number(v); }

ScenarioConfig preset(const char* name) { return load_scenario(resolve_scenario(name)); }

Verdict basel() {
    Verdict v;
    const double s10 = partial_sum_basel(10);
    const double acc = richardson_accelerate(partial_sum_basel, 10);
    const double limit = std::numbers::pi * std::numbers::pi / 6.0;
    v.check(s10 >= 1.54976 && s10 <= 1.54977, "S_10 = " + num(s10));
    v.check(std::abs(acc - 1.64481) <= 5e-6, "accelerated S_10 = " + num(acc));
    v.check(std::abs(limit - 1.64493) <= 5e-6, "limit = " + num(limit));
    return v;
}

Verdict theta_extraction() {
    Verdict v;
    const auto r = run_scenario(preset("fig2"));
    const double exact = std::exp(-0.06);
    const double t_from = 2.0 * r.config.loop.period;
    double worst = 0.0;
    std::size_t checked = 0, invalid = 0;
    for (std::size_t i = 0; i < r.series.size(); ++i) {
        if (r.series.t_grid[i] < t_from) continue;
        ++checked;
        if (std::isnan(r.series.theta_hat[i])) {
            ++invalid;
            continue;
        }
        worst = std::max(worst, std::abs(r.series.theta_hat[i] - exact));
    }
    v.check(checked > 0 && invalid == 0, std::to_string(checked) + " points with t >= 2T, " +
                                             std::to_string(invalid) + " without theta");
    v.check(worst < 1e-3, "max |theta_hat - exp(-0.06)| = " + num(worst));
    return v;
}

Verdict epsilon_band() {
    Verdict v;
    auto c = preset("fig2");
    const double eps = c.loop.epsilon;
    const double full = run_scenario(c).summary.l_residual_max_tail;
    c.loop.epsilon = eps / 2;
    const double half = run_scenario(c).summary.l_residual_max_tail;
    v.check(full <= 10 * eps * eps, "tail residual " + num(full) + " vs 10 eps^2 = " + num(10 * eps * eps));
    const double ratio = full / half;
    v.check(ratio >= 3.0 && ratio <= 5.0, "halving eps shrinks it by " + num(ratio));
    return v;
}

Verdict closed_form() {
    Verdict v;
    LoopParams p;
    const auto rk = simulate_basic(p, std::nullopt, 30.0, kDefaultStepDivisor, Forcing::drop_second_order);
    const auto exact = analytic_basic_trajectory(p, initial_constant(p), 30.0, kDefaultStepDivisor);
    double worst = 0.0;
    for (std::size_t i = 0; i < rk.size(); ++i) worst = std::max(worst, std::abs(rk[i] - exact[i]));
    v.check(rk.size() == exact.size() && worst < 1e-8, "max |RK4 - closed form| on [0, 30] = " + num(worst));
    return v;
}

Verdict exact_recovery() {
    Verdict v;
    std::mt19937_64 rng(20240501);
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto sign = [&] { return uni(0, 1) < 0.5 ? -1.0 : 1.0; };

    // x_n = L + theta^n a / (c + theta^n X)
    double worst_l = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double l = uni(-2, 2), c = sign() * uni(1, 3), x = uni(-0.5, 0.5) * std::abs(c);
        const double theta = uni(0.05, 0.95), a = uni(0.1, 2);
        double s[3];
        for (int n = 0; n < 3; ++n) {
            const double tn = std::pow(theta, n);
            s[n] = l + tn * a / (c + tn * x);
        }
        const double err = std::abs(extract_l_basic(s[0], s[1], s[2], theta) - l) / (kEps * std::max(1.0, std::abs(l)));
        worst_l = std::max(worst_l, err);
    }
    v.check(worst_l <= 1e3, "L: worst error " + num(worst_l) + " eps (bound 1000)");

    double worst_theta = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double theta = uni(0.05, 0.95), l = uni(-1, 1);
        const double a = sign() * std::exp(uni(std::log(0.1), std::log(10.0)));
        const auto g = compute_g({l + a, l + a * theta, l + a * theta * theta, l + a * theta * theta * theta});
        worst_theta = std::max(worst_theta, std::abs(extract_theta(g.g) - theta));
    }
    v.check(worst_theta < 1e-10, "theta: worst error " + num(worst_theta));
    return v;
}

Verdict gamma_reproduction() {
    Verdict v;
    const auto r = gamma_criterion(DriftParams{0.1, 0.4, 0.01, 3.0, 0.0, 0.5});
    v.check(std::abs(r.gamma - 0.79) <= 0.01, "Gamma = " + num(r.gamma));
    return v;
}

std::string residuals(const RunSummary& s) {
    return num(s.l_residual_max_tail) + " / " + num(s.classical_residual_max_tail);
}

Verdict drift_acceleration() {
    Verdict v;
    const auto fig7 = run_scenario(preset("fig7"));
    v.check(fig7.summary.dominant, "fig7 tail accelerated / classical = " + residuals(fig7.summary));
    for (const auto& e : sweep(preset("fig8"), "loop.delta", {1.0, 0.1, 1e-9})) {
        const bool ok = e.result && e.result->summary.dominant;
        v.check(ok, "eps .2 delta " + num(e.value) + ": " + (e.result ? residuals(e.result->summary) : e.error));
    }
    for (const auto& e : sweep(preset("fig8-breakdown"), "loop.q0", {0.4, 0.05})) {
        const bool ok = e.result && e.result->summary.breakdown;
        v.check(ok, "q0 " + num(e.value) + " breakdown: " + (e.result ? residuals(e.result->summary) : e.error));
    }
    return v;
}

struct NoiseVerdicts {
    bool low_instant_ok, mid_instant_fails, mid_averaged_ok, high_breakdown;
    bool operator==(const NoiseVerdicts&) const = default;
};

Verdict noise_regimes() {
    Verdict v;
    const auto base = preset("fig4");
    const double eps = base.loop.epsilon;
    std::vector<NoiseVerdicts> all;
    for (double dt : {0.25, 0.5, 1.0}) {
        for (double offset : {0.0, eps * eps}) {
            auto c = base;
            c.noise->hold_interval = dt;
            c.noise->offset = offset;
            const auto rep = noise_breakdown_study(c);
            const NoiseVerdicts nv{rep[0].instant.dominant, !rep[1].instant.dominant, rep[1].averaged[2].dominant,
                                   rep[2].instant.breakdown};
            all.push_back(nv);
            if (dt == 0.5 && offset == 0.0) {
                v.check(nv.low_instant_ok, "N0 = eps^(5/2) instant: " + residuals(rep[0].instant));
                v.check(nv.mid_instant_fails, "N0 = eps^2 instant not dominant: " + residuals(rep[1].instant));
                v.check(nv.mid_averaged_ok, "N0 = eps^2 averaged k=3: " + residuals(rep[1].averaged[2]));
                v.check(nv.high_breakdown, "N0 = eps breakdown: " + residuals(rep[2].instant));
            }
        }
    }
    const bool invariant = std::all_of(all.begin(), all.end(), [&](const NoiseVerdicts& n) { return n == all[0]; });
    std::string pattern;
    for (const auto& n : all) {
        pattern += std::string(n.low_instant_ok ? "1" : "0") + (n.mid_instant_fails ? "1" : "0") +
                   (n.mid_averaged_ok ? "1" : "0") + (n.high_breakdown ? "1" : "0") + " ";
    }
    pattern.pop_back();
    v.check(invariant, "verdicts over dt {.25,.5,1} x offset {0, eps^2}: " + pattern);
    return v;
}

double max_abs_until(const Trajectory& tr, double t_max) {
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size() && tr.time(i) <= t_max * (1 + 1e-12); ++i) {
        worst = std::max(worst, std::abs(tr[i]));
    }
    return worst;
}

Verdict perturbation_series() {
    Verdict v;
    const DriftParams d{0.1, 0.4, 0.01, 3.0, 0.0, 0.5};
    const double horizon = 1.0 / (2.0 * d.delta);
    const auto terms = solve_series_terms(d, 4, horizon);
    const auto full = solve_reciprocal_riccati(d, d.delta, horizon);
    double gap = 0.0;
    for (std::size_t i = 0; i < full.size(); ++i) {
        gap = std::max(gap, std::abs(series_sum(terms, d.delta, full.time(i)) - full[i]));
    }
    v.check(gap <= 1e-4, "N = 4 vs full solve on [0, 1/(2 delta)]: " + num(gap));
    // The discrepancy is near rounding level, so it is taken from the remainder equation.
    const double r1 = max_abs_until(series_remainder(d, 4, d.delta, horizon), horizon);
    const double r2 = max_abs_until(series_remainder(d, 4, d.delta / 2, horizon), horizon);
    const double ratio = r1 / r2;
    v.check(ratio >= 24.0 && ratio <= 40.0, "halving delta shrinks it by " + num(ratio));
    return v;
}

Verdict majorization() {
    Verdict v;
    const DriftParams d{0.1, 0.4, 0.01, 3.0, 0.0, 0.5};
    const auto g = gamma_criterion(d);
    const auto alpha = alpha_sequence(g.c_const, g.alpha0, 20);
    double worst = 0.0;
    for (std::size_t n = 0; n <= 20 && n < alpha.values.size(); ++n) {
        const double exact = generating_function_coefficient(g.c_const, g.alpha0, n);
        worst = std::max(worst, std::abs(alpha.values[n] - exact) / std::abs(exact));
    }
    v.check(alpha.values.size() == 21 && worst <= 1e-9, "alpha vs generating function, n <= 20: " + num(worst));

    const auto terms = solve_series_terms(d, 4, g.horizon);
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < terms.size(); ++n) {
        slack = std::min(slack, alpha.values[n] / max_abs_until(terms[n].samples, g.horizon));
    }
    v.check(slack >= 1.0, "min alpha_n / sup|z_n| over n <= 4: " + num(slack));

    const double ratio =
        generating_function_coefficient(g.c_const, g.alpha0, 50) / generating_function_asymptotic(g.c_const, g.alpha0, 50);
    v.check(std::abs(ratio - 1.0) <= 0.05, "Stirling ratio at n = 50: " + num(ratio));
    return v;
}

Verdict determinism() {
    Verdict v;
    std::size_t differing = 0;
    const auto names = list_presets();
    for (const auto& n : names) {
        const auto c = preset(n.c_str());
        const auto a = trace_csv(run_scenario(c));
        const auto b = trace_csv(run_scenario(c));
        if (a != b || svg_from_csv(a, n) != svg_from_csv(b, n)) ++differing;
    }
    v.check(!names.empty() && differing == 0,
            std::to_string(names.size()) + " presets run twice, " + std::to_string(differing) + " differ");
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"Basel reproduction", basel},
        {"theta extraction", theta_extraction},
        {"eps^2 band", epsilon_band},
        {"closed-form oracle", closed_form},
        {"exact-model recovery", exact_recovery},
        {"Gamma reproduction", gamma_reproduction},
        {"drift acceleration", drift_acceleration},
        {"noise regimes", noise_regimes},
        {"perturbation series", perturbation_series},
        {"majorizing sequence", majorization},
        {"determinism", determinism},
    };
    int passed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.check(false, std::string("threw: ") + e.what());
        }
        passed += v.pass ? 1 : 0;
        std::printf("%s  %2zu %-22s %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.str().c_str());
    }
    std::printf("%d/%zu criteria passed\n", passed, criteria.size());
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
