#include "property.hpp"

#include <esaccel/perturbation.hpp>

#include <cmath>
#include <limits>
#include <numbers>

using namespace esaccel;
using esaccel::testing::for_all;
using esaccel::testing::Gen;

namespace {

double max_abs_on(const Trajectory& tr, double t_max) {
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size() && tr.time(i) <= t_max + 1e-12; ++i) {
        worst = std::max(worst, std::abs(tr[i]));
    }
    return worst;
}

}  // namespace

TEST_SUITE("perturbation") {

TEST_CASE("series terms vanish without drift") {
    DriftParams d;
    d.q0 = 0.0;
    const auto terms = solve_series_terms(d, 3, 6.0, 256);
    REQUIRE(terms.size() == 4);
    for (std::size_t n = 1; n < terms.size(); ++n) {
        CHECK(terms[n].order == static_cast<int>(n));
        for (double v : terms[n].samples.values()) CHECK(v == 0.0);
    }
    CHECK(terms[0].samples[0] == d.z_init);
}

TEST_CASE("first-order term is driven by -q z0^2") {
    // z_1' - 2 eps sin^2 z_1 = -q z_0^2, checked by central differences.
    DriftParams d;
    const auto terms = solve_series_terms(d, 1, 6.0, 2048);
    const auto& z0 = terms[0].samples;
    const auto& z1 = terms[1].samples;
    const double h = z1.step();
    const double w = d.omega();
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < z1.size(); i += 37) {
        const double t = z1.time(i);
        const double dz = (z1[i + 1] - z1[i - 1]) / (2 * h);
        const double s = std::sin(w * t);
        const double lhs = dz - 2 * d.epsilon * s * s * z1[i];
        worst = std::max(worst, std::abs(lhs + d.drift(t) * z0[i] * z0[i]));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("series sum") {
    DriftParams d;
    const auto terms = solve_series_terms(d, 2, 3.0, 64);
    const double t = 1.5;
    CHECK(series_sum({terms[0]}, 0.4, t) == terms[0].samples.at(t));
    CHECK(series_sum(terms, 0.0, t) == terms[0].samples.at(t));
    const double expected = terms[0].samples.at(t) + 0.4 * terms[1].samples.at(t) + 0.16 * terms[2].samples.at(t);
    CHECK(series_sum(terms, 0.4, t) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("truncated series matches the full Riccati solve on the convergent preset") {
    DriftParams d;
    const double horizon = 1.0 / (2.0 * d.delta);
    const auto terms = solve_series_terms(d, 3, horizon, 2048);
    const auto full = solve_reciprocal_riccati(d, d.delta, horizon, 2048);
    double worst = 0.0;
    for (std::size_t i = 0; i < full.size() && full.time(i) <= horizon; ++i) {
        worst = std::max(worst, std::abs(series_sum(terms, d.delta, full.time(i)) - full[i]));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("remainder equation agrees with subtraction where both resolve it") {
    DriftParams d;
    d.q0 = 0.2;  // large enough that the N = 1 remainder is far above rounding
    const double horizon = 1.25;
    const auto terms = solve_series_terms(d, 1, horizon, 2048);
    const auto full = solve_reciprocal_riccati(d, d.delta, horizon, 2048);
    const auto rem = series_remainder(d, 1, d.delta, horizon, 2048);
    for (std::size_t i = 0; i < full.size(); i += 50) {
        const double direct = full[i] - series_sum(terms, d.delta, full.time(i));
        CHECK(rem[i] == doctest::Approx(direct).epsilon(1e-6).scale(1e-12));
    }
}

TEST_CASE("remainder scales like coupling^(N+1)") {
    DriftParams d;
    const double horizon = 1.0 / (2.0 * d.delta);
    for (int order : {2, 4}) {
        CAPTURE(order);
        const double r1 = max_abs_on(series_remainder(d, order, d.delta, horizon), horizon);
        const double r2 = max_abs_on(series_remainder(d, order, d.delta / 2, horizon), horizon);
        const double ratio = r1 / r2;
        const double nominal = std::pow(2.0, order + 1);
        CAPTURE(ratio);
        CHECK(ratio > 0.75 * nominal);
        CHECK(ratio < 1.25 * nominal);
    }
}

TEST_CASE("gamma criterion") {
    DriftParams d;
    const auto r = gamma_criterion(d);
    CHECK(r.gamma == doctest::Approx(0.79).epsilon(0.01));
    CHECK(r.convergent);
    CHECK(r.horizon == 1.25);
    const double w = d.omega();
    CHECK(r.c_const == doctest::Approx(4.0 / (std::numbers::e * 0.4) * std::exp(0.1 / w) * 0.01));
    CHECK(r.alpha0 == doctest::Approx(0.5 * std::exp(0.1 / (2 * w) + 0.125) + 2 * std::exp(0.1 / w) * 1.25));

    DriftParams none = d;
    none.q0 = 0.0;
    CHECK(gamma_criterion(none).gamma == 0.0);
    CHECK(gamma_criterion(none).convergent);

    DriftParams broken{0.01, 0.1, 0.4, 3.0, 0.0, 0.5};
    CHECK(gamma_criterion(broken).gamma > 1.0);
    CHECK_FALSE(gamma_criterion(broken).convergent);
}

TEST_CASE("property: gamma monotonicity") {
    for_all(500, 21, [](Gen& g) {
        DriftParams d{g.uniform(0.01, 0.5), g.uniform(0.05, 2.0), g.uniform(-0.1, 0.1), g.uniform(1.0, 6.0),
                      0.0, g.sign() * g.uniform(0.1, 2.0)};
        const double base = gamma_criterion(d).gamma;
        auto grown = [&](auto mutate) {
            DriftParams e = d;
            mutate(e);
            return gamma_criterion(e).gamma;
        };
        const double f = g.uniform(1.01, 2.0);
        CHECK(grown([&](DriftParams& e) { e.q0 *= f; }) >= base);
        CHECK(grown([&](DriftParams& e) { e.z_init *= f; }) >= base);
        CHECK(grown([&](DriftParams& e) { e.epsilon *= f; }) >= base);
        CHECK(grown([&](DriftParams& e) { e.delta *= f; }) <= base);
        CHECK(grown([&](DriftParams& e) { e.period /= f; }) <= base);  // larger omega
    });
}

TEST_CASE("alpha recursion") {
    const auto zero = alpha_sequence(0.0, 2.5, 4);
    CHECK(zero.values == std::vector<double>{2.5, 0, 0, 0, 0});
    const double c = 0.3, a0 = 1.7;
    const auto seq = alpha_sequence(c, a0, 3);
    CHECK(seq.values[1] == doctest::Approx(c * a0 * a0));
    CHECK(seq.values[2] == doctest::Approx(2 * c * c * a0 * a0 * a0));
    CHECK_FALSE(seq.overflow_at);
    const auto big = alpha_sequence(1e10, 1e10, 50);
    REQUIRE(big.overflow_at);
    CHECK(big.values.size() == *big.overflow_at);
}

TEST_CASE("generating function coefficients") {
    const double c = 0.0386, a0 = 3.2;
    CHECK(generating_function_coefficient(c, a0, 0) == doctest::Approx(a0).epsilon(1e-14));
    const auto seq = alpha_sequence(c, a0, 20);
    for (std::size_t n = 0; n <= 20; ++n) {
        CAPTURE(n);
        const double exact = generating_function_coefficient(c, a0, n);
        CHECK(std::abs(seq.values[n] - exact) <= 1e-9 * std::abs(exact));
    }
    const double ratio = generating_function_coefficient(c, a0, 50) / generating_function_asymptotic(c, a0, 50);
    CHECK(std::abs(ratio - 1.0) < 0.05);
    const double early = generating_function_coefficient(c, a0, 5) / generating_function_asymptotic(c, a0, 5);
    CHECK(std::abs(early - 1.0) > std::abs(ratio - 1.0));
}

TEST_CASE("property: generating function satisfies C x A^2 - A + alpha0 = 0") {
    for_all(200, 22, [](Gen& g) {
        const double c = g.uniform(0.01, 1.0), a0 = g.uniform(0.1, 3.0);
        const double radius = 1.0 / (4 * c * a0);
        const double x = g.uniform(0.0, 0.5) * radius;
        const auto seq = alpha_sequence(c, a0, 200);
        double sum = 0.0, power = 1.0;
        for (double v : seq.values) {
            sum += v * power;
            power *= x;
        }
        const double closed = x == 0.0 ? a0 : (1 - std::sqrt(1 - 4 * c * a0 * x)) / (2 * c * x);
        CHECK(std::abs(sum - closed) < 1e-9 * closed);
        CHECK(std::abs(c * x * sum * sum - sum + a0) < 1e-9 * a0);
    });
}

TEST_CASE("majorization sup |z_n| <= alpha_n on the convergent preset") {
    DriftParams d;
    const auto report = gamma_criterion(d);
    const auto terms = solve_series_terms(d, 4, report.horizon);
    const auto alpha = alpha_sequence(report.c_const, report.alpha0, 4);
    for (std::size_t n = 0; n < terms.size(); ++n) {
        CAPTURE(n);
        CHECK(max_abs_on(terms[n].samples, report.horizon) <= alpha.values[n]);
    }
}

TEST_CASE("scaled-periodic decomposition") {
    const double period = 2.0;
    const int spp = 200;
    std::vector<double> v;
    for (int i = 0; i <= 3 * spp; ++i) {
        const double x = i * period / spp;
        v.push_back(7.0 + std::pow(2.0, x / period) * std::cos(2 * std::numbers::pi * x / period));
    }
    const auto dec = decompose_scaled_periodic(Trajectory(0.0, period, spp, v), 2.0, period);
    CHECK(dec.alpha == doctest::Approx(7.0).epsilon(1e-12));
    for (std::size_t i = 0; i < dec.p_samples.size(); i += 13) {
        CHECK(dec.p_samples[i] ==
              doctest::Approx(std::cos(2 * std::numbers::pi * dec.p_samples.time(i) / period)).scale(1).epsilon(1e-10));
    }

    const auto flat = decompose_scaled_periodic(Trajectory(0.0, 1.0, 10, std::vector<double>(31, 4.0)), 0.5, 1.0);
    CHECK(flat.alpha == doctest::Approx(4.0));
    for (double p : flat.p_samples.values()) CHECK(std::abs(p) < 1e-14);

    std::vector<double> bad(31);
    for (int i = 0; i <= 30; ++i) bad[static_cast<std::size_t>(i)] = i * i * 0.01;
    CHECK_THROWS_AS((void)decompose_scaled_periodic(Trajectory(0.0, 1.0, 10, bad), 0.5, 1.0), HypothesisViolated);
}

TEST_CASE("property: decomposition round trip") {
    for_all(100, 23, [](Gen& g) {
        const double period = g.uniform(0.5, 4.0), a = std::exp(g.uniform(-1.0, 1.0));
        const double alpha = g.uniform(-5, 5);
        if (std::abs(a - 1.0) < 1e-3) return;
        const double c1 = g.uniform(-1, 1), s2 = g.uniform(-1, 1), c0 = g.uniform(-1, 1);
        auto p = [&](double x) {
            const double ph = 2 * std::numbers::pi * x / period;
            return c0 + c1 * std::cos(ph) + s2 * std::sin(2 * ph);
        };
        const int spp = 64;
        std::vector<double> v;
        for (int i = 0; i <= 4 * spp; ++i) {
            const double x = i * period / spp;
            v.push_back(alpha + std::pow(a, x / period) * p(x));
        }
        const auto dec = decompose_scaled_periodic(Trajectory(0.0, period, spp, v), a, period);
        CHECK(std::abs(dec.alpha - alpha) < 1e-10 * (1 + std::abs(alpha)));
        for (std::size_t i = 0; i < dec.p_samples.size(); ++i) {
            CHECK(std::abs(dec.p_samples[i] - p(dec.p_samples.time(i))) < 1e-10 * (1 + std::abs(alpha)));
        }
    });
}

TEST_CASE("structural decay of the series terms") {
    DriftParams d;
    const double t_end = 12 * d.period;
    const auto terms = solve_series_terms(d, 2, t_end);
    // z_0 divided by its homogeneous factor has a derivative that shrinks by exp(-eps T) per period
    const double w = d.omega();
    std::vector<double> y0(terms[0].samples.size());
    for (std::size_t i = 0; i < y0.size(); ++i) {
        const double t = terms[0].samples.time(i);
        y0[i] = terms[0].samples[i] * std::exp(-d.epsilon * t + d.epsilon * std::sin(2 * w * t) / (2 * w));
    }
    const Trajectory scaled(0.0, d.period, terms[0].samples.samples_per_period(), y0);
    CHECK_NOTHROW((void)decompose_scaled_periodic(scaled, std::exp(-d.epsilon * d.period), d.period));

    for (int n = 0; n <= 2; ++n) {
        CAPTURE(n);
        const auto ratios = series_term_ratios(d, n);
        const double window_end = t_end - static_cast<double>(ratios.size() + 1) * d.period;
        const double residual =
            annihilator_residual(terms[static_cast<std::size_t>(n)].samples, ratios, 0.0, window_end);
        CHECK(residual < 1e-8);
        // dropping the homogeneous growth mode must leave a visible residual
        const std::vector<double> fewer(ratios.begin() + 1, ratios.end());
        CHECK(annihilator_residual(terms[static_cast<std::size_t>(n)].samples, fewer, 0.0, 3.0) > 1e-6);
    }
}

TEST_CASE("annihilator coefficients") {
    const std::vector<double> roots{2.0, 3.0};
    CHECK(annihilator_coefficients(roots) == std::vector<double>{6.0, -5.0, 1.0});
    CHECK(annihilator_coefficients({}) == std::vector<double>{1.0});
}

TEST_CASE("Basel partial sums and their acceleration") {
    CHECK(partial_sum_basel(1) == 1.0);
    const double s10 = partial_sum_basel(10);
    CHECK(s10 >= 1.54976);
    CHECK(s10 <= 1.54977);
    const double acc = richardson_accelerate(partial_sum_basel, 10);
    CHECK(std::abs(acc - 1.64481) <= 5e-6);
    CHECK(std::abs(partial_sum_basel(1000000) - std::numbers::pi * std::numbers::pi / 6) < 1.1e-6);
    CHECK(std::abs(richardson_accelerate(partial_sum_basel, 100) - std::numbers::pi * std::numbers::pi / 6) < 1e-6);
    CHECK_THROWS_AS((void)partial_sum_basel(0), std::invalid_argument);
}

TEST_CASE("property: Richardson step is exact on L + a/n + b/n^2") {
    for_all(500, 24, [](Gen& g) {
        const double l = g.uniform(-10, 10), a = g.uniform(-10, 10), b = g.uniform(-10, 10);
        const int n = g.integer(1, 1000);
        auto s = [&](int k) { return l + a / k + b / (static_cast<double>(k) * k); };
        CHECK(std::abs(richardson_accelerate(s, n) - l) < 1e-9 * (1 + std::abs(l) + std::abs(a) + std::abs(b)) * n);
        const double c = g.uniform(-5, 5);
        // the weights n^2, -2(n+1)^2, (n+2)^2 cancel, leaving rounding of order n^2 ulp
        const double slack = 8 * std::numeric_limits<double>::epsilon() * (n + 2.0) * (n + 2.0) * std::abs(c);
        CHECK(std::abs(richardson_accelerate([&](int) { return c; }, n) - c) <= slack);
    });
}

}  // TEST_SUITE
