#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "pme/analysis.hpp"
#include "pme/exactsol.hpp"

using namespace pme;

namespace {

DecaySeries curve(double t0, double t1, std::size_t n, auto f) {
    std::vector<double> t, v;
    for (std::size_t k = 0; k < n; ++k) {
        t.push_back(t0 + (t1 - t0) * k / (n - 1.0));
        v.push_back(f(t.back()));
    }
    return DecaySeries::exact(t, v);
}

// composite Simpson on [a, b]
double simpson(auto f, double a, double b, std::size_t n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace

TEST(Series, Validation) {
    EXPECT_THROW(DecaySeries::exact({0.0, 0.0}, {1.0, 1.0}).validate(), std::invalid_argument);
    DecaySeries s{{0.0, 1.0}, {1.0}, {0.0, 0.0}};
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Fit, PowerAndExponential) {
    const auto p = curve(0.5, 4.0, 30, [](double t) { return 3.0 * std::pow(t, -1.3); });
    const RateFit f = fit_power_exponent(p, 0.5, 4.0);
    EXPECT_NEAR(f.exponent, -1.3, 1e-12);
    EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
    EXPECT_LT(f.ci_halfwidth, 1e-10);
    EXPECT_EQ(f.points, 30u);
    const auto e = curve(0.0, 2.0, 21, [](double t) { return std::exp(-2.5 * t); });
    EXPECT_NEAR(fit_log_slope(e, 0.0, 2.0).exponent, -2.5, 1e-12);
    EXPECT_THROW(fit_power_exponent(p, 3.9, 4.0), std::invalid_argument);
    const auto w = default_fit_window(4.0);
    EXPECT_DOUBLE_EQ(w.first, 0.25);
    EXPECT_DOUBLE_EQ(w.second, 4.0);
}

TEST(Fit, ConfidenceIntervalCoversNoisySlope) {
    auto s = curve(1.0, 10.0, 40, [](double t) { return std::pow(t, -1.0); });
    for (std::size_t k = 0; k < s.size(); ++k) s.values[k] *= 1.0 + 0.02 * std::sin(7.0 * k);
    const RateFit f = fit_power_exponent(s, 1.0, 10.0);
    EXPECT_GT(f.ci_halfwidth, 0.0);
    EXPECT_LT(std::abs(f.exponent + 1.0), f.ci_halfwidth);
}

TEST(Checks, Nonincreasing) {
    DecaySeries s{{0, 1, 2}, {1.0, 1.05, 0.5}, {0.0, 0.0, 0.0}};
    EXPECT_FALSE(check_nonincreasing(s).pass);
    s.std_error = {0.02, 0.02, 0.02};
    EXPECT_TRUE(check_nonincreasing(s, 2.0).pass);
    EXPECT_FALSE(check_nonincreasing(s, 1.0).pass);
}

TEST(Checks, IntegratedContraction) {
    // d' = -dissipation exactly
    const auto d = curve(0.0, 2.0, 41, [](double t) { return std::exp(-t); });
    const auto diss = curve(0.0, 2.0, 41, [](double t) { return std::exp(-t); });
    EXPECT_TRUE(contraction_check(d, diss, 1e-12).pass);
    const auto twice = curve(0.0, 2.0, 41, [](double t) { return 2.2 * std::exp(-t); });
    const Verdict v = contraction_check(d, twice, 1e-3);
    EXPECT_FALSE(v.pass);
    EXPECT_FALSE(v.violations.empty());
}

TEST(Envelope, SolvesComparisonOde) {
    for (double m : {2.0, 3.0}) {
        const double c = 1.7, h0 = 0.8;
        for (double t : {0.1, 1.0, 5.0}) {
            const double e = 1e-6;
            const double dh = (theoretical_envelope(t + e, h0, c, m) - theoretical_envelope(t - e, h0, c, m)) / (2 * e);
            EXPECT_NEAR(dh, -c * std::pow(theoretical_envelope(t, h0, c, m), m), 1e-7);
        }
        EXPECT_DOUBLE_EQ(theoretical_envelope(0.0, h0, c, m), h0);
        const auto s = curve(0.0, 3.0, 31, [&](double t) { return theoretical_envelope(t, h0, c, m); });
        EXPECT_NEAR(fitted_envelope_coefficient(s, m), c, 1e-9);
        EXPECT_TRUE(ode_comparison(s, c, m, 2.0, 1e-12).pass);
        EXPECT_FALSE(ode_comparison(s, 1.2 * c, m).pass);
    }
}

TEST(Envelope, ProofCoefficient) {
    // 2^{-2} ||w||_{L^2}^{-2} with ||w||_2^2 = 1/120 on (0,1)
    const Weight w = solve_weight(Grid1D(0.0, 1.0, 2000), {2.0});
    EXPECT_NEAR(envelope_coefficient(2.0, w), 30.0, 1e-3);
}

TEST(Checks, ComingDownStatistic) {
    const auto s = DecaySeries::exact({0.0, 0.5, 1.0, 2.0}, {100.0, 4.0, 1.0, 3.0});
    // (m+1)/(m-1) = 3 for m = 2
    EXPECT_DOUBLE_EQ(coming_down_statistic(s, 2.0), 3.0);
}

TEST(Checks, LipschitzDomination) {
    const auto dist = DecaySeries::exact({0, 1, 2}, {1.0, 0.5, 0.25});
    EXPECT_TRUE(lipschitz_domination(DecaySeries::exact({0, 1, 2}, {0.9, 0.5, 0.1}), dist).pass);
    EXPECT_FALSE(lipschitz_domination(DecaySeries::exact({0, 1, 2}, {0.9, 0.6, 0.1}), dist).pass);
}

TEST(Checks, LogConcaveDecreasing) {
    EXPECT_TRUE(check_log_concave_decreasing(curve(0, 2, 21, [](double t) { return std::exp(-t - t * t); }), 1e-12).pass);
    EXPECT_TRUE(check_log_concave_decreasing(curve(0, 2, 21, [](double t) { return std::exp(-3 * t); }), 1e-9).pass);
    EXPECT_FALSE(check_log_concave_decreasing(curve(0, 2, 21, [](double t) { return std::exp(-t + 0.2 * t * t); }), 1e-9).pass);
    EXPECT_FALSE(check_log_concave_decreasing(curve(0, 2, 21, [](double t) { return std::exp(t); }), 1e-9).pass);
    // error bars absorb a small wobble
    auto s = curve(0, 2, 21, [](double t) { return std::exp(-3 * t) * (1 + 0.001 * std::sin(40 * t)); });
    EXPECT_FALSE(check_log_concave_decreasing(s, 1e-9).pass);
    s.std_error = s.values;
    for (double& e : s.std_error) e *= 0.002;
    EXPECT_TRUE(check_log_concave_decreasing(s, 1e-9, 2.0).pass);
}

TEST(Eta, BumpNormalized) {
    EXPECT_NEAR(simpson(eta_tilde, 0.0, 1.0), 1.0, 1e-10);
    EXPECT_NEAR(eta_tilde(0.5), std::exp(-1.0) / 0.22199690808403623, 1e-9);
    EXPECT_EQ(eta_tilde(0.0), 0.0);
    EXPECT_EQ(eta_tilde(1.2), 0.0);
    EXPECT_FALSE(eta_tilde_description().empty());
}

TEST(Eta, Clauses) {
    for (double delta : {0.05, 0.3}) {
        const auto z = eta_delta(delta, 0.0);
        EXPECT_EQ(z.value, 0.0);
        EXPECT_EQ(z.d1, 0.0);
        for (double r = -3 * delta; r <= 3 * delta; r += delta / 37) {
            const auto e = eta_delta(delta, r);
            EXPECT_LE(std::abs(e.value - std::abs(r)), delta);
            EXPECT_LE(std::abs(e.d2), 2.0 / delta);
            EXPECT_GE(e.d2, 0.0);
            if (std::abs(r) >= delta) {
                EXPECT_EQ(e.d2, 0.0);
                EXPECT_NEAR(e.d1, std::copysign(1.0, r), 1e-12);
                EXPECT_NEAR(e.value, std::abs(r) - delta / 2, 1e-12);
            }
            EXPECT_DOUBLE_EQ(eta_delta(delta, -r).value, e.value);
        }
    }
}

TEST(Eta, MatchesDirectIntegration) {
    const double delta = 0.2;
    for (double r : {0.03, 0.1, 0.17}) {
        const double d1 = simpson([&](double z) { return eta_tilde(z / delta) / delta; }, 0.0, r);
        const double val = simpson(
            [&](double y) { return simpson([&](double z) { return eta_tilde(z / delta) / delta; }, 0.0, y, 400); },
            0.0, r, 400);
        const auto e = eta_delta(delta, r);
        EXPECT_NEAR(e.d1, d1, 1e-9);
        EXPECT_NEAR(e.value, val, 1e-8);
        EXPECT_NEAR(e.d2, eta_tilde(r / delta) / delta, 1e-12);
    }
}

TEST(Entropy, FluxMatchesDirectIntegration) {
    const auto nl = Nonlinearity::pure_power(2.0);
    for (double level : {0.0, 0.3}) {
        for (double u : {-1.1, 0.05, 0.4, 2.0}) {
            const double direct = simpson([&](double z) { return eta_delta(0.1, z - level).d1 * nl.dA(z); },
                                          std::min(0.0, u), std::max(0.0, u));
            EXPECT_NEAR(entropy_flux(nl, 0.1, level, u), u >= 0 ? direct : -direct, 1e-7) << level << " " << u;
        }
    }
}

TEST(Entropy, TestFunctions) {
    const Grid1D g(0.0, 2.0, 199);
    EXPECT_EQ(test_function_ids().size(), 3u);
    for (const auto& id : test_function_ids()) {
        const auto rho = spatial_test_function(g, id);
        double mx = 0;
        for (double v : rho.values) {
            EXPECT_GE(v, 0.0);
            mx = std::max(mx, v);
        }
        EXPECT_NEAR(mx, 1.0, 1e-3);
    }
    const auto c = spatial_test_function(g, "center");
    EXPECT_EQ(c[0], 0.0);
    EXPECT_THROW(spatial_test_function(g, "nowhere"), std::invalid_argument);
    EXPECT_DOUBLE_EQ(time_cutoff(0.0), 1.0);
    EXPECT_DOUBLE_EQ(time_cutoff(1.0), 0.0);
    EXPECT_GT(time_cutoff(0.3), time_cutoff(0.6));
}

TEST(Entropy, ForwardSmallReversedNegative) {
    SolverConfig cfg;
    cfg.dt = 4e-4;
    cfg.t_end = 0.2;
    const Grid1D g(0.0, 1.0, 50);
    const auto nl = Nonlinearity::pure_power(2.0);
    const auto ic = sample(g, [](double x) {
        const double y = 2 * x - 1;
        return std::abs(y) < 1 ? 2.0 * std::exp(1 - 1 / (1 - y * y)) : 0.0;
    });
    const auto tr = run_trajectory(cfg, nl, NoiseModel::off(), ic, 0);
    const auto fwd = entropy_residual({tr}, nl, NoiseModel::off(), 0.1, 0.0, "center");
    const auto rev = entropy_residual({time_reversed(tr)}, nl, NoiseModel::off(), 0.1, 0.0, "center");
    const double scale = g.h() + cfg.dt + 0.1;
    EXPECT_GT(fwd.mean, -0.11 * scale);
    EXPECT_LT(rev.mean, -0.11 * scale);
    EXPECT_EQ(fwd.samples.size(), 1u);
    EXPECT_EQ(time_reversed(tr).states.front(), tr.states.back());
}

TEST(RateFunction, Schedule) {
    const auto [lo, hi] = nu_interval(2.0, 1.0);
    EXPECT_DOUBLE_EQ(lo, 0.5);
    EXPECT_DOUBLE_EQ(hi, 1.0);
    EXPECT_NEAR(alpha_for_nu(2.0, 0.75), (2.0 / 3.0 + 1.0) / 2.0, 1e-15);
    EXPECT_THROW(alpha_for_nu(2.0, 0.4), std::invalid_argument);
    const double nu = 0.75, alpha = alpha_for_nu(2.0, nu);
    double prev = INFINITY;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
        const double g = g_alpha(alpha, schedule_delta(eps, nu), eps, 0.0, 0.5, 1.0);
        EXPECT_LT(g, prev);
        prev = g;
    }
    // decays like eps^{1/2} for this choice
    EXPECT_LT(prev, 5e-3);
    EXPECT_GT(g_alpha(alpha, schedule_delta(1e-4, 0.25), 1e-4, 0.0, 0.5, 1.0), 1e3);
    EXPECT_THROW(g_alpha(1.2, 0.1, 0.1, 0.0, 0.5, 1.0), std::invalid_argument);
}

TEST(LowerBound, Inequality) {
    const auto lb = lower_bound_check(1.0, -1.0, 2.0);
    EXPECT_DOUBLE_EQ(lb.lhs, 2.0);
    EXPECT_DOUBLE_EQ(lb.rhs, 1.0);
    EXPECT_TRUE(lb.ok);
    EXPECT_TRUE(lower_bound_check(3.0, 3.0, 3.0).ok);
    for (double m : {1.5, 2.0, 3.0, 5.0}) EXPECT_EQ(lower_bound_sweep(m, 20000, 3), 0u);
}
