#include "pme/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pme {

// ---------------------------------------------------------------------------
// series

void DecaySeries::validate() const {
    if (values.size() != times.size() || std_error.size() != times.size()) {
        throw std::invalid_argument("series: times, values and stderr differ in length");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) throw std::invalid_argument("series: times must be strictly increasing");
    }
}

DecaySeries DecaySeries::from_stats(const EnsembleStats& stats, const std::string& key) {
    const Series& s = stats.at(key);
    DecaySeries out{stats.times, s.mean, s.std_error};
    out.validate();
    return out;
}

DecaySeries DecaySeries::exact(std::vector<double> times, std::vector<double> values) {
    DecaySeries out{std::move(times), std::move(values), {}};
    out.std_error.assign(out.times.size(), 0.0);
    out.validate();
    return out;
}

namespace {

RateFit fit_line(const DecaySeries& s, double t_lo, double t_hi, bool log_time) {
    s.validate();
    if (!(t_hi > t_lo)) throw std::invalid_argument("fit: empty window");
    std::vector<double> x, y;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double t = s.times[k];
        if (t < t_lo || t > t_hi) continue;
        if (!(s.values[k] > 0.0)) throw std::invalid_argument("fit: nonpositive value at t = " + std::to_string(t));
        if (log_time && !(t > 0.0)) throw std::invalid_argument("fit: log-log fit needs t > 0");
        x.push_back(log_time ? std::log(t) : t);
        y.push_back(std::log(s.values[k]));
    }
    const std::size_t n = x.size();
    if (n < 5) throw std::invalid_argument("fit: fewer than 5 points in window");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    RateFit fit;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.exponent * x[i];
        ssr += r * r;
    }
    const double dof = static_cast<double>(n - 2);
    const boost::math::students_t dist(dof);
    fit.ci_halfwidth = boost::math::quantile(dist, 0.975) * std::sqrt(ssr / dof / sxx);
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.points = n;
    return fit;
}

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace

RateFit fit_power_exponent(const DecaySeries& s, double t_lo, double t_hi) { return fit_line(s, t_lo, t_hi, true); }

RateFit fit_log_slope(const DecaySeries& s, double t_lo, double t_hi) { return fit_line(s, t_lo, t_hi, false); }

std::pair<double, double> default_fit_window(double t_end) { return {t_end / 16.0, t_end}; }

Verdict check_nonincreasing(const DecaySeries& s, double factor, double abs_tol) {
    s.validate();
    Verdict v{"nonincreasing", true, -std::numeric_limits<double>::infinity(), 0.0, abs_tol, {}};
    for (std::size_t k = 1; k < s.size(); ++k) {
        double worst = -std::numeric_limits<double>::infinity();
        Violation viol;
        for (std::size_t j = 0; j < k; ++j) {
            const double bound = s.values[j] + factor * combined(s.std_error[j], s.std_error[k]);
            const double excess = s.values[k] - bound;
            if (excess > worst) {
                worst = excess;
                viol = {s.times[k], s.values[k], bound};
            }
        }
        v.observed = std::max(v.observed, worst);
        if (worst > abs_tol) v.violations.push_back(viol);
    }
    if (s.size() < 2) v.observed = 0.0;
    v.pass = v.violations.empty();
    return v;
}

Verdict contraction_check(const DecaySeries& distance, const DecaySeries& dissipation, double tolerance,
                          double factor) {
    distance.validate();
    dissipation.validate();
    if (distance.times != dissipation.times) throw std::invalid_argument("contraction: time grids differ");
    Verdict v = check_nonincreasing(distance, factor);
    v.name = "contraction";

    const std::size_t n = distance.size();
    std::vector<double> cum(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        // lower Riemann sum: sparse records must not overstate the dissipated amount
        cum[k] = cum[k - 1] + (distance.times[k] - distance.times[k - 1]) *
                                  std::min(dissipation.values[k], dissipation.values[k - 1]);
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t j = 0; j < k; ++j) {
            const double slack = factor * combined(distance.std_error[j], distance.std_error[k]);
            const double excess = distance.values[k] - distance.values[j] + (cum[k] - cum[j]) - slack;
            worst = std::max(worst, excess);
            if (excess > tolerance) {
                v.violations.push_back({distance.times[k], distance.values[k] + (cum[k] - cum[j]),
                                        distance.values[j] + slack + tolerance});
                break;
            }
        }
    }
    if (n >= 2) v.observed = std::max(v.observed, worst);
    v.tolerance = tolerance;
    v.pass = v.violations.empty();
    return v;
}

double theoretical_envelope(double t, double h0, double coeff, double m) {
    const double p = m - 1.0;
    return std::pow(std::pow(h0, -p) + coeff * p * t, -1.0 / p);
}

double envelope_coefficient(double m, const Weight& w) {
    const double mstar = m / (m - 1.0);
    return std::pow(2.0, -m) * std::pow(w.lp_norm(mstar), -m);
}

double fitted_envelope_coefficient(const DecaySeries& s, double m, double t_lo, double t_hi) {
    s.validate();
    if (s.size() < 2 || !(s.values[0] > 0.0)) throw std::invalid_argument("envelope fit: need a positive start");
    const double p = m - 1.0;
    const double start = std::pow(s.values[0], -p);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (!(s.values[k] > 0.0) || s.times[k] < t_lo || s.times[k] > t_hi) continue;
        const double c = (std::pow(s.values[k], -p) - start) / (p * (s.times[k] - s.times[0]));
        best = std::min(best, c);
    }
    return best;
}

Verdict ode_comparison(const DecaySeries& f, double coeff, double m, double slack_factor, double abs_tol) {
    f.validate();
    if (f.size() == 0 || !(f.values[0] > 0.0)) throw std::invalid_argument("ode comparison: need f(t0) > 0");
    Verdict v{"ode comparison", true, -std::numeric_limits<double>::infinity(), 0.0, abs_tol, {}};
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double env = theoretical_envelope(f.times[k] - f.times[0], f.values[0], coeff, m);
        const double bound = env + slack_factor * f.std_error[k];
        const double excess = f.values[k] - bound;
        v.observed = std::max(v.observed, excess);
        if (excess > abs_tol) v.violations.push_back({f.times[k], f.values[k], bound});
    }
    v.pass = v.violations.empty();
    return v;
}

double coming_down_statistic(const DecaySeries& norms, double m) {
    norms.validate();
    const double p = (m + 1.0) / (m - 1.0);
    double best = 0.0;
    for (std::size_t k = 0; k < norms.size(); ++k) {
        best = std::max(best, std::pow(std::min(norms.times[k], 1.0), p) * norms.values[k]);
    }
    return best;
}

DecaySeries mixing_gap(const EnsembleStats& a, const EnsembleStats& b, const std::string& key) {
    if (a.times != b.times) throw std::invalid_argument("mixing gap: time grids differ");
    const Series& sa = a.at(key);
    const Series& sb = b.at(key);
    DecaySeries out;
    out.times = a.times;
    for (std::size_t k = 0; k < a.times.size(); ++k) {
        out.values.push_back(std::abs(sa.mean[k] - sb.mean[k]));
        out.std_error.push_back(combined(sa.std_error[k], sb.std_error[k]));
    }
    out.validate();
    return out;
}

Verdict lipschitz_domination(const DecaySeries& gap, const DecaySeries& distance, double abs_tol) {
    gap.validate();
    distance.validate();
    if (gap.times != distance.times) throw std::invalid_argument("lipschitz domination: time grids differ");
    Verdict v{"lipschitz domination", true, -std::numeric_limits<double>::infinity(), 0.0, abs_tol, {}};
    for (std::size_t k = 0; k < gap.size(); ++k) {
        const double bound = distance.values[k] + combined(gap.std_error[k], distance.std_error[k]);
        const double excess = gap.values[k] - bound;
        v.observed = std::max(v.observed, excess);
        if (excess > abs_tol) v.violations.push_back({gap.times[k], gap.values[k], bound});
    }
    v.pass = v.violations.empty();
    return v;
}

Verdict check_log_concave_decreasing(const DecaySeries& s, double tol, double factor) {
    s.validate();
    Verdict v{"log concave decreasing", true, -std::numeric_limits<double>::infinity(), 0.0, tol, {}};
    std::vector<double> slope, rel, dt;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!(s.values[k] > 0.0)) {
            v.violations.push_back({s.times[k], s.values[k], 0.0});
            v.pass = false;
            return v;
        }
        rel.push_back(s.std_error[k] / s.values[k]);
    }
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        dt.push_back(s.times[k + 1] - s.times[k]);
        const double sl = (std::log(s.values[k + 1]) - std::log(s.values[k])) / dt.back();
        if (!(sl < 0.0)) v.violations.push_back({s.times[k + 1], sl, 0.0});
        slope.push_back(sl);
    }
    for (std::size_t k = 1; k < slope.size(); ++k) {
        const double rise = slope[k] - slope[k - 1];
        const double se = std::sqrt(std::pow(rel[k + 1] / dt[k], 2) +
                                    std::pow(rel[k] * (1.0 / dt[k] + 1.0 / dt[k - 1]), 2) +
                                    std::pow(rel[k - 1] / dt[k - 1], 2));
        v.observed = std::max(v.observed, rise);
        if (rise > tol + factor * se) v.violations.push_back({s.times[k + 1], slope[k], slope[k - 1] + tol + factor * se});
    }
    if (slope.size() < 2) v.observed = 0.0;
    v.pass = v.violations.empty();
    return v;
}

// ---------------------------------------------------------------------------
// eta_delta

namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;

double raw_bump(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double y = 2.0 * s - 1.0;
    return std::exp(-1.0 / (1.0 - y * y));
}

double bump_mass() {
    static const double z = Quad::integrate(raw_bump, 0.0, 1.0, 15, 1e-14);
    return z;
}

double primitive1_quad(double s) {
    if (s > 0.5) return 1.0 - primitive1_quad(1.0 - s);  // symmetry about 1/2
    return Quad::integrate(eta_tilde, 0.0, s, 8, 1e-13);
}

double primitive2_quad(double s) {
    return Quad::integrate([s](double t) { return (s - t) * eta_tilde(t); }, 0.0, s, 8, 1e-13);
}

// cubic Hermite tables on [0, 1] using the exact derivatives G1' = eta_tilde, G2' = G1
struct PrimitiveTables {
    static constexpr std::size_t kCells = 2048;
    std::vector<double> g1, g2, dg1;

    PrimitiveTables() : g1(kCells + 1), g2(kCells + 1), dg1(kCells + 1) {
        for (std::size_t i = 0; i <= kCells; ++i) {
            const double s = static_cast<double>(i) / kCells;
            g1[i] = i == 0 ? 0.0 : (i == kCells ? 1.0 : primitive1_quad(s));
            g2[i] = i == kCells ? 0.5 : primitive2_quad(s);
            dg1[i] = eta_tilde(s);
        }
    }

    static double hermite(double y0, double y1, double d0, double d1, double t, double dx) {
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * dx * d0 + (-2 * t3 + 3 * t2) * y1 +
               (t3 - t2) * dx * d1;
    }

    void eval(double s, double& p1, double& p2) const {
        const double x = s * kCells;
        const std::size_t i = std::min(static_cast<std::size_t>(x), kCells - 1);
        const double t = x - static_cast<double>(i);
        const double dx = 1.0 / kCells;
        p1 = hermite(g1[i], g1[i + 1], dg1[i], dg1[i + 1], t, dx);
        p2 = hermite(g2[i], g2[i + 1], g1[i], g1[i + 1], t, dx);
    }
};

const PrimitiveTables& tables() {
    static const PrimitiveTables t;
    return t;
}

}  // namespace

double eta_tilde(double s) { return raw_bump(s) / bump_mass(); }

EtaValues eta_delta(double delta, double r) {
    if (!(delta > 0.0)) throw std::invalid_argument("eta_delta: need delta > 0");
    const double s = std::abs(r) / delta;
    const double sgn = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    if (s >= 1.0) return {delta * (s - 0.5), sgn, 0.0};
    double p1 = 0.0, p2 = 0.0;
    tables().eval(s, p1, p2);
    return {delta * p2, sgn * p1, eta_tilde(s) / delta};
}

std::string eta_tilde_description() {
    return "exp(-1/(1-y^2))/Z, y = 2s-1 on (0,1), Z = " + std::to_string(bump_mass()) + ", peak " +
           std::to_string(std::exp(-1.0) / bump_mass());
}

// ---------------------------------------------------------------------------
// entropy residual

std::vector<std::string> test_function_ids() { return {"center", "left", "wide"}; }

double time_cutoff(double s) {
    auto f = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    return f(1.0 - s) / (f(1.0 - s) + f(s));
}

GridFunction spatial_test_function(const Grid1D& grid, const std::string& id) {
    double lo = 0.0, hi = 0.0;
    if (id == "center") {
        lo = 0.2, hi = 0.8;
    } else if (id == "left") {
        lo = 0.05, hi = 0.5;
    } else if (id == "wide") {
        lo = 0.05, hi = 0.95;
    } else {
        throw ConfigError("unknown test function '" + id + "'");
    }
    const double x0 = grid.a() + lo * grid.length();
    const double x1 = grid.a() + hi * grid.length();
    return sample(grid, [x0, x1](double x) { return std::exp(1.0) * raw_bump((x - x0) / (x1 - x0)); });
}

double entropy_flux(const Nonlinearity& nl, double delta, double level, double u) {
    const EtaValues e = eta_delta(delta, u - level);
    double lo = std::min(0.0, u), hi = std::max(0.0, u);
    lo = std::max(lo, level - delta);
    hi = std::min(hi, level + delta);
    double integral = 0.0;
    if (hi > lo) {
        std::vector<double> cuts{lo, hi};
        for (double c : {0.0, level}) {
            if (c > lo && c < hi) cuts.push_back(c);
        }
        std::sort(cuts.begin(), cuts.end());
        auto integrand = [&](double z) { return eta_tilde(std::abs(z - level) / delta) / delta * nl.A(z); };
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            integral += boost::math::quadrature::gauss<double, 30>::integrate(integrand, cuts[i], cuts[i + 1]);
        }
        if (u < 0.0) integral = -integral;
    }
    return e.d1 * nl.A(u) - integral;
}

Trajectory time_reversed(const Trajectory& tr) {
    Trajectory out = tr;
    std::reverse(out.states.begin(), out.states.end());
    return out;
}

EntropyResidual entropy_residual(const std::vector<Trajectory>& trajectories, const Nonlinearity& nl,
                                 const NoiseModel& nm, double delta, double level, const std::string& testfn_id) {
    if (!(delta > 0.0)) throw std::invalid_argument("entropy residual: need delta > 0");
    if (trajectories.empty()) throw std::invalid_argument("entropy residual: no trajectories");
    EntropyResidual out;
    for (const Trajectory& tr : trajectories) {
        if (tr.record_every != 1) throw std::invalid_argument("entropy residual: needs record_every = 1");
        if (tr.states.size() < 2) throw std::invalid_argument("entropy residual: too few states");
        const Grid1D& grid = tr.grid;
        const std::size_t N = grid.size();
        const double h = grid.h();
        const double dt = tr.dt;
        const double T = tr.times.back() - tr.times.front();
        const GridFunction rho = spatial_test_function(grid, testfn_id);
        std::vector<double> lap_rho(N);
        discrete_laplacian(rho.values, h, lap_rho);

        const bool noisy = nm.family != NoiseFamily::off && nm.modes > 0;
        const NoiseIncrements noise(tr.seed);
        std::vector<double> dW(noisy ? nm.modes : 0);
        std::vector<double> sig(noisy ? nm.modes : 0);
        std::vector<double> eta(N), d1(N), d2(N), a(N);

        auto phi = [&](std::size_t n) { return time_cutoff((tr.times[n] - tr.times.front()) / T); };

        double total = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            total += h * eta_delta(delta, tr.states[0][i] - level).value * phi(0) * rho[i];
        }
        for (std::size_t n = 0; n + 1 < tr.states.size(); ++n) {
            const auto& u = tr.states[n];
            const double ph = phi(n);
            const double dphi = phi(n + 1) - ph;
            for (std::size_t i = 0; i < N; ++i) {
                const EtaValues e = eta_delta(delta, u[i] - level);
                eta[i] = e.value;
                d1[i] = e.d1;
                d2[i] = e.d2;
                a[i] = nl.A(u[i]);
            }
            double term_time = 0.0, term_flux = 0.0, term_diss = 0.0, term_ito = 0.0, term_noise = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                term_time += h * eta[i] * rho[i];
                if (lap_rho[i] != 0.0) term_flux += h * entropy_flux(nl, delta, level, u[i]) * lap_rho[i];
            }
            // links between neighbours, boundary values 0
            const double d1_bdry = eta_delta(delta, -level).d1;
            for (std::size_t i = 0; i <= N; ++i) {
                const double dl = i == 0 ? d1_bdry : d1[i - 1];
                const double dr = i == N ? d1_bdry : d1[i];
                const double al = i == 0 ? 0.0 : a[i - 1];
                const double ar = i == N ? 0.0 : a[i];
                const double rl = i == 0 ? 0.0 : rho[i - 1];
                const double rr = i == N ? 0.0 : rho[i];
                term_diss += h * 0.5 * (rl + rr) * (dr - dl) * (ar - al) / (h * h);
            }
            if (noisy) {
                noise.fill(n, dt, dW);
                for (std::size_t i = 0; i < N; ++i) {
                    if (rho[i] == 0.0) continue;
                    nm.eval(grid.node(i), u[i], sig);
                    double sq = 0.0, inc = 0.0;
                    for (std::size_t k = 0; k < sig.size(); ++k) {
                        sq += sig[k] * sig[k];
                        inc += sig[k] * dW[k];
                    }
                    term_ito += 0.5 * dt * h * rho[i] * d2[i] * sq;
                    term_noise += h * rho[i] * d1[i] * inc;
                }
            }
            total += term_time * dphi + dt * ph * (term_flux - term_diss) + ph * (term_ito + term_noise);
        }
        out.samples.push_back(total);
    }
    const std::size_t M = out.samples.size();
    double sum = 0.0;
    for (double s : out.samples) sum += s;
    out.mean = sum / static_cast<double>(M);
    if (M > 1) {
        double ss = 0.0;
        for (double s : out.samples) ss += (s - out.mean) * (s - out.mean);
        out.std_error = std::sqrt(ss / static_cast<double>(M - 1) / static_cast<double>(M));
    }
    return out;
}

// ---------------------------------------------------------------------------
// regularization rate and lower bound

double g_alpha(double alpha, double delta, double eps, double lambda, double kappa, double kappa_bar) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("g_alpha: need delta in (0, 1)");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("g_alpha: need eps in (0, 1)");
    if (!(lambda >= 0.0)) throw std::invalid_argument("g_alpha: need lambda >= 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("g_alpha: need alpha in (0, 1)");
    return std::pow(delta, 2.0 * kappa) + std::pow(eps, 2.0 * kappa_bar) / delta + delta / eps +
           std::pow(delta, 2.0 * alpha) / (eps * eps) + lambda * lambda / (eps * eps) + lambda / eps;
}

std::pair<double, double> nu_interval(double m, double kappa_bar) { return {1.0 / std::min(m, 2.0), kappa_bar}; }

double alpha_for_nu(double m, double nu) {
    const double lo = 1.0 / (2.0 * nu);
    const double hi = std::min(1.0, m / 2.0);
    if (!(lo < hi)) throw std::invalid_argument("alpha_for_nu: no admissible alpha for this nu");
    return 0.5 * (lo + hi);
}

double schedule_delta(double eps, double nu) { return std::pow(eps, 2.0 * nu); }

LowerBound lower_bound_check(double u, double v, double m) {
    auto A = [m](double r) { return std::copysign(std::pow(std::abs(r), m), r); };
    const double lhs = std::abs(A(u) - A(v));
    const double rhs = std::pow(2.0, -m) * std::pow(std::abs(u - v), m);
    return {lhs, rhs, lhs >= rhs - 1e-12};
}

std::size_t lower_bound_sweep(double m, std::size_t pairs, std::uint64_t seed, double range) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-range, range);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double u = dist(gen);
        const double v = dist(gen);
        if (!lower_bound_check(u, v, m).ok) ++bad;
    }
    return bad;
}

}  // namespace pme
