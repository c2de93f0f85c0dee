#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pme/domain.hpp"
#include "pme/model.hpp"
#include "pme/solver.hpp"

namespace pme {

/// A sampled curve with Monte Carlo error bars.
struct DecaySeries {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> std_error;

    /// Throws std::invalid_argument on length mismatch or non-increasing times.
    void validate() const;
    std::size_t size() const { return times.size(); }

    static DecaySeries from_stats(const EnsembleStats& stats, const std::string& key);
    /// Exact values, zero error bars.
    static DecaySeries exact(std::vector<double> times, std::vector<double> values);
};

struct RateFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double ci_halfwidth = 0.0;  // 95%
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t points = 0;
};

/// Least squares slope of log(value) against log(t) on [t_lo, t_hi].
/// Needs >= 5 points in the window, all with value > 0.
RateFit fit_power_exponent(const DecaySeries& s, double t_lo, double t_hi);

/// Least squares slope of log(value) against t (exponential rate).
RateFit fit_log_slope(const DecaySeries& s, double t_lo, double t_hi);

/// [t_end / 16, t_end]
std::pair<double, double> default_fit_window(double t_end);

struct Violation {
    double time = 0.0;
    double observed = 0.0;
    double bound = 0.0;
};

struct Verdict {
    std::string name;
    bool pass = true;
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    std::vector<Violation> violations;
};

/// values[k] <= values[j] + factor * sqrt(se_j^2 + se_k^2) for all j < k.
/// observed = largest excess over values[j].
Verdict check_nonincreasing(const DecaySeries& s, double factor = 2.0, double abs_tol = 0.0);

/// (i) distance nonincreasing within factor * stderr;
/// (ii) distance(t) - distance(s) + int_s^t dissipation <= tolerance + MC slack, the integral
/// taken as the lower Riemann sum over the records.
Verdict contraction_check(const DecaySeries& distance, const DecaySeries& dissipation, double tolerance,
                          double factor = 2.0);

/// h(t) = (h0^{-(m-1)} + coeff (m-1) t)^{-1/(m-1)}, solving h' = -coeff h^m.
double theoretical_envelope(double t, double h0, double coeff, double m);

/// coeff = 2^{-m} ||w||_{L^{m*}}^{-m}, m* = m/(m-1): the lower bound constant 2^{-m}
/// combined with Hoelder and Jensen.
double envelope_coefficient(double m, const Weight& w);

/// Largest coeff for which the envelope started at values[0] dominates every point with
/// time in [t_lo, t_hi].
double fitted_envelope_coefficient(const DecaySeries& s, double m, double t_lo = 0.0,
                                   double t_hi = std::numeric_limits<double>::infinity());

/// f(t_k) <= envelope(t_k - t_0, f(t_0), coeff, m) + slack_factor * se_k + abs_tol for all k.
Verdict ode_comparison(const DecaySeries& f, double coeff, double m, double slack_factor = 2.0,
                       double abs_tol = 1e-12);

/// sup_t min(t, 1)^{(m+1)/(m-1)} * values(t)
double coming_down_statistic(const DecaySeries& norms, double m);

/// |mean_A(F) - mean_B(F)| with combined stderr; both ensembles must share the time grid.
DecaySeries mixing_gap(const EnsembleStats& a, const EnsembleStats& b, const std::string& key);

/// gap(t) <= distance(t) + sqrt(se_gap^2 + se_dist^2) + abs_tol at every time.
Verdict lipschitz_domination(const DecaySeries& gap, const DecaySeries& distance, double abs_tol = 1e-12);

/// Slopes of log(values) between successive points are negative and nonincreasing within
/// tol + factor * stderr of the slope difference (log errors propagated as independent).
Verdict check_log_concave_decreasing(const DecaySeries& s, double tol, double factor = 2.0);

// ---------------------------------------------------------------------------
// smooth absolute value

/// Normalized C-infinity bump on (0, 1), integral 1, peak ~1.657.
double eta_tilde(double s);

struct EtaValues {
    double value;
    double d1;
    double d2;
};

/// eta_delta with eta'' = eta_tilde(|r|/delta)/delta, eta(0) = eta'(0) = 0.
EtaValues eta_delta(double delta, double r);

/// Identification string of the eta_tilde choice, for output metadata.
std::string eta_tilde_description();

// ---------------------------------------------------------------------------
// entropy residual

/// phi(t) rho(x) test functions: phi decays smoothly from 1 at t = 0 to 0 at t = T.
/// rho ids: "center" (0.2, 0.8), "left" (0.05, 0.5), "wide" (0.05, 0.95), as fractions of Q.
std::vector<std::string> test_function_ids();
double time_cutoff(double s);  // phi(s T)
GridFunction spatial_test_function(const Grid1D& grid, const std::string& id);

struct EntropyResidual {
    double mean = 0.0;
    double std_error = 0.0;
    std::vector<double> samples;
};

/// Discrete entropy inequality residual (RHS - LHS, >= 0 up to discretization error for
/// entropy solutions) with eta = eta_delta(. - level). Trajectories need record_every == 1;
/// the noise increments are regenerated from each trajectory's seed.
EntropyResidual entropy_residual(const std::vector<Trajectory>& trajectories, const Nonlinearity& nl,
                                 const NoiseModel& nm, double delta, double level, const std::string& testfn_id);

/// Same times, states in reverse order.
Trajectory time_reversed(const Trajectory& tr);

/// int_0^u eta'(z - level) A'(z) dz, by parts.
double entropy_flux(const Nonlinearity& nl, double delta, double level, double u);

// ---------------------------------------------------------------------------
// regularization rate and lower bound

/// delta^{2 kappa} + delta^{-1} eps^{2 kappa_bar} + delta / eps + delta^{2 alpha} / eps^2
///   + lambda^2 / eps^2 + lambda / eps.
/// Needs delta, eps in (0, 1), lambda >= 0, alpha in (0, 1).
double g_alpha(double alpha, double delta, double eps, double lambda, double kappa, double kappa_bar);

/// Open interval of admissible nu: (1/min(m, 2), kappa_bar); empty if lo >= hi.
std::pair<double, double> nu_interval(double m, double kappa_bar);
/// Midpoint of (1/(2 nu), min(1, m/2)); throws if empty.
double alpha_for_nu(double m, double nu);
/// delta = eps^{2 nu}
double schedule_delta(double eps, double nu);

struct LowerBound {
    double lhs;
    double rhs;
    bool ok;
};

/// lhs = | |u|^{m-1}u - |v|^{m-1}v |, rhs = 2^{-m} |u - v|^m.
LowerBound lower_bound_check(double u, double v, double m);

/// Random (u, v) uniform in [-range, range]^2; returns the number of violations.
std::size_t lower_bound_sweep(double m, std::size_t pairs, std::uint64_t seed, double range = 100.0);

}  // namespace pme
