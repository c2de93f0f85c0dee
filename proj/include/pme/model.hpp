#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pme/domain.hpp"

namespace pme {

/// Diffusion nonlinearity A together with frak_a = sqrt(A').
///
/// Kinds:
///   pure_power      A(r) = |r|^{m-1} r
///   viscosity(n)    A(r) = |r|^{m-1} r + r / n
///   regularized(n)  frak_a_n(r)^2 = frak_a(clamp(r, -n, n))^2 + (2/n)^2
///   linear          A(r) = r  (sanity mode; m is only declared, not used by A)
class Nonlinearity {
public:
    enum class Kind { pure_power, viscosity, regularized, linear };

    static Nonlinearity pure_power(double m, double K = 1.0);
    static Nonlinearity viscosity(double m, double n, double K = 1.0);
    static Nonlinearity linear(double m_declared = 2.0, double K = 1.0);
    static Nonlinearity regularized(double m, double n, double K = 1.0);

    Kind kind() const { return kind_; }
    double m() const { return m_; }
    double K() const { return K_; }
    double n() const { return n_; }
    std::string name() const;

    double A(double r) const;
    /// A'(r) = frak_a(r)^2
    double dA(double r) const;
    double frak_a(double r) const { return std::sqrt(dA(r)); }

    /// A and A' over a whole field.
    void apply(std::span<const double> u, std::span<double> a_out) const;
    double max_dA(std::span<const double> u) const;

    Nonlinearity with_K(double K) const;

    /// Smallest K for which the pure power law provably meets Assumption A's clauses.
    static double sufficient_K(double m);

private:
    Nonlinearity(Kind kind, double m, double K, double n);

    Kind kind_;
    double m_;
    double K_;
    double n_;
    bool m_is_2_;
    bool m_is_3_;
};

struct EvalResult {
    double A;
    double a;
};

EvalResult eval_nonlinearity(const Nonlinearity& nl, double r);

/// frak_a_n^2 = frak_a(clamp(r,-n,n))^2 + 4/n^2. Requires a pure power law and n >= 1.
Nonlinearity regularize(const Nonlinearity& nl, double n);

/// Primitive [frak_a](r) = int_0^r frak_a by Gauss-Kronrod quadrature.
double frak_a_primitive(const Nonlinearity& nl, double r);

/// One clause of a sampled validation.
struct ClauseResult {
    std::string clause;
    bool pass = true;
    /// Tightest constant found on the sample lattice (the validator's empirical K).
    double tightest = 0.0;
    /// Where the clause was most violated (or tightest), if applicable.
    std::optional<double> witness_r;
    std::optional<double> witness_r_tilde;
    std::optional<double> witness_x;
    std::optional<double> witness_y;
};

struct ValidationReport {
    std::vector<ClauseResult> clauses;
    bool all_pass() const;
    const ClauseResult& find(const std::string& clause) const;
};

namespace clause {
inline constexpr const char* a_at_zero = "a(0) bound";
inline constexpr const char* a_prime_growth = "a' growth";
inline constexpr const char* a_floor = "K a(r) >= 1 for |r| >= 1";
inline constexpr const char* primitive_far = "primitive bound, |r| v |r~| >= 1";
inline constexpr const char* primitive_near = "primitive bound, |r| v |r~| < 1";
inline constexpr const char* noise_growth = "noise growth";
inline constexpr const char* noise_holder = "noise holder";
}  // namespace clause

/// Falsification check of Assumption A on a symmetric, log-spaced lattice in [-r_max, r_max].
ValidationReport validate_assumption_A(const Nonlinearity& nl, double r_max, std::size_t samples);

enum class NoiseFamily { off, additive, linear, holder, branching };

std::string to_string(NoiseFamily f);
NoiseFamily parse_noise_family(const std::string& s);

/// Finite-mode diffusion coefficient
///   sigma^k(x, r) = c k^{-q} sqrt(2) sin(k pi (x - a)/(b - a)) g(r),  k = 1..modes
/// with g fixed by the family. `exponent_kappa` parametrises g for the Holder
/// families; `kappa`, `kappa_bar` and `K` are the declared assumption constants.
struct NoiseModel {
    NoiseFamily family = NoiseFamily::off;
    std::size_t modes = 0;
    double amplitude = 0.0;
    double spatial_decay = 2.0;
    double exponent_kappa = 0.05;
    double K = 1.0;
    double kappa = 0.05;
    double kappa_bar = 1.0;
    double m = 2.0;
    double a = 0.0;
    double b = 1.0;

    /// Checks ranges (q >= 2, kappa in (0,1/2], kappa_bar in (1/min(m,2), 1], ...).
    void validate() const;

    double g(double r) const;
    /// sqrt(2) c k^{-q} sin(k pi (x-a)/(b-a)), k >= 1
    double spatial(std::size_t k, double x) const;
    /// sigma^k(x, r) for k = 1..modes into out (size modes).
    void eval(double x, double r, std::span<double> out) const;
    double l2_norm(double x, double r) const;

    /// Analytic constant that dominates both clauses of the noise assumption.
    double sufficient_K() const;
    /// Squared l2 tail beyond the retained modes, sup over x.
    double truncation_tail() const;

    static NoiseModel off();
    /// Family with default constants; K is set to the sufficient constant.
    static NoiseModel make(NoiseFamily family, double amplitude, std::size_t modes, double m,
                           double a = 0.0, double b = 1.0, double exponent_kappa = 0.05);
};

/// sigma^k(x_i, u_i) for every mode k (outer index) and node i.
std::vector<GridFunction> eval_sigma(const NoiseModel& nm, const GridFunction& u);

ValidationReport validate_noise(const NoiseModel& nm, double r_max, std::size_t samples);

/// Lattice lower bound of sup_{x,r} |sigma1 - sigma2|^2 / (1+|r|)^{m+1}; x over the grid nodes.
double noise_distance(const NoiseModel& nm1, const NoiseModel& nm2, const Grid1D& grid, double r_max,
                      std::size_t samples);

/// Symmetric lattice: 0, +-1, and log-spaced magnitudes in [1e-8, r_max].
std::vector<double> symmetric_log_lattice(double r_max, std::size_t samples);

}  // namespace pme
