#include "pme/model.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

namespace pme {

namespace {

double signed_pow(double r, double p) { return std::copysign(std::pow(std::abs(r), p), r); }

double integrate(const auto& f, double lo, double hi) {
    if (lo == hi) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, lo, hi, 12, 1e-13);
}

constexpr double kRelSlack = 1e-9;

}  // namespace

Nonlinearity::Nonlinearity(Kind kind, double m, double K, double n)
    : kind_(kind), m_(m), K_(K), n_(n), m_is_2_(m == 2.0), m_is_3_(m == 3.0) {
    if (!(m > 1.0) || !std::isfinite(m)) throw ConfigError("nonlinearity: need m > 1");
    if (!(K > 0.0)) throw ConfigError("nonlinearity: need K > 0");
}

Nonlinearity Nonlinearity::pure_power(double m, double K) { return {Kind::pure_power, m, K, 0.0}; }

Nonlinearity Nonlinearity::viscosity(double m, double n, double K) {
    if (!(n > 0.0)) throw ConfigError("viscosity: need n > 0");
    return {Kind::viscosity, m, K, n};
}

Nonlinearity Nonlinearity::linear(double m_declared, double K) {
    return {Kind::linear, m_declared, K, 0.0};
}

Nonlinearity Nonlinearity::regularized(double m, double n, double K) {
    if (!(n >= 1.0)) throw ConfigError("regularize: need n >= 1");
    return {Kind::regularized, m, K, n};
}

Nonlinearity Nonlinearity::with_K(double K) const { return {kind_, m_, K, n_}; }

std::string Nonlinearity::name() const {
    switch (kind_) {
        case Kind::pure_power: return "pure_power";
        case Kind::viscosity: return "viscosity";
        case Kind::regularized: return "regularized";
        case Kind::linear: return "linear";
    }
    return "?";
}

double Nonlinearity::A(double r) const {
    auto power = [&](double s) {
        if (m_is_2_) return std::abs(s) * s;
        if (m_is_3_) return s * s * s;
        return signed_pow(s, m_);
    };
    switch (kind_) {
        case Kind::pure_power: return power(r);
        case Kind::viscosity: return power(r) + r / n_;
        case Kind::regularized: {
            const double c = std::clamp(r, -n_, n_);
            const double excess = r - c;
            return power(c) + m_ * std::pow(n_, m_ - 1.0) * excess + 4.0 * r / (n_ * n_);
        }
        case Kind::linear: return r;
    }
    return 0.0;
}

double Nonlinearity::dA(double r) const {
    auto dpower = [&](double s) {
        if (m_is_2_) return 2.0 * std::abs(s);
        if (m_is_3_) return 3.0 * s * s;
        return m_ * std::pow(std::abs(s), m_ - 1.0);
    };
    switch (kind_) {
        case Kind::pure_power: return dpower(r);
        case Kind::viscosity: return dpower(r) + 1.0 / n_;
        case Kind::regularized: return dpower(std::clamp(r, -n_, n_)) + 4.0 / (n_ * n_);
        case Kind::linear: return 1.0;
    }
    return 0.0;
}

void Nonlinearity::apply(std::span<const double> u, std::span<double> a_out) const {
    if (kind_ == Kind::pure_power && m_is_2_) {
        for (std::size_t i = 0; i < u.size(); ++i) a_out[i] = std::abs(u[i]) * u[i];
        return;
    }
    for (std::size_t i = 0; i < u.size(); ++i) a_out[i] = A(u[i]);
}

double Nonlinearity::max_dA(std::span<const double> u) const {
    double umax = 0.0;
    for (double v : u) umax = std::max(umax, std::abs(v));
    // dA is even and nondecreasing in |r| for every kind
    return dA(umax);
}

double Nonlinearity::sufficient_K(double m) {
    const double c = 2.0 * std::sqrt(m) / (m + 1.0);
    const double p = (m + 1.0) / 2.0;
    // minimum of the average slope of the primitive over [-1, s]
    auto ratio = [p](double s) { return (1.0 + std::pow(s, p)) / (1.0 + s); };
    const auto [s_min, r_min] = boost::math::tools::brent_find_minima(ratio, 0.0, 1.0, 52);
    (void)s_min;
    const double far = 1.0 / (c * std::min(1.0, r_min));
    const double near = std::pow(2.0, p - 1.0) / c;
    const double growth = std::sqrt(m) * (m - 1.0) / 2.0;
    const double floor = 1.0 / std::sqrt(m);
    return std::max({1.0, far, near, growth, floor});
}

EvalResult eval_nonlinearity(const Nonlinearity& nl, double r) { return {nl.A(r), nl.frak_a(r)}; }

Nonlinearity regularize(const Nonlinearity& nl, double n) {
    if (nl.kind() != Nonlinearity::Kind::pure_power) {
        throw ConfigError("regularize: only pure power nonlinearities can be regularized");
    }
    // the regularized family meets Assumption A with constant 3K
    return Nonlinearity::regularized(nl.m(), n, 3.0 * nl.K());
}

double frak_a_primitive(const Nonlinearity& nl, double r) {
    return integrate([&nl](double z) { return nl.frak_a(z); }, 0.0, r);
}

std::vector<double> symmetric_log_lattice(double r_max, std::size_t samples) {
    if (!(r_max > 0.0)) throw std::invalid_argument("lattice: need r_max > 0");
    const std::size_t per_side = std::max<std::size_t>(samples / 2, 8);
    const double lo = 1e-8;
    std::vector<double> mags;
    mags.reserve(per_side + 2);
    const double span = std::log(r_max / lo);
    for (std::size_t j = 0; j < per_side; ++j) {
        mags.push_back(lo * std::exp(span * static_cast<double>(j) / static_cast<double>(per_side - 1)));
    }
    mags.back() = r_max;
    if (r_max > 1.0) mags.push_back(1.0);
    std::sort(mags.begin(), mags.end());
    mags.erase(std::unique(mags.begin(), mags.end()), mags.end());

    std::vector<double> out;
    out.reserve(2 * mags.size() + 1);
    for (auto it = mags.rbegin(); it != mags.rend(); ++it) out.push_back(-*it);
    out.push_back(0.0);
    for (double v : mags) out.push_back(v);
    return out;
}

bool ValidationReport::all_pass() const {
    return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.pass; });
}

const ClauseResult& ValidationReport::find(const std::string& name) const {
    for (const auto& c : clauses) {
        if (c.clause == name) return c;
    }
    throw std::out_of_range("validation report: no clause '" + name + "'");
}

ValidationReport validate_assumption_A(const Nonlinearity& nl, double r_max, std::size_t samples) {
    if (samples < 100) throw std::invalid_argument("validate_assumption_A: need samples >= 100");
    const double K = nl.K();
    const double m = nl.m();
    const auto lattice = symmetric_log_lattice(r_max, samples);
    const std::size_t zero = lattice.size() / 2;
    ValidationReport report;

    {
        ClauseResult c{clause::a_at_zero};
        c.tightest = std::abs(nl.frak_a(0.0));
        c.pass = c.tightest <= K;
        c.witness_r = 0.0;
        report.clauses.push_back(c);
    }
    {
        ClauseResult c{clause::a_prime_growth};
        double worst = 0.0;
        for (std::size_t j = zero + 1; j < lattice.size(); ++j) {
            const double r = lattice[j];
            const double eps = 1e-6 * r;
            const double deriv = (nl.frak_a(r + eps) - nl.frak_a(r - eps)) / (2.0 * eps);
            const double ratio = std::abs(deriv) / std::pow(r, (m - 3.0) / 2.0);
            if (ratio > worst) {
                worst = ratio;
                c.witness_r = r;
            }
        }
        c.tightest = worst;
        // central differences carry O(eps^2) relative error
        c.pass = worst <= K * (1.0 + 1e-6);
        report.clauses.push_back(c);
    }
    {
        ClauseResult c{clause::a_floor};
        double worst = 0.0;
        for (double r : lattice) {
            if (std::abs(r) < 1.0) continue;
            const double need = 1.0 / nl.frak_a(r);
            if (need > worst || (need == worst && r > 0.0)) {
                worst = need;
                c.witness_r = r;
            }
        }
        c.tightest = worst;
        c.pass = worst <= K * (1.0 + kRelSlack);
        report.clauses.push_back(c);
    }

    // cumulative primitive outward from zero
    std::vector<double> prim(lattice.size(), 0.0);
    auto fa = [&nl](double z) { return nl.frak_a(z); };
    for (std::size_t j = zero + 1; j < lattice.size(); ++j) {
        prim[j] = prim[j - 1] + integrate(fa, lattice[j - 1], lattice[j]);
    }
    for (std::size_t j = zero; j-- > 0;) prim[j] = prim[j + 1] - integrate(fa, lattice[j], lattice[j + 1]);

    ClauseResult far{clause::primitive_far};
    ClauseResult near{clause::primitive_near};
    double worst_far = 0.0, worst_near = 0.0;
    const double p_near = (m + 1.0) / 2.0;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        for (std::size_t j = i + 1; j < lattice.size(); ++j) {
            const double r = lattice[i], rt = lattice[j];
            const double gap = std::abs(prim[i] - prim[j]);
            const double d = std::abs(r - rt);
            const bool is_far = std::max(std::abs(r), std::abs(rt)) >= 1.0;
            const double ratio = (is_far ? d : std::pow(d, p_near)) / gap;
            if (is_far && ratio > worst_far) {
                worst_far = ratio;
                far.witness_r = r;
                far.witness_r_tilde = rt;
            } else if (!is_far && ratio > worst_near) {
                worst_near = ratio;
                near.witness_r = r;
                near.witness_r_tilde = rt;
            }
        }
    }
    far.tightest = worst_far;
    far.pass = worst_far <= K * (1.0 + kRelSlack);
    near.tightest = worst_near;
    near.pass = worst_near <= K * (1.0 + kRelSlack);
    report.clauses.push_back(far);
    report.clauses.push_back(near);
    return report;
}

std::string to_string(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::off: return "off";
        case NoiseFamily::additive: return "additive";
        case NoiseFamily::linear: return "linear";
        case NoiseFamily::holder: return "holder";
        case NoiseFamily::branching: return "branching";
    }
    return "?";
}

NoiseFamily parse_noise_family(const std::string& s) {
    for (auto f : {NoiseFamily::off, NoiseFamily::additive, NoiseFamily::linear, NoiseFamily::holder,
                   NoiseFamily::branching}) {
        if (to_string(f) == s) return f;
    }
    throw ConfigError("unknown noise family '" + s + "'");
}

void NoiseModel::validate() const {
    if (!(b > a)) throw ConfigError("noise: need b > a");
    if (!(amplitude >= 0.0)) throw ConfigError("noise: need amplitude >= 0");
    if (!(spatial_decay >= 2.0)) throw ConfigError("noise: need spatial decay q >= 2");
    if (!(K >= 1.0)) throw ConfigError("noise: need K >= 1");
    if (!(kappa > 0.0 && kappa <= 0.5)) throw ConfigError("noise: kappa must lie in (0, 1/2]");
    const double lo = 1.0 / std::min(m, 2.0);
    if (!(kappa_bar > lo && kappa_bar <= 1.0)) {
        throw ConfigError("noise: kappa_bar must lie in (1/min(m,2), 1]");
    }
    if (family == NoiseFamily::holder || family == NoiseFamily::branching) {
        if (!(exponent_kappa > 0.0 && exponent_kappa <= 0.5)) {
            throw ConfigError("noise: family exponent kappa must lie in (0, 1/2]");
        }
    }
    if (family != NoiseFamily::off && modes == 0) throw ConfigError("noise: need at least one mode");
}

double NoiseModel::g(double r) const {
    switch (family) {
        case NoiseFamily::off: return 0.0;
        case NoiseFamily::additive: return 1.0;
        case NoiseFamily::linear: return r;
        case NoiseFamily::holder: return signed_pow(r, 0.5 + exponent_kappa);
        case NoiseFamily::branching: return std::pow(std::abs(r), 0.5 + exponent_kappa);
    }
    return 0.0;
}

double NoiseModel::spatial(std::size_t k, double x) const {
    const double kk = static_cast<double>(k);
    return amplitude * std::pow(kk, -spatial_decay) * std::numbers::sqrt2 *
           std::sin(kk * std::numbers::pi * (x - a) / (b - a));
}

void NoiseModel::eval(double x, double r, std::span<double> out) const {
    const double gr = g(r);
    for (std::size_t k = 1; k <= modes; ++k) out[k - 1] = family == NoiseFamily::off ? 0.0 : spatial(k, x) * gr;
}

double NoiseModel::l2_norm(double x, double r) const {
    if (family == NoiseFamily::off) return 0.0;
    double s = 0.0;
    for (std::size_t k = 1; k <= modes; ++k) {
        const double v = spatial(k, x);
        s += v * v;
    }
    return std::sqrt(s) * std::abs(g(r));
}

double NoiseModel::sufficient_K() const {
    if (family == NoiseFamily::off) return 1.0;
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t k = 1; k <= modes; ++k) {
        const double kk = static_cast<double>(k);
        s0 += std::pow(kk, -2.0 * spatial_decay);
        s1 += std::pow(kk, 2.0 - 2.0 * spatial_decay);
    }
    const double L = b - a;
    const double a0 = amplitude * std::numbers::sqrt2 * std::sqrt(s0);
    const double a1 = amplitude * std::numbers::sqrt2 * std::sqrt(s1) * std::numbers::pi / L *
                      std::pow(L, 1.0 - kappa_bar);
    const double p_declared = 0.5 + kappa;
    const double p_family = 0.5 + exponent_kappa;
    double growth = 1.0, holder = 0.0, xfactor = 1.0;
    switch (family) {
        case NoiseFamily::additive: holder = 0.0; break;
        case NoiseFamily::linear: holder = 1.0; break;
        case NoiseFamily::holder:
            holder = p_declared <= p_family ? std::pow(2.0, 1.0 - p_family)
                                            : std::numeric_limits<double>::infinity();
            xfactor = 2.0;
            break;
        case NoiseFamily::branching:
            holder = p_declared <= p_family ? 1.0 : std::numeric_limits<double>::infinity();
            xfactor = 2.0;
            break;
        case NoiseFamily::off: break;
    }
    return std::max({1.0, a0 * growth, a0 * holder, a1 * xfactor});
}

double NoiseModel::truncation_tail() const {
    if (family == NoiseFamily::off) return 0.0;
    const double q2 = 2.0 * spatial_decay;
    return 2.0 * amplitude * amplitude * std::pow(static_cast<double>(modes), 1.0 - q2) / (q2 - 1.0);
}

NoiseModel NoiseModel::off() {
    NoiseModel nm;
    nm.family = NoiseFamily::off;
    return nm;
}

NoiseModel NoiseModel::make(NoiseFamily family, double amplitude, std::size_t modes, double m, double a,
                            double b, double exponent_kappa) {
    NoiseModel nm;
    nm.family = family;
    nm.amplitude = amplitude;
    nm.modes = family == NoiseFamily::off ? 0 : modes;
    nm.m = m;
    nm.a = a;
    nm.b = b;
    nm.exponent_kappa = exponent_kappa;
    nm.kappa = (family == NoiseFamily::holder || family == NoiseFamily::branching) ? exponent_kappa : 0.5;
    nm.kappa_bar = 1.0;
    nm.validate();
    nm.K = nm.sufficient_K();
    return nm;
}

std::vector<GridFunction> eval_sigma(const NoiseModel& nm, const GridFunction& u) {
    std::vector<GridFunction> out(nm.modes, GridFunction(u.grid));
    if (nm.family == NoiseFamily::off) return out;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = u.grid.node(i);
        const double gr = nm.g(u[i]);
        for (std::size_t k = 1; k <= nm.modes; ++k) out[k - 1][i] = nm.spatial(k, x) * gr;
    }
    return out;
}

ValidationReport validate_noise(const NoiseModel& nm, double r_max, std::size_t samples) {
    if (samples < 100) throw std::invalid_argument("validate_noise: need samples >= 100");
    const auto rs = symmetric_log_lattice(r_max, samples);
    constexpr std::size_t kX = 17;
    std::vector<double> xs(kX);
    for (std::size_t i = 0; i < kX; ++i) {
        xs[i] = nm.a + (nm.b - nm.a) * static_cast<double>(i) / static_cast<double>(kX - 1);
    }
    const std::size_t modes = nm.modes;
    // spatial table S[x][k]
    std::vector<double> S(kX * std::max<std::size_t>(modes, 1), 0.0);
    if (nm.family != NoiseFamily::off) {
        for (std::size_t i = 0; i < kX; ++i) {
            for (std::size_t k = 1; k <= modes; ++k) S[i * modes + k - 1] = nm.spatial(k, xs[i]);
        }
    }
    std::vector<double> gs(rs.size());
    for (std::size_t j = 0; j < rs.size(); ++j) gs[j] = nm.family == NoiseFamily::off ? 0.0 : nm.g(rs[j]);

    ValidationReport report;
    ClauseResult growth{clause::noise_growth};
    double worst_growth = 0.0;
    for (std::size_t i = 0; i < kX; ++i) {
        double s2 = 0.0;
        for (std::size_t k = 0; k < modes; ++k) s2 += S[i * modes + k] * S[i * modes + k];
        const double s = std::sqrt(s2);
        for (std::size_t j = 0; j < rs.size(); ++j) {
            const double ratio = s * std::abs(gs[j]) / (1.0 + std::abs(rs[j]));
            if (ratio > worst_growth) {
                worst_growth = ratio;
                growth.witness_x = xs[i];
                growth.witness_r = rs[j];
            }
        }
    }
    growth.tightest = worst_growth;
    growth.pass = worst_growth <= nm.K * (1.0 + kRelSlack);

    ClauseResult holder{clause::noise_holder};
    double worst = 0.0;
    const double p = 0.5 + nm.kappa;
    std::vector<double> dxk(kX * kX);
    for (std::size_t ix = 0; ix < kX; ++ix) {
        for (std::size_t iy = 0; iy < kX; ++iy) {
            dxk[ix * kX + iy] = std::pow(std::abs(xs[ix] - xs[iy]), nm.kappa_bar);
        }
    }
    for (std::size_t j = 0; j < rs.size(); ++j) {
        for (std::size_t l = 0; l < rs.size(); ++l) {
            const double d = std::abs(rs[j] - rs[l]);
            if (d > 1.0) continue;
            const double dp = std::pow(d, p);
            const double grow = 1.0 + std::abs(rs[j]);
            for (std::size_t ix = 0; ix < kX; ++ix) {
                for (std::size_t iy = 0; iy < kX; ++iy) {
                    const double denom = dp + grow * dxk[ix * kX + iy];
                    if (denom == 0.0) continue;
                    double diff2 = 0.0;
                    for (std::size_t k = 0; k < modes; ++k) {
                        const double v = S[ix * modes + k] * gs[j] - S[iy * modes + k] * gs[l];
                        diff2 += v * v;
                    }
                    const double ratio = std::sqrt(diff2) / denom;
                    if (ratio > worst) {
                        worst = ratio;
                        holder.witness_x = xs[ix];
                        holder.witness_y = xs[iy];
                        holder.witness_r = rs[j];
                        holder.witness_r_tilde = rs[l];
                    }
                }
            }
        }
    }
    holder.tightest = worst;
    holder.pass = worst <= nm.K * (1.0 + kRelSlack);
    report.clauses.push_back(growth);
    report.clauses.push_back(holder);
    return report;
}

double noise_distance(const NoiseModel& nm1, const NoiseModel& nm2, const Grid1D& grid, double r_max,
                      std::size_t samples) {
    if (nm1.m != nm2.m) throw std::invalid_argument("noise_distance: models must share m");
    const double m = nm1.m;
    const auto rs = symmetric_log_lattice(r_max, samples);
    const std::size_t modes = std::max(nm1.modes, nm2.modes);
    std::vector<double> s1(modes, 0.0), s2(modes, 0.0);
    double best = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.node(i);
        for (std::size_t k = 1; k <= modes; ++k) {
            s1[k - 1] = (nm1.family != NoiseFamily::off && k <= nm1.modes) ? nm1.spatial(k, x) : 0.0;
            s2[k - 1] = (nm2.family != NoiseFamily::off && k <= nm2.modes) ? nm2.spatial(k, x) : 0.0;
        }
        for (double r : rs) {
            const double g1 = nm1.family == NoiseFamily::off ? 0.0 : nm1.g(r);
            const double g2 = nm2.family == NoiseFamily::off ? 0.0 : nm2.g(r);
            double d2 = 0.0;
            for (std::size_t k = 0; k < modes; ++k) {
                const double v = s1[k] * g1 - s2[k] * g2;
                d2 += v * v;
            }
            best = std::max(best, d2 / std::pow(1.0 + std::abs(r), m + 1.0));
        }
    }
    return best;
}

}  // namespace pme
