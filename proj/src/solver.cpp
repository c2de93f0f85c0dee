#include "pme/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pme {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::fd_semi_implicit: return "fd_semi_implicit";
        case Scheme::fd_explicit: return "fd_explicit";
        case Scheme::galerkin: return "galerkin";
    }
    return "?";
}

std::string to_string(Equation e) { return e == Equation::porous_medium ? "porous_medium" : "semilinear"; }
std::string to_string(Drift d) { return d == Drift::zero ? "zero" : "cubic_dissipative"; }

Scheme parse_scheme(const std::string& s) {
    for (auto v : {Scheme::fd_semi_implicit, Scheme::fd_explicit, Scheme::galerkin}) {
        if (to_string(v) == s) return v;
    }
    throw ConfigError("unknown scheme '" + s + "'");
}

Equation parse_equation(const std::string& s) {
    for (auto v : {Equation::porous_medium, Equation::semilinear}) {
        if (to_string(v) == s) return v;
    }
    throw ConfigError("unknown equation '" + s + "'");
}

Drift parse_drift(const std::string& s) {
    for (auto v : {Drift::zero, Drift::cubic_dissipative}) {
        if (to_string(v) == s) return v;
    }
    throw ConfigError("unknown drift '" + s + "'");
}

void SolverConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver: need dt > 0");
    if (!(t_end >= dt)) throw ConfigError("solver: need dt <= t_end");
    if (record_every == 0) throw ConfigError("solver: record_every must be >= 1");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("solver: cfl_safety must lie in (0, 1]");
    if (scheme == Scheme::galerkin && galerkin_modes == 0) throw ConfigError("solver: galerkin needs >= 1 mode");
    if (equation == Equation::semilinear && scheme == Scheme::galerkin) {
        throw ConfigError("solver: the semilinear equation uses finite differences only");
    }
    const double n = std::round(t_end / dt);
    if (std::abs(n * dt - t_end) > 1e-9 * t_end) throw ConfigError("solver: t_end must be a multiple of dt");
}

std::size_t SolverConfig::steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

BlowUpError::BlowUpError(double time, std::size_t step)
    : std::runtime_error("blow-up at t = " + std::to_string(time) + " (step " + std::to_string(step) + ")"),
      time_(time),
      step_(step) {}

void check_blow_up(std::span<const double> u, double time, std::size_t step) {
    for (double v : u) {
        if (!std::isfinite(v) || std::abs(v) > kBlowUpThreshold) throw BlowUpError(time, step);
    }
}

double drift_value(Drift d, double u) { return d == Drift::zero ? 0.0 : -u * u * u; }

// ---------------------------------------------------------------------------
// sine basis

SineBasis::SineBasis(const Grid1D& grid, std::size_t modes)
    : grid_(grid), modes_(modes), table_(modes * grid.size()), eigen_(modes) {
    if (modes == 0 || modes > grid.size()) throw ConfigError("sine basis: need 1 <= L <= N");
    const std::size_t n = grid.size();
    const double norm = std::sqrt(2.0 / static_cast<double>(n + 1));
    for (std::size_t l = 0; l < modes; ++l) {
        for (std::size_t i = 0; i < n; ++i) {
            table_[l * n + i] = norm * std::sin(static_cast<double>((l + 1) * (i + 1)) * std::numbers::pi /
                                                static_cast<double>(n + 1));
        }
        eigen_[l] = laplacian_eigenvalue(grid, l + 1);
    }
}

void SineBasis::analyze(std::span<const double> nodal, std::span<double> coeffs) const {
    const std::size_t n = grid_.size();
    for (std::size_t l = 0; l < modes_; ++l) {
        const double* row = &table_[l * n];
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += row[i] * nodal[i];
        coeffs[l] = s;
    }
}

void SineBasis::synthesize(std::span<const double> coeffs, std::span<double> nodal) const {
    const std::size_t n = grid_.size();
    std::fill(nodal.begin(), nodal.end(), 0.0);
    for (std::size_t l = 0; l < modes_; ++l) {
        const double* row = &table_[l * n];
        const double c = coeffs[l];
        for (std::size_t i = 0; i < n; ++i) nodal[i] += c * row[i];
    }
}

SpectralState project(const SineBasis& basis, const GridFunction& u) {
    SpectralState s{basis.grid(), std::vector<double>(basis.modes())};
    basis.analyze(u.view(), s.coeffs);
    return s;
}

GridFunction reconstruct(const SineBasis& basis, const SpectralState& s) {
    GridFunction u(basis.grid());
    basis.synthesize(s.coeffs, u.values);
    return u;
}

// ---------------------------------------------------------------------------
// stepper

Stepper::Stepper(const Grid1D& grid, const Nonlinearity& nl, const NoiseModel& nm, const SolverConfig& cfg)
    : grid_(grid),
      nl_(nl),
      nm_(nm),
      cfg_(cfg),
      modes_(nm.family == NoiseFamily::off ? 0 : nm.modes) {
    const std::size_t n = grid.size();
    spatial_.resize(modes_ * n);
    for (std::size_t k = 0; k < modes_; ++k) {
        for (std::size_t i = 0; i < n; ++i) spatial_[k * n + i] = nm.spatial(k + 1, grid.node(i));
    }
    noise_.resize(n);
    a_.resize(n);
    lap_.resize(n);
    delta_.resize(n);
    scratch_.resize(n);
    if (cfg.scheme == Scheme::galerkin && cfg.equation == Equation::porous_medium) {
        basis_.emplace(grid, cfg.galerkin_modes);
        coeffs_.resize(cfg.galerkin_modes);
        acoeffs_.resize(cfg.galerkin_modes);
    }
}

void Stepper::noise_term(std::span<const double> u, std::span<const double> dW) {
    const std::size_t n = grid_.size();
    if (dW.size() < modes_) throw std::invalid_argument("stepper: too few noise increments");
    std::fill(noise_.begin(), noise_.end(), 0.0);
    for (std::size_t k = 0; k < modes_; ++k) {
        const double* row = &spatial_[k * n];
        const double w = dW[k];
        for (std::size_t i = 0; i < n; ++i) noise_[i] += row[i] * w;
    }
    if (nm_.family == NoiseFamily::linear) {
        for (std::size_t i = 0; i < n; ++i) noise_[i] *= u[i];
    } else if (nm_.family != NoiseFamily::additive) {
        for (std::size_t i = 0; i < n; ++i) noise_[i] *= nm_.g(u[i]);
    }
}

void Stepper::diffuse_semi_implicit(std::span<double> u, double dt) {
    const double h = grid_.h();
    nl_.apply(u, a_);
    discrete_laplacian(a_, h, lap_);
    const double D = nl_.max_dA(u);
    for (std::size_t i = 0; i < u.size(); ++i) delta_[i] = dt * lap_[i];
    // (I - dt D Delta_h) delta = dt Delta_h A(u)
    solve_shifted_laplacian(dt * D, h, delta_, delta_, scratch_);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += delta_[i];
}

void Stepper::diffuse_explicit(std::span<double> u, double dt) {
    const double h = grid_.h();
    double remaining = dt;
    while (remaining > 1e-15 * dt) {
        const double D = nl_.max_dA(u);
        const double sub = std::min(remaining, cfg_.cfl_safety * h * h / (2.0 * D + 1e-12));
        nl_.apply(u, a_);
        discrete_laplacian(a_, h, lap_);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += sub * lap_[i];
        remaining -= sub;
    }
}

void Stepper::diffuse_galerkin(std::span<double> u, double dt) {
    const SineBasis& basis = *basis_;
    basis.analyze(u, coeffs_);
    nl_.apply(u, a_);
    basis.analyze(a_, acoeffs_);
    const double D = nl_.max_dA(u);
    for (std::size_t l = 0; l < basis.modes(); ++l) {
        const double lam = basis.eigenvalue(l);
        coeffs_[l] -= dt * lam * acoeffs_[l] / (1.0 + dt * D * lam);
    }
    if (modes_ > 0) {
        basis.analyze(noise_, acoeffs_);
        for (std::size_t l = 0; l < basis.modes(); ++l) coeffs_[l] += acoeffs_[l];
    }
    basis.synthesize(coeffs_, u);
}

void Stepper::diffuse_semilinear(std::span<double> u, double dt) {
    const double h = grid_.h();
    discrete_laplacian(u, h, lap_);
    for (std::size_t i = 0; i < u.size(); ++i) delta_[i] = dt * (lap_[i] + drift_value(cfg_.drift, u[i]));
    solve_shifted_laplacian(dt, h, delta_, delta_, scratch_);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += delta_[i];
}

void Stepper::advance(std::span<double> u, std::span<const double> dW) { advance(u, dW, cfg_.dt); }

void Stepper::advance(std::span<double> u, std::span<const double> dW, double dt) {
    const bool noisy = modes_ > 0;
    if (noisy) noise_term(u, dW);
    if (cfg_.equation == Equation::semilinear) {
        diffuse_semilinear(u, dt);
    } else {
        switch (cfg_.scheme) {
            case Scheme::fd_semi_implicit: diffuse_semi_implicit(u, dt); break;
            case Scheme::fd_explicit: diffuse_explicit(u, dt); break;
            case Scheme::galerkin: diffuse_galerkin(u, dt); return;  // noise projected inside
        }
    }
    if (noisy) {
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += noise_[i];
    }
}

GridFunction step_fd(const GridFunction& state, const Nonlinearity& nl, const NoiseModel& nm, double dt,
                     std::span<const double> dW, FdMode mode, double cfl_safety) {
    SolverConfig cfg;
    cfg.scheme = mode == FdMode::semi_implicit ? Scheme::fd_semi_implicit : Scheme::fd_explicit;
    cfg.dt = dt;
    cfg.cfl_safety = cfl_safety;
    Stepper stepper(state.grid, nl, nm, cfg);
    GridFunction out = state;
    stepper.advance(out.values, dW, dt);
    check_blow_up(out.values, dt, 1);
    return out;
}

SpectralState step_galerkin(const SpectralState& s, const Nonlinearity& nl, const NoiseModel& nm, double dt,
                            std::span<const double> dW) {
    SolverConfig cfg;
    cfg.scheme = Scheme::galerkin;
    cfg.galerkin_modes = s.coeffs.size();
    cfg.dt = dt;
    Stepper stepper(s.grid, nl, nm, cfg);
    SineBasis basis(s.grid, s.coeffs.size());
    GridFunction u = reconstruct(basis, s);
    stepper.advance(u.values, dW, dt);
    check_blow_up(u.values, dt, 1);
    return project(basis, u);
}

GridFunction step_semilinear(const GridFunction& state, Drift drift, const NoiseModel& nm, double dt,
                             std::span<const double> dW) {
    SolverConfig cfg;
    cfg.equation = Equation::semilinear;
    cfg.drift = drift;
    cfg.dt = dt;
    Stepper stepper(state.grid, Nonlinearity::linear(), nm, cfg);
    GridFunction out = state;
    stepper.advance(out.values, dW, dt);
    check_blow_up(out.values, dt, 1);
    return out;
}

// ---------------------------------------------------------------------------
// coupled runs

namespace {

double moment(std::span<const double> u, double h, double m) {
    double s = 0.0;
    if (m == 2.0) {
        for (double v : u) s += std::abs(v) * v * v;
    } else {
        for (double v : u) s += std::pow(std::abs(v), m + 1.0);
    }
    return s * h;
}

std::vector<GridFunction> initial_states(const SolverConfig& cfg, const std::vector<GridFunction>& ics) {
    if (ics.empty()) throw std::invalid_argument("run_coupled: need at least one initial condition");
    std::vector<GridFunction> states = ics;
    for (const auto& s : states) {
        if (!(s.grid == ics.front().grid)) throw std::invalid_argument("run_coupled: members must share a grid");
    }
    if (cfg.scheme == Scheme::galerkin && cfg.equation == Equation::porous_medium) {
        SineBasis basis(ics.front().grid, cfg.galerkin_modes);
        for (auto& s : states) s = reconstruct(basis, project(basis, s));
    }
    return states;
}

}  // namespace

CoupledResult run_coupled(const SolverConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                          const std::vector<GridFunction>& ics, std::uint64_t seed, const RecordOptions& opts) {
    cfg.validate();
    std::vector<GridFunction> states = initial_states(cfg, ics);
    const Grid1D grid = states.front().grid;
    const Weight w = solve_weight(grid);
    const double h = grid.h();
    const double m = nl.m();
    const std::size_t n_members = states.size();

    CoupledResult out;
    out.members.resize(n_members);
    for (std::size_t i = 0; i < n_members; ++i) {
        for (std::size_t j = i + 1; j < n_members; ++j) out.pairs.push_back(PairRecord{i, j, {}, {}});
    }

    std::vector<std::vector<double>> a_vals(n_members, std::vector<double>(grid.size()));
    auto record = [&](double t) {
        out.times.push_back(t);
        for (std::size_t j = 0; j < n_members; ++j) {
            const auto u = states[j].view();
            auto& rec = out.members[j];
            const double wl1 = weighted_l1_norm(u, w);
            double wedge = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) wedge += std::abs(std::min(u[i], opts.clip_level)) * w[i];
            rec.moment.push_back(moment(u, h, m));
            rec.wl1.push_back(wl1);
            rec.f_min.push_back(std::min(wl1, opts.clip_level));
            rec.f_wedge.push_back(wedge * h);
            nl.apply(u, a_vals[j]);
        }
        for (auto& p : out.pairs) {
            p.distance.push_back(weighted_l1_distance(states[p.first].view(), states[p.second].view(), w));
            double diss = 0.0;
            const auto& a1 = a_vals[p.first];
            const auto& a2 = a_vals[p.second];
            for (std::size_t i = 0; i < a1.size(); ++i) diss += std::abs(a1[i] - a2[i]);
            p.dissipation.push_back(diss * h);
        }
    };

    Stepper stepper(grid, nl, nm, cfg);
    const NoiseIncrements noise(seed);
    std::vector<double> dW(stepper.noise_modes());
    const std::size_t steps = cfg.steps();
    record(0.0);
    for (std::size_t n = 1; n <= steps; ++n) {
        const double t = static_cast<double>(n) * cfg.dt;
        noise.fill(n - 1, cfg.dt, dW);
        try {
            for (auto& s : states) {
                stepper.advance(s.values, dW);
                check_blow_up(s.values, t, n);
            }
        } catch (const BlowUpError& e) {
            out.blown_up = true;
            out.blow_up_time = e.time();
            break;
        }
        if (n % cfg.record_every == 0) record(t);
    }
    out.final_states = std::move(states);
    return out;
}

Trajectory run_trajectory(const SolverConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                          const GridFunction& ic, std::uint64_t seed) {
    cfg.validate();
    auto states = initial_states(cfg, {ic});
    GridFunction u = std::move(states.front());
    Trajectory tr{u.grid, cfg.dt, cfg.record_every, seed, {}, {}};
    Stepper stepper(u.grid, nl, nm, cfg);
    const NoiseIncrements noise(seed);
    std::vector<double> dW(stepper.noise_modes());
    tr.times.push_back(0.0);
    tr.states.push_back(u.values);
    const std::size_t steps = cfg.steps();
    for (std::size_t n = 1; n <= steps; ++n) {
        const double t = static_cast<double>(n) * cfg.dt;
        noise.fill(n - 1, cfg.dt, dW);
        stepper.advance(u.values, dW);
        check_blow_up(u.values, t, n);
        if (n % cfg.record_every == 0) {
            tr.times.push_back(t);
            tr.states.push_back(u.values);
        }
    }
    return tr;
}

// ---------------------------------------------------------------------------
// ensembles

std::string member_key(std::size_t member, const std::string& functional) {
    return "member" + std::to_string(member) + "." + functional;
}

std::string pair_key(std::size_t i, std::size_t j, const std::string& functional) {
    return "pair" + std::to_string(i) + "_" + std::to_string(j) + "." + functional;
}

const Series& EnsembleStats::at(const std::string& name) const {
    auto it = series.find(name);
    if (it == series.end()) throw std::out_of_range("ensemble: no series '" + name + "'");
    return it->second;
}

EnsembleStats EnsembleStats::member_view(std::size_t member) const {
    EnsembleStats out;
    out.times = times;
    out.runs = runs;
    out.blow_ups = blow_ups;
    const std::string prefix = "member" + std::to_string(member) + ".";
    for (const auto& [name, s] : series) {
        if (name.rfind(prefix, 0) == 0) out.series[member_key(0, name.substr(prefix.size()))] = s;
    }
    return out;
}

Series aggregate(const std::vector<std::vector<double>>& values) {
    Series s;
    if (values.empty()) return s;
    const std::size_t M = values.size();
    const std::size_t T = values.front().size();
    s.mean.resize(T);
    s.std_error.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        // shifted sums: identical samples give an exact mean and zero spread
        const double ref = values[0][t];
        double sum = 0.0;
        for (std::size_t j = 0; j < M; ++j) sum += values[j][t] - ref;
        const double mean_shift = sum / static_cast<double>(M);
        double ss = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            const double d = values[j][t] - ref - mean_shift;
            ss += d * d;
        }
        s.mean[t] = ref + mean_shift;
        s.std_error[t] = M > 1 ? std::sqrt(ss / static_cast<double>(M - 1) / static_cast<double>(M)) : 0.0;
    }
    return s;
}

EnsembleStats run_ensemble(const SolverConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                           const std::vector<GridFunction>& ics, std::size_t M, std::uint64_t base_seed,
                           std::size_t threads, const RecordOptions& opts) {
    if (M < 2) throw ConfigError("ensemble: need M >= 2");
    cfg.validate();
    auto results = parallel_map(M, threads, [&](std::size_t j) {
        CoupledResult r = run_coupled(cfg, nl, nm, ics, base_seed + j, opts);
        r.final_states.clear();
        return r;
    });

    std::vector<const CoupledResult*> kept;
    std::size_t blow_ups = 0;
    for (const auto& r : results) {
        if (r.blown_up) {
            ++blow_ups;
        } else {
            kept.push_back(&r);
        }
    }
    if (blow_ups * 10 > M) {
        throw EnsembleRejected("ensemble rejected: " + std::to_string(blow_ups) + " of " + std::to_string(M) +
                               " members blew up");
    }
    if (kept.size() < 2) throw EnsembleRejected("ensemble rejected: fewer than two usable runs");

    EnsembleStats stats;
    stats.times = kept.front()->times;
    stats.runs = kept.size();
    stats.blow_ups = blow_ups;

    auto collect = [&](auto getter) {
        std::vector<std::vector<double>> rows;
        rows.reserve(kept.size());
        for (const auto* r : kept) rows.push_back(getter(*r));
        return aggregate(rows);
    };
    for (std::size_t j = 0; j < ics.size(); ++j) {
        stats.series[member_key(j, "moment")] = collect([j](const CoupledResult& r) { return r.members[j].moment; });
        stats.series[member_key(j, "wl1")] = collect([j](const CoupledResult& r) { return r.members[j].wl1; });
        stats.series[member_key(j, "f_min")] = collect([j](const CoupledResult& r) { return r.members[j].f_min; });
        stats.series[member_key(j, "f_wedge")] =
            collect([j](const CoupledResult& r) { return r.members[j].f_wedge; });
    }
    for (std::size_t p = 0; p < kept.front()->pairs.size(); ++p) {
        const auto& pr = kept.front()->pairs[p];
        stats.series[pair_key(pr.first, pr.second, "distance")] =
            collect([p](const CoupledResult& r) { return r.pairs[p].distance; });
        stats.series[pair_key(pr.first, pr.second, "dissipation")] =
            collect([p](const CoupledResult& r) { return r.pairs[p].dissipation; });
    }
    return stats;
}

}  // namespace pme
