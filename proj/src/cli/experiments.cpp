#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pme/cli.hpp"
#include "pme/exactsol.hpp"

namespace pme {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Verdict make_verdict(std::string name, bool pass, double observed, double expected, double tolerance) {
    return Verdict{std::move(name), pass, observed, expected, tolerance, {}};
}

Verdict renamed(Verdict v, std::string name) {
    v.name = std::move(name);
    return v;
}

double rate_target(double m) { return -1.0 / (m - 1.0); }

std::pair<double, double> fit_window(const ExperimentConfig& cfg) {
    auto [lo, hi] = default_fit_window(cfg.solver.t_end);
    if (cfg.analysis.fit_lo > 0.0) lo = cfg.analysis.fit_lo;
    if (cfg.analysis.fit_hi > 0.0) hi = cfg.analysis.fit_hi;
    return {lo, hi};
}

RecordOptions record_options(const ExperimentConfig& cfg) { return RecordOptions{cfg.analysis.clip}; }

/// Deterministic runs are done once (zero stderr); noisy runs as an ensemble of M coupled runs.
EnsembleStats simulate(const ExperimentConfig& cfg, const std::vector<GridFunction>& ics, std::size_t threads) {
    const Nonlinearity nl = make_nonlinearity(cfg);
    const NoiseModel nm = make_noise(cfg);
    if (nm.family != NoiseFamily::off) {
        return run_ensemble(cfg.solver, nl, nm, ics, cfg.ensemble.M, cfg.ensemble.seed, threads, record_options(cfg));
    }
    const CoupledResult r = run_coupled(cfg.solver, nl, nm, ics, cfg.ensemble.seed, record_options(cfg));
    if (r.blown_up) throw BlowUpError(r.blow_up_time, 0);
    EnsembleStats s;
    s.times = r.times;
    s.runs = 1;
    const std::vector<double> zeros(r.times.size(), 0.0);
    for (std::size_t j = 0; j < r.members.size(); ++j) {
        const auto& mr = r.members[j];
        s.series[member_key(j, "moment")] = {mr.moment, zeros};
        s.series[member_key(j, "wl1")] = {mr.wl1, zeros};
        s.series[member_key(j, "f_min")] = {mr.f_min, zeros};
        s.series[member_key(j, "f_wedge")] = {mr.f_wedge, zeros};
    }
    for (const auto& p : r.pairs) {
        s.series[pair_key(p.first, p.second, "distance")] = {p.distance, zeros};
        s.series[pair_key(p.first, p.second, "dissipation")] = {p.dissipation, zeros};
    }
    return s;
}

void add_all_series(ExperimentResult& res, const EnsembleStats& stats) {
    for (const auto& [name, s] : stats.series) res.series.push_back({name, DecaySeries{stats.times, s.mean, s.std_error}});
    res.metadata["runs"] = std::to_string(stats.runs);
    res.metadata["blow_ups"] = std::to_string(stats.blow_ups);
}

bool all_positive(const DecaySeries& s, double lo, double hi) {
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s.times[k] >= lo && s.times[k] <= hi && !(s.values[k] > 0.0)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

ExperimentResult exp_weight(const ExperimentConfig& cfg) {
    ExperimentResult res;
    const Grid1D grid = make_grid(cfg);
    const double m = cfg.model.m;
    const double mstar = m / (m - 1.0);
    const Weight w = solve_weight(grid, {1.0, 2.0, mstar});
    res.tables.push_back({"weight", grid.nodes(), std::vector<double>(w.values().begin(), w.values().end())});

    const double L = grid.length();
    const double h = grid.h();
    double nodal = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.node(i);
        nodal = std::max(nodal, std::abs(w[i] - 0.5 * (x - grid.a()) * (grid.b() - x)));
    }
    const double l1 = w.lp_norm(1.0);
    const double l2sq = w.lp_norm(2.0) * w.lp_norm(2.0);
    res.verdicts.push_back(make_verdict("nodal values", nodal <= 1e-10 * L * L, nodal, 0.0, 1e-10 * L * L));
    res.verdicts.push_back(make_verdict("L1 norm", std::abs(l1 - L * L * L / 12.0) <= L * h * h / 6.0, l1,
                                        L * L * L / 12.0, L * h * h / 6.0));
    const double l2_tol = L * h * h * std::pow(L * L / 8.0, 2.0);
    res.verdicts.push_back(
        make_verdict("L2 norm squared", std::abs(l2sq - std::pow(L, 5) / 120.0) <= l2_tol, l2sq, std::pow(L, 5) / 120.0, l2_tol));
    res.verdicts.push_back(make_verdict("max", std::abs(w.max() - L * L / 8.0) <= h * h / 8.0 + 1e-15, w.max(),
                                        L * L / 8.0, h * h / 8.0));
    res.metadata["norm_l1"] = fmt(l1);
    res.metadata["norm_l2"] = fmt(w.lp_norm(2.0));
    res.metadata["norm_lmstar"] = fmt(w.lp_norm(mstar));
    res.metadata["mstar"] = fmt(mstar);
    return res;
}

void add_report(ExperimentResult& res, const ValidationReport& rep, const std::string& prefix, double declared) {
    for (const auto& c : rep.clauses) {
        Verdict v = make_verdict(prefix + c.clause, c.pass, c.tightest, declared, 0.0);
        if (!c.pass && c.witness_r) v.violations.push_back({0.0, *c.witness_r, c.witness_r_tilde.value_or(0.0)});
        res.verdicts.push_back(v);
    }
}

ExperimentResult exp_validate(const ExperimentConfig& cfg) {
    ExperimentResult res;
    const Nonlinearity nl = make_nonlinearity(cfg);
    add_report(res, validate_assumption_A(nl, cfg.validate_r_max, cfg.validate_samples), "nonlinearity: ", nl.K());
    const NoiseModel nm = make_noise(cfg);
    if (nm.family != NoiseFamily::off) {
        add_report(res, validate_noise(nm, cfg.validate_r_max, cfg.validate_samples), "noise: ", nm.K);
    }
    res.metadata["nonlinearity"] = nl.name();
    res.metadata["K"] = fmt(nl.K());
    return res;
}

ExperimentResult exp_simulate(const ExperimentConfig& cfg, std::size_t threads) {
    ExperimentResult res;
    const auto stats = simulate(cfg, {make_initial(cfg, cfg.ic), make_initial(cfg, cfg.ic2)}, threads);
    add_all_series(res, stats);
    res.verdicts.push_back(make_verdict("ensemble accepted", true, static_cast<double>(stats.blow_ups), 0.0, 0.0));
    return res;
}

ExperimentResult exp_contract(const ExperimentConfig& cfg, std::size_t threads) {
    ExperimentResult res;
    const Grid1D grid = make_grid(cfg);
    const double m = cfg.model.m;
    const auto stats = simulate(cfg, {make_initial(cfg, cfg.ic), make_initial(cfg, cfg.ic2)}, threads);
    add_all_series(res, stats);
    const auto dist = DecaySeries::from_stats(stats, pair_key(0, 1, "distance"));
    const auto diss = DecaySeries::from_stats(stats, pair_key(0, 1, "dissipation"));

    res.verdicts.push_back(renamed(check_nonincreasing(dist, cfg.analysis.slack), "distance nonincreasing"));
    res.verdicts.push_back(renamed(contraction_check(dist, diss, cfg.analysis.dissipation_tol, cfg.analysis.slack),
                                   "integrated contraction"));

    if (dist.values.front() == 0.0) {
        const double mx = *std::max_element(dist.values.begin(), dist.values.end());
        res.verdicts.push_back(make_verdict("identical data stay identical", mx == 0.0, mx, 0.0, 0.0));
        return res;
    }

    const auto [lo, hi] = fit_window(cfg);
    const double target = rate_target(m);
    if (all_positive(dist, lo, hi)) {
        const RateFit fit = fit_power_exponent(dist, lo, hi);
        res.fits.push_back({"distance", fit});
        const bool ok = fit.exponent >= target - cfg.analysis.rate_tol_lo && fit.exponent <= target + cfg.analysis.rate_tol_hi;
        res.verdicts.push_back(make_verdict("rate exponent", ok, fit.exponent, target,
                                            std::max(cfg.analysis.rate_tol_lo, cfg.analysis.rate_tol_hi)));
    } else {
        res.verdicts.push_back(make_verdict("rate exponent", false, 0.0, target, 0.0));
    }

    const Weight w = solve_weight(grid, {m / (m - 1.0)});
    const double coeff = envelope_coefficient(m, w);
    res.verdicts.push_back(renamed(ode_comparison(dist, coeff, m, cfg.analysis.slack), "envelope domination"));
    res.metadata["envelope_coefficient"] = fmt(coeff);
    const double fitted = fitted_envelope_coefficient(dist, m, lo, hi);
    res.verdicts.push_back(
        renamed(ode_comparison(dist, fitted, m, cfg.analysis.slack), "envelope domination, fitted constant"));
    res.metadata["fitted_envelope_coefficient"] = fmt(fitted);
    res.metadata["fit_window"] = fmt(lo) + "," + fmt(hi);
    return res;
}

ExperimentResult exp_comedown(const ExperimentConfig& cfg, std::size_t threads) {
    ExperimentResult res;
    const double m = cfg.model.m;
    const GridFunction xi = make_initial(cfg, cfg.ic);
    GridFunction big = xi;
    for (double& v : big.values) v *= cfg.analysis.scale;
    const auto stats = simulate(cfg, {xi, big}, threads);
    add_all_series(res, stats);
    const auto n1 = DecaySeries::from_stats(stats, member_key(0, "moment"));
    const auto n2 = DecaySeries::from_stats(stats, member_key(1, "moment"));
    const double p = (m + 1.0) / (m - 1.0);
    for (const auto& [name, s] : {std::pair{"member0.weighted_moment", n1}, std::pair{"member1.weighted_moment", n2}}) {
        DecaySeries ws = s;
        for (std::size_t k = 0; k < ws.size(); ++k) {
            const double f = std::pow(std::min(ws.times[k], 1.0), p);
            ws.values[k] *= f;
            ws.std_error[k] *= f;
        }
        res.series.push_back({name, ws});
    }
    const double s1 = coming_down_statistic(n1, m);
    const double s2 = coming_down_statistic(n2, m);
    const double rel = std::abs(s1 - s2) / std::max(s1, s2);
    res.verdicts.push_back(make_verdict("initial-condition independence", rel < cfg.analysis.scale_tol, rel, 0.0,
                                        cfg.analysis.scale_tol));
    res.metadata["statistic_small"] = fmt(s1);
    res.metadata["statistic_large"] = fmt(s2);
    return res;
}

ExperimentResult exp_selfsim(const ExperimentConfig& cfg) {
    ExperimentResult res;
    const Grid1D grid = make_grid(cfg);
    const double m = cfg.model.m;
    const Profile prof = solve_profile(grid, m);
    res.tables.push_back({"profile", grid.nodes(), prof.f.values});
    res.metadata["profile_residual"] = fmt(prof.residual_norm);
    res.metadata["profile_midpoint_v"] = fmt(prof.midpoint_v);

    const Trajectory tr = run_trajectory(cfg.solver, make_nonlinearity(cfg), NoiseModel::off(), prof.f, cfg.ensemble.seed);
    const Weight w = solve_weight(grid);
    std::vector<double> shifted, norms;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        shifted.push_back(1.0 + tr.times[k]);
        norms.push_back(weighted_l1_norm(tr.states[k], w));
    }
    res.series.push_back({"norm", DecaySeries::exact(tr.times, norms)});

    for (double tc : cfg.analysis.check_times) {
        std::size_t k = tr.times.size();
        for (std::size_t j = 0; j < tr.times.size(); ++j) {
            if (std::abs(tr.times[j] - tc) <= 1e-9 * std::max(1.0, tc)) k = j;
        }
        if (k == tr.times.size()) throw ConfigError("selfsim: check time " + fmt(tc) + " is not a record time");
        const GridFunction ex = separable_solution(prof, tr.times[k]);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < ex.size(); ++i) {
            err = std::max(err, std::abs(tr.states[k][i] - ex[i]));
            scale = std::max(scale, std::abs(ex[i]));
        }
        const double rel = err / scale;
        res.verdicts.push_back(make_verdict("relative error at t=" + fmt(tc), rel < cfg.analysis.selfsim_tol, rel, 0.0,
                                            cfg.analysis.selfsim_tol));
    }

    const auto [lo, hi] = fit_window(cfg);
    const RateFit fit = fit_power_exponent(DecaySeries::exact(shifted, norms), 1.0 + lo, 1.0 + hi);
    res.fits.push_back({"norm vs 1+t", fit});
    const double target = rate_target(m);
    res.verdicts.push_back(make_verdict("norm decay exponent", std::abs(fit.exponent - target) <= cfg.analysis.exponent_tol,
                                        fit.exponent, target, cfg.analysis.exponent_tol));
    return res;
}

ExperimentResult exp_mix(const ExperimentConfig& cfg, std::size_t threads) {
    ExperimentResult res;
    const double m = cfg.model.m;
    const auto stats = simulate(cfg, {make_initial(cfg, cfg.ic), make_initial(cfg, cfg.ic2)}, threads);
    add_all_series(res, stats);
    const EnsembleStats a = stats.member_view(0);
    const EnsembleStats b = stats.member_view(1);
    const auto dist = DecaySeries::from_stats(stats, pair_key(0, 1, "distance"));
    const auto [lo, hi] = fit_window(cfg);
    const double target = rate_target(m);
    for (const std::string f : {"f_min", "f_wedge"}) {
        const DecaySeries gap = mixing_gap(a, b, member_key(0, f));
        res.series.push_back({"gap." + f, gap});
        res.verdicts.push_back(renamed(lipschitz_domination(gap, dist), "lipschitz domination " + f));
        if (!all_positive(gap, lo, hi)) {
            res.verdicts.push_back(make_verdict("gap exponent " + f, false, 0.0, target, cfg.analysis.rate_tol_hi));
            continue;
        }
        const RateFit fit = fit_power_exponent(gap, lo, hi);
        res.fits.push_back({"gap." + f, fit});
        res.verdicts.push_back(make_verdict("gap exponent " + f, fit.exponent <= target + cfg.analysis.rate_tol_hi,
                                            fit.exponent, target, cfg.analysis.rate_tol_hi));
    }
    res.metadata["fit_window"] = fmt(lo) + "," + fmt(hi);
    res.metadata["clip"] = fmt(cfg.analysis.clip);
    return res;
}

// lower bound sweep, ODE comparison, eta_delta, rate function, validators
ExperimentResult exp_lemmas(const ExperimentConfig& cfg) {
    ExperimentResult res;

    for (double m : {1.5, 2.0, 3.0, 5.0}) {
        const std::size_t bad = lower_bound_sweep(m, cfg.lemma_pairs, cfg.lemma_seed);
        res.verdicts.push_back(make_verdict("lower bound sweep m=" + fmt(m), bad == 0, static_cast<double>(bad), 0.0, 0.0));
    }
    {
        const LowerBound lb = lower_bound_check(1.0, -1.0, 2.0);
        res.verdicts.push_back(make_verdict("lower bound u=1 v=-1 m=2", lb.ok && lb.lhs == 2.0 && lb.rhs == 1.0, lb.lhs,
                                            lb.rhs, 0.0));
    }

    {
        std::vector<double> t, h;
        for (int k = 0; k <= 40; ++k) {
            t.push_back(0.1 * k);
            h.push_back(theoretical_envelope(0.1 * k, 1.0, 1.0, 2.0));
        }
        auto scaled = h;
        for (double& v : scaled) v *= 0.9;
        auto bumped = h;
        bumped[20] *= 1.2;
        const Verdict eq = ode_comparison(DecaySeries::exact(t, h), 1.0, 2.0);
        const Verdict sub = ode_comparison(DecaySeries::exact(t, scaled), 1.0, 2.0);
        const Verdict bad = ode_comparison(DecaySeries::exact(t, bumped), 1.0, 2.0);
        const bool ok = eq.pass && sub.pass && !bad.pass && bad.violations.size() == 1 &&
                        std::abs(bad.violations.front().time - t[20]) < 1e-12;
        res.verdicts.push_back(make_verdict("ode comparison cases", ok, bad.observed, 0.0, 0.0));
    }

    {
        double worst_abs = 0.0, worst_curv = 0.0, worst_support = 0.0, worst_origin = 0.0, worst_mass = 0.0;
        for (double delta : {0.01, 0.1, 1.0}) {
            const EtaValues e0 = eta_delta(delta, 0.0);
            worst_origin = std::max({worst_origin, std::abs(e0.value), std::abs(e0.d1)});
            std::vector<double> rs{10 * delta, -10 * delta, 0.5 * delta, -0.5 * delta};
            for (int k = -400; k <= 400; ++k) rs.push_back(delta * k / 100.0);
            for (double r : rs) {
                const EtaValues e = eta_delta(delta, r);
                worst_abs = std::max(worst_abs, std::abs(e.value - std::abs(r)) / delta);
                worst_curv = std::max(worst_curv, e.d2 * delta / 2.0);
                if (std::abs(r) >= delta) worst_support = std::max(worst_support, std::abs(e.d2));
            }
            const double mass = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                [delta](double r) { return eta_delta(delta, r).d2; }, -delta, delta, 15, 1e-12);
            worst_mass = std::max(worst_mass, std::abs(mass - 2.0));
        }
        res.verdicts.push_back(make_verdict("eta(0) = eta'(0) = 0", worst_origin == 0.0, worst_origin, 0.0, 0.0));
        res.verdicts.push_back(make_verdict("|eta - |r|| <= delta", worst_abs <= 1.0, worst_abs, 1.0, 0.0));
        res.verdicts.push_back(make_verdict("supp eta'' in [-delta, delta]", worst_support == 0.0, worst_support, 0.0, 0.0));
        res.verdicts.push_back(make_verdict("|eta''| <= 2/delta", worst_curv <= 1.0, worst_curv, 1.0, 0.0));
        res.verdicts.push_back(make_verdict("int eta'' = 2", worst_mass <= 1e-9, worst_mass, 0.0, 1e-9));
        res.metadata["eta_tilde"] = eta_tilde_description();
    }

    {
        const double kappa = 0.5, kappa_bar = 1.0, m = 2.0;
        const auto [nlo, nhi] = nu_interval(m, kappa_bar);
        const double nu = 0.5 * (nlo + nhi);
        const double alpha = alpha_for_nu(m, nu);
        std::vector<double> eps, valid, invalid;
        for (int k = 1; k <= 30; ++k) {
            const double e = std::ldexp(1.0, -k);
            eps.push_back(e);
            valid.push_back(g_alpha(alpha, schedule_delta(e, nu), e, 0.0, kappa, kappa_bar));
            invalid.push_back(g_alpha(0.45, e, e, 0.0, kappa, kappa_bar));
        }
        bool dec = true, inc = true;
        for (std::size_t k = 5; k < eps.size(); ++k) {
            dec = dec && valid[k] < valid[k - 1];
            inc = inc && invalid[k] > invalid[k - 1];
        }
        res.verdicts.push_back(make_verdict("rate function vanishes on schedule", dec && valid.back() < 1e-3, valid.back(),
                                            0.0, 1e-3));
        res.verdicts.push_back(make_verdict("rate function diverges off schedule", inc && invalid.back() > 1e9,
                                            invalid.back(), 1e9, 0.0));
        const double b = 0.999;
        const double g = g_alpha(0.25, b, b, b, kappa, kappa_bar);
        res.verdicts.push_back(make_verdict("rate function near the corner", std::abs(g - 6.0) < 0.05, g, 6.0, 0.05));
        res.metadata["schedule_nu"] = fmt(nu);
        res.metadata["schedule_alpha"] = fmt(alpha);
    }

    for (double m : {1.5, 2.0, 3.0}) {
        const Nonlinearity nl = Nonlinearity::pure_power(m, Nonlinearity::sufficient_K(m));
        const bool ok = validate_assumption_A(nl, cfg.validate_r_max, cfg.validate_samples).all_pass();
        res.verdicts.push_back(make_verdict("assumption A pure power m=" + fmt(m), ok, nl.K(), nl.K(), 0.0));
    }
    {
        const Nonlinearity lin = Nonlinearity::linear(2.0, 1.0);
        const auto rep = validate_assumption_A(lin, cfg.validate_r_max, cfg.validate_samples);
        const ClauseResult& c = rep.find(clause::primitive_near);
        res.verdicts.push_back(make_verdict("linear A flagged", !c.pass, c.tightest, 1.0, 0.0));
    }
    for (auto fam : {NoiseFamily::additive, NoiseFamily::linear, NoiseFamily::holder, NoiseFamily::branching}) {
        const NoiseModel nm = NoiseModel::make(fam, 0.5, 8, 2.0);
        const bool ok = validate_noise(nm, 10.0, cfg.validate_samples / 4).all_pass();
        res.verdicts.push_back(make_verdict("noise assumption " + to_string(fam), ok, nm.K, nm.K, 0.0));
    }
    return res;
}

ExperimentResult exp_entropy(const ExperimentConfig& cfg, std::size_t threads) {
    ExperimentResult res;
    if (cfg.solver.record_every != 1) throw ConfigError("entropy: solver.record_every must be 1");
    const Grid1D grid = make_grid(cfg);
    const Nonlinearity nl = make_nonlinearity(cfg);
    const NoiseModel nm = make_noise(cfg);
    const GridFunction xi = make_initial(cfg, cfg.ic);
    const std::size_t count = nm.family == NoiseFamily::off ? 1 : cfg.ensemble.M;
    const auto trajectories = parallel_map(count, threads, [&](std::size_t j) {
        return run_trajectory(cfg.solver, nl, nm, xi, cfg.ensemble.seed + j);
    });
    std::vector<Trajectory> reversed;
    for (const auto& tr : trajectories) reversed.push_back(time_reversed(tr));

    const double delta = cfg.analysis.delta;
    const double bound = -cfg.analysis.entropy_constant * (grid.h() + cfg.solver.dt + delta);
    const auto fwd = entropy_residual(trajectories, nl, nm, delta, cfg.analysis.level, cfg.analysis.testfn);
    const auto rev = entropy_residual(reversed, nl, nm, delta, cfg.analysis.level, cfg.analysis.testfn);
    const double slack = cfg.analysis.slack;
    res.verdicts.push_back(make_verdict("entropy inequality", fwd.mean + slack * fwd.std_error >= bound, fwd.mean, bound,
                                        slack * fwd.std_error));
    res.verdicts.push_back(make_verdict("reversed trajectory flagged", rev.mean + slack * rev.std_error < bound, rev.mean,
                                        bound, slack * rev.std_error));
    res.metadata["residual"] = fmt(fwd.mean);
    res.metadata["residual_stderr"] = fmt(fwd.std_error);
    res.metadata["reversed_residual"] = fmt(rev.mean);
    res.metadata["bound"] = fmt(bound);
    res.metadata["eta_tilde"] = eta_tilde_description();
    return res;
}

ExperimentResult exp_semilinear(const ExperimentConfig& cfg_in, std::size_t threads) {
    ExperimentConfig cfg = cfg_in;
    cfg.solver.equation = Equation::semilinear;
    if (cfg.solver.scheme == Scheme::galerkin) cfg.solver.scheme = Scheme::fd_semi_implicit;
    ExperimentResult res;
    const Grid1D grid = make_grid(cfg);
    const auto stats = simulate(cfg, {make_initial(cfg, cfg.ic), make_initial(cfg, cfg.ic2)}, threads);
    add_all_series(res, stats);
    const auto dist = DecaySeries::from_stats(stats, pair_key(0, 1, "distance"));
    const double gap = laplacian_eigenvalue(grid, 1);
    res.verdicts.push_back(
        renamed(check_log_concave_decreasing(dist, cfg.analysis.concavity_tol * gap, cfg.analysis.slack), "log gap concave decreasing"));
    const auto [lo, hi] = fit_window(cfg);
    if (all_positive(dist, lo, hi)) {
        const RateFit fit = fit_log_slope(dist, lo, hi);
        res.fits.push_back({"log gap slope", fit});
        res.verdicts.push_back(make_verdict("log slope vs spectral gap", fit.exponent <= -cfg.analysis.gap_factor * gap,
                                            fit.exponent, -cfg.analysis.gap_factor * gap, 0.0));
    } else {
        res.verdicts.push_back(make_verdict("log slope vs spectral gap", false, 0.0, -cfg.analysis.gap_factor * gap, 0.0));
    }
    res.metadata["spectral_gap"] = fmt(gap);
    res.metadata["drift"] = to_string(cfg.solver.drift);
    return res;
}

}  // namespace

// ---------------------------------------------------------------------------

bool ExperimentResult::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

const Verdict& ExperimentResult::verdict(const std::string& name) const {
    for (const auto& v : verdicts) {
        if (v.name == name) return v;
    }
    throw std::out_of_range("no verdict '" + name + "'");
}

Grid1D make_grid(const ExperimentConfig& cfg) { return Grid1D(cfg.domain.a, cfg.domain.b, cfg.domain.N); }

Nonlinearity make_nonlinearity(const ExperimentConfig& cfg) {
    const auto& s = cfg.model;
    if (!(s.m >= 1.0)) throw ConfigError("config: model.m must be >= 1");
    const bool auto_K = s.K == 0.0;
    if (s.kind == "pure_power") return Nonlinearity::pure_power(s.m, auto_K ? Nonlinearity::sufficient_K(s.m) : s.K);
    if (s.kind == "viscosity") {
        if (!(s.n > 0.0)) throw ConfigError("config: model.n must be > 0 for the viscosity kind");
        return Nonlinearity::viscosity(s.m, s.n, auto_K ? Nonlinearity::sufficient_K(s.m) : s.K);
    }
    if (s.kind == "regularized") {
        if (!(s.n >= 1.0)) throw ConfigError("config: model.n must be >= 1 for the regularized kind");
        return regularize(Nonlinearity::pure_power(s.m, auto_K ? Nonlinearity::sufficient_K(s.m) : s.K / 3.0), s.n);
    }
    if (s.kind == "linear") return Nonlinearity::linear(s.m, auto_K ? 1.0 : s.K);
    throw ConfigError("config: key 'model.kind' has invalid value '" + s.kind + "'");
}

NoiseModel make_noise(const ExperimentConfig& cfg) {
    const auto& s = cfg.noise;
    if (s.family == NoiseFamily::off) return NoiseModel::off();
    if (s.modes == 0) throw ConfigError("config: noise.modes must be >= 1");
    NoiseModel nm = NoiseModel::make(s.family, s.amplitude, s.modes, cfg.model.m, cfg.domain.a, cfg.domain.b, s.kappa);
    if (s.decay != nm.spatial_decay) {
        nm.spatial_decay = s.decay;
        nm.K = nm.sufficient_K();
    }
    nm.validate();
    return nm;
}

GridFunction make_initial(const ExperimentConfig& cfg, const InitialSettings& ic) {
    const Grid1D grid = make_grid(cfg);
    const double a = grid.a(), L = grid.length(), amp = ic.amplitude;
    if (ic.shape == "bump") {
        return sample(grid, [=](double x) {
            const double y = 2.0 * (x - a) / L - 1.0;
            return std::abs(y) < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - y * y)) : 0.0;
        });
    }
    if (ic.shape == "weight") {
        return sample(grid, [=](double x) { return amp * 4.0 * (x - a) * (a + L - x) / (L * L); });
    }
    if (ic.shape == "sine") {
        return sample(grid, [=](double x) { return amp * std::sin(std::numbers::pi * (x - a) / L); });
    }
    if (ic.shape == "profile") {
        GridFunction f = solve_profile(grid, cfg.model.m).f;
        for (double& v : f.values) v *= amp;
        return f;
    }
    if (ic.shape == "zero") return GridFunction(grid);
    throw ConfigError("config: unknown initial shape '" + ic.shape + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t threads) {
    cfg.solver.validate();
    ExperimentResult res;
    switch (cfg.experiment) {
        case Experiment::weight: res = exp_weight(cfg); break;
        case Experiment::validate: res = exp_validate(cfg); break;
        case Experiment::simulate: res = exp_simulate(cfg, threads); break;
        case Experiment::contract: res = exp_contract(cfg, threads); break;
        case Experiment::comedown: res = exp_comedown(cfg, threads); break;
        case Experiment::selfsim: res = exp_selfsim(cfg); break;
        case Experiment::mix: res = exp_mix(cfg, threads); break;
        case Experiment::stability: res = run_stability_sweep(cfg, cfg.stability_n, threads); break;
        case Experiment::lemmas: res = exp_lemmas(cfg); break;
        case Experiment::entropy: res = exp_entropy(cfg, threads); break;
        case Experiment::semilinear: res = exp_semilinear(cfg, threads); break;
    }
    res.experiment = cfg.experiment;
    res.config_hash = cfg.hash();
    res.metadata["blow_up_threshold"] = fmt(kBlowUpThreshold);
    return res;
}

// ---------------------------------------------------------------------------
// stability sweep

ExperimentResult run_stability_sweep(const ExperimentConfig& cfg, const std::vector<double>& n_values,
                                     std::size_t threads) {
    if (n_values.size() < 3) throw ConfigError("stability: need at least 3 values of n");
    for (std::size_t i = 1; i < n_values.size(); ++i) {
        if (!(n_values[i] > n_values[i - 1])) throw ConfigError("stability: n values must be increasing");
    }
    if (!(n_values.front() >= 1.0)) throw ConfigError("stability: n values must be >= 1");
    if (cfg.model.kind != "pure_power") throw ConfigError("stability: the sweep regularizes a pure power");
    cfg.solver.validate();

    const Grid1D grid = make_grid(cfg);
    const double m = cfg.model.m;
    const Nonlinearity base = Nonlinearity::pure_power(m, Nonlinearity::sufficient_K(m));
    const NoiseModel nm_ref = make_noise(cfg);
    const bool noisy = nm_ref.family != NoiseFamily::off;
    const GridFunction xi = make_initial(cfg, cfg.ic);
    const std::size_t V = n_values.size();
    const double n_ref = n_values.back();

    struct Variant {
        Nonlinearity nl;
        NoiseModel nm;
        GridFunction ic;
    };
    std::vector<Variant> variants;
    for (double n : n_values) {
        NoiseModel nm = nm_ref;
        if (noisy) {
            ExperimentConfig c = cfg;
            c.noise.modes = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(static_cast<double>(cfg.noise.modes) * n / n_ref)));
            nm = make_noise(c);
        }
        GridFunction ic = xi;
        for (double& v : ic.values) v = std::clamp(v, -n, n);
        variants.push_back({regularize(base, n), nm, ic});
    }

    struct Sample {
        std::vector<double> times;
        std::vector<std::vector<double>> dist;  // [variant][record]
        std::vector<double> D;
    };
    const Weight w = solve_weight(grid);
    const std::size_t samples = noisy ? cfg.ensemble.M : 1;
    const auto results = parallel_map(samples, threads, [&](std::size_t j) {
        const std::uint64_t seed = cfg.ensemble.seed + j;
        std::vector<Stepper> steppers;
        std::vector<GridFunction> states;
        for (const auto& v : variants) {
            steppers.emplace_back(grid, v.nl, v.nm, cfg.solver);
            states.push_back(v.ic);
        }
        const NoiseIncrements noise(seed);
        std::vector<double> dW(nm_ref.family == NoiseFamily::off ? 0 : cfg.noise.modes);
        Sample s;
        s.dist.resize(V);
        auto record = [&](double t) {
            s.times.push_back(t);
            for (std::size_t v = 0; v < V; ++v) {
                s.dist[v].push_back(weighted_l1_distance(states[v].view(), states[V - 1].view(), w));
            }
        };
        record(0.0);
        const std::size_t steps = cfg.solver.steps();
        for (std::size_t n = 1; n <= steps; ++n) {
            const double t = static_cast<double>(n) * cfg.solver.dt;
            noise.fill(n - 1, cfg.solver.dt, dW);
            for (std::size_t v = 0; v < V; ++v) {
                steppers[v].advance(states[v].values, std::span<const double>(dW).first(steppers[v].noise_modes()));
                check_blow_up(states[v].values, t, n);
            }
            if (n % cfg.solver.record_every == 0) record(t);
        }
        for (std::size_t v = 0; v < V; ++v) {
            double integral = 0.0;
            for (std::size_t k = 1; k < s.times.size(); ++k) {
                integral += 0.5 * (s.times[k] - s.times[k - 1]) * (s.dist[v][k] + s.dist[v][k - 1]);
            }
            s.D.push_back(integral);
        }
        return s;
    });

    ExperimentResult res;
    std::vector<std::vector<double>> Drows;
    for (const auto& s : results) Drows.push_back(s.D);
    const Series D = samples > 1 ? aggregate(Drows) : Series{Drows.front(), std::vector<double>(V, 0.0)};
    res.series.push_back({"sweep_D", DecaySeries{n_values, D.mean, D.std_error}});
    for (std::size_t v = 0; v + 1 < V; ++v) {
        std::vector<std::vector<double>> rows;
        for (const auto& s : results) rows.push_back(s.dist[v]);
        const Series sv = samples > 1 ? aggregate(rows) : Series{rows.front(), std::vector<double>(rows.front().size(), 0.0)};
        res.series.push_back({"distance_n" + fmt(n_values[v]), DecaySeries{results.front().times, sv.mean, sv.std_error}});
    }

    bool mono = true;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 1; v < V; ++v) {
        const double slack = cfg.analysis.slack * std::hypot(D.std_error[v], D.std_error[v - 1]);
        const double excess = D.mean[v] - D.mean[v - 1] - slack;
        worst = std::max(worst, excess);
        mono = mono && (noisy ? excess <= 0.0 : D.mean[v] < D.mean[v - 1] || (v == V - 1 && D.mean[v] == 0.0));
    }
    res.verdicts.push_back(make_verdict(noisy ? "D nonincreasing" : "D strictly decreasing", mono, worst, 0.0, 0.0));
    const double ratio = D.mean[V - 2] / D.mean[0];
    res.verdicts.push_back(make_verdict("D ratio", ratio < cfg.analysis.ratio_max, ratio, 0.0, cfg.analysis.ratio_max));
    for (std::size_t v = 0; v < V; ++v) res.metadata["D_n" + fmt(n_values[v])] = fmt(D.mean[v]);
    res.metadata["variant"] = noisy ? "stochastic" : "deterministic";
    return res;
}

}  // namespace pme
