#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pme/domain.hpp"
#include "pme/model.hpp"
#include "pme/noise_stream.hpp"

namespace pme {

enum class Scheme { fd_semi_implicit, fd_explicit, galerkin };
enum class Equation { porous_medium, semilinear };
enum class Drift { zero, cubic_dissipative };

std::string to_string(Scheme s);
std::string to_string(Equation e);
std::string to_string(Drift d);
Scheme parse_scheme(const std::string& s);
Equation parse_equation(const std::string& s);
Drift parse_drift(const std::string& s);

/// |u|_inf above this (or any nonfinite value) aborts a trajectory.
inline constexpr double kBlowUpThreshold = 1e8;

struct SolverConfig {
    Scheme scheme = Scheme::fd_semi_implicit;
    std::size_t galerkin_modes = 0;  // L; only for Scheme::galerkin
    double dt = 1e-3;
    double t_end = 1.0;
    double cfl_safety = 0.9;
    std::size_t record_every = 1;
    Equation equation = Equation::porous_medium;
    Drift drift = Drift::zero;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t steps() const;
};

class BlowUpError : public std::runtime_error {
public:
    BlowUpError(double time, std::size_t step);
    double time() const { return time_; }
    std::size_t step() const { return step_; }

private:
    double time_;
    std::size_t step_;
};

/// More than 10% of ensemble members blew up.
class EnsembleRejected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Orthonormal discrete sine basis e_l(x_i) = sqrt(2/(N+1)) sin(l pi (i+1)/(N+1)), l = 1..L.
/// It diagonalises Delta_h (and Delta_h^2) on the grid.
class SineBasis {
public:
    SineBasis(const Grid1D& grid, std::size_t modes);

    std::size_t modes() const { return modes_; }
    const Grid1D& grid() const { return grid_; }
    /// lambda_l > 0 with Delta_h e_l = -lambda_l e_l
    double eigenvalue(std::size_t l) const { return eigen_[l]; }

    void analyze(std::span<const double> nodal, std::span<double> coeffs) const;
    void synthesize(std::span<const double> coeffs, std::span<double> nodal) const;

private:
    Grid1D grid_;
    std::size_t modes_;
    std::vector<double> table_;  // [l * N + i]
    std::vector<double> eigen_;
};

struct SpectralState {
    Grid1D grid;
    std::vector<double> coeffs;
};

SpectralState project(const SineBasis& basis, const GridFunction& u);
GridFunction reconstruct(const SineBasis& basis, const SpectralState& s);

/// One time step of a single trajectory with a reusable workspace.
/// The noise coefficient is evaluated at the pre-step state (Ito / Euler-Maruyama).
class Stepper {
public:
    Stepper(const Grid1D& grid, const Nonlinearity& nl, const NoiseModel& nm, const SolverConfig& cfg);

    /// Advance u by cfg.dt (or `dt` if given) in place using increments dW (size nm.modes).
    void advance(std::span<double> u, std::span<const double> dW);
    void advance(std::span<double> u, std::span<const double> dW, double dt);

    std::size_t noise_modes() const { return modes_; }
    const Grid1D& grid() const { return grid_; }

private:
    void noise_term(std::span<const double> u, std::span<const double> dW);
    void diffuse_semi_implicit(std::span<double> u, double dt);
    void diffuse_explicit(std::span<double> u, double dt);
    void diffuse_galerkin(std::span<double> u, double dt);
    void diffuse_semilinear(std::span<double> u, double dt);

    Grid1D grid_;
    Nonlinearity nl_;
    NoiseModel nm_;
    SolverConfig cfg_;
    std::size_t modes_;
    std::vector<double> spatial_;  // [k * N + i]
    std::vector<double> noise_, a_, lap_, delta_, scratch_;
    std::vector<double> coeffs_, acoeffs_;
    std::optional<SineBasis> basis_;
};

/// Throws BlowUpError if u is nonfinite or exceeds the blow-up threshold.
void check_blow_up(std::span<const double> u, double time, std::size_t step);

/// Single steps, functional form. dW holds one increment per noise mode.
enum class FdMode { semi_implicit, explicit_cfl };
GridFunction step_fd(const GridFunction& state, const Nonlinearity& nl, const NoiseModel& nm, double dt,
                     std::span<const double> dW, FdMode mode = FdMode::semi_implicit, double cfl_safety = 0.9);
SpectralState step_galerkin(const SpectralState& coeffs, const Nonlinearity& nl, const NoiseModel& nm,
                            double dt, std::span<const double> dW);
GridFunction step_semilinear(const GridFunction& state, Drift drift, const NoiseModel& nm, double dt,
                             std::span<const double> dW);

double drift_value(Drift d, double u);

/// Functionals recorded along a coupled run.
struct RecordOptions {
    /// c in the clipped Lipschitz functionals min(||u||_w, c) and ||u ^ c||_w.
    double clip_level = 0.05;
};

struct MemberRecord {
    std::vector<double> moment;     // ||u||_{L^{m+1}}^{m+1}
    std::vector<double> wl1;        // ||u||_{L^1_w}
    std::vector<double> f_min;      // min(||u||_{L^1_w}, c)
    std::vector<double> f_wedge;    // ||min(u, c)||_{L^1_w}
};

struct PairRecord {
    std::size_t first = 0;
    std::size_t second = 1;
    std::vector<double> distance;     // ||u - u~||_{L^1_w}
    std::vector<double> dissipation;  // ||A(u) - A(u~)||_{L^1}
};

struct CoupledResult {
    std::vector<double> times;
    std::vector<MemberRecord> members;
    std::vector<PairRecord> pairs;
    bool blown_up = false;
    double blow_up_time = 0.0;
    std::vector<GridFunction> final_states;
};

/// Advance all members with one shared increment stream keyed by `seed`.
/// Blow-up stops the run and returns the partial records with `blown_up` set.
CoupledResult run_coupled(const SolverConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                          const std::vector<GridFunction>& ics, std::uint64_t seed,
                          const RecordOptions& opts = {});

/// Dense record of a single trajectory (every record_every steps) for entropy diagnostics.
struct Trajectory {
    Grid1D grid;
    double dt = 0.0;
    std::size_t record_every = 1;
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
};

Trajectory run_trajectory(const SolverConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                          const GridFunction& ic, std::uint64_t seed);

struct Series {
    std::vector<double> mean;
    std::vector<double> std_error;
};

struct EnsembleStats {
    std::vector<double> times;
    std::map<std::string, Series> series;
    std::size_t runs = 0;
    std::size_t blow_ups = 0;

    const Series& at(const std::string& name) const;
    /// Series of member j re-labelled as member 0 (e.g. to compare two members as two ensembles).
    EnsembleStats member_view(std::size_t member) const;
};

std::string member_key(std::size_t member, const std::string& functional);
std::string pair_key(std::size_t i, std::size_t j, const std::string& functional);

/// Mean and standard error (sample std / sqrt(M)) over rows; values[run][t].
Series aggregate(const std::vector<std::vector<double>>& values);

/// M coupled runs with seeds base_seed + j, run on `threads` workers.
/// Results depend only on (cfg, seeds), never on the thread count.
EnsembleStats run_ensemble(const SolverConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                           const std::vector<GridFunction>& ics, std::size_t M, std::uint64_t base_seed,
                           std::size_t threads = 1, const RecordOptions& opts = {});

/// Run `count` independent jobs job(j) on `threads` workers; output order is by j.
template <typename Job>
auto parallel_map(std::size_t count, std::size_t threads, Job&& job)
    -> std::vector<decltype(job(std::size_t{}))>;

}  // namespace pme

#include "pme/detail/parallel_map.hpp"
