#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pme/analysis.hpp"
#include "pme/domain.hpp"
#include "pme/model.hpp"
#include "pme/solver.hpp"

namespace pme {

enum class Experiment { weight, validate, simulate, contract, comedown, selfsim, mix, stability, lemmas, entropy, semilinear };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& s);
std::vector<std::string> experiment_names();

struct DomainSettings {
    double a = 0.0;
    double b = 1.0;
    std::size_t N = 200;
};

struct ModelSettings {
    std::string kind = "pure_power";  // pure_power | viscosity | regularized | linear
    double m = 2.0;
    double K = 0.0;  // 0: the sufficient constant for the kind
    double n = 0.0;  // viscosity / regularized only
};

struct NoiseSettings {
    NoiseFamily family = NoiseFamily::off;
    double amplitude = 0.5;
    std::size_t modes = 4;
    double kappa = 0.05;
    double decay = 2.0;
};

/// Initial condition: amplitude * shape, shape in {bump, weight, sine, profile, zero}.
struct InitialSettings {
    std::string shape = "bump";
    double amplitude = 2.0;
};

struct EnsembleSettings {
    std::size_t M = 64;
    std::uint64_t seed = 1;
};

struct AnalysisSettings {
    double fit_lo = 0.0;  // 0: t_end / 16
    double fit_hi = 0.0;  // 0: t_end
    double clip = 0.05;
    double slack = 2.0;                 // stderr multiplier
    double dissipation_tol = 1e-3;      // integrated contraction inequality
    double rate_tol_lo = 0.25;          // exponent >= -1/(m-1) - rate_tol_lo
    double rate_tol_hi = 0.15;          // exponent <= -1/(m-1) + rate_tol_hi
    double delta = 0.1;
    double level = 0.0;
    std::string testfn = "center";
    double entropy_constant = 0.11;
    double scale = 10.0;                // comedown: second initial condition is scale * first
    double scale_tol = 0.25;
    std::vector<double> check_times{0.5, 1.0, 5.0, 10.0};
    double selfsim_tol = 0.01;
    double exponent_tol = 1e-3;
    double concavity_tol = 1e-6;
    double gap_factor = 0.5;            // semilinear slope <= -gap_factor * lambda_1
    double ratio_max = 0.5;             // stability: D(second largest n) / D(smallest n)
};

struct ExperimentConfig {
    Experiment experiment = Experiment::simulate;
    DomainSettings domain;
    ModelSettings model;
    NoiseSettings noise;
    SolverConfig solver;
    InitialSettings ic{"bump", 2.0};
    InitialSettings ic2{"bump", -2.0};
    EnsembleSettings ensemble;
    AnalysisSettings analysis;
    double validate_r_max = 100.0;
    std::size_t validate_samples = 400;
    std::vector<double> stability_n{4, 8, 16, 32};
    std::size_t lemma_pairs = 1000000;
    std::uint64_t lemma_seed = 7;
    std::filesystem::path output_dir = "out";
    std::set<std::string> emit{"csv", "json"};

    /// Sorted `key = value` lines of every setting that affects results (output.* excluded).
    std::string canonical() const;
    /// FNV-1a 64 of canonical().
    std::uint64_t hash() const;
};

/// Every recognised key, sorted.
std::vector<std::string> config_keys();

/// Parse `key = value` lines ('#' comments, dotted keys). Unknown keys and bad values throw
/// ConfigError naming the key.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
/// Set one key from its string form.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct NamedSeries {
    std::string name;
    DecaySeries series;
};

struct SpatialTable {
    std::string name;
    std::vector<double> x;
    std::vector<double> values;
};

struct NamedFit {
    std::string name;
    RateFit fit;
};

struct ExperimentResult {
    Experiment experiment = Experiment::simulate;
    std::uint64_t config_hash = 0;
    std::vector<NamedSeries> series;
    std::vector<SpatialTable> tables;
    std::vector<Verdict> verdicts;
    std::vector<NamedFit> fits;
    std::map<std::string, std::string> metadata;

    bool all_pass() const;
    const Verdict& verdict(const std::string& name) const;
};

/// Build the model objects described by a config.
Grid1D make_grid(const ExperimentConfig& cfg);
Nonlinearity make_nonlinearity(const ExperimentConfig& cfg);
NoiseModel make_noise(const ExperimentConfig& cfg);
GridFunction make_initial(const ExperimentConfig& cfg, const InitialSettings& ic);

/// Run the configured experiment. Throws ConfigError, EnsembleRejected or BlowUpError.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t threads = 1);

/// Stability sweep over regularization levels n (regularized A_n, clamped data, truncated noise).
ExperimentResult run_stability_sweep(const ExperimentConfig& cfg, const std::vector<double>& n_values,
                                     std::size_t threads = 1);

/// CSV per series / table, one JSON verdict file, optional SVG plots. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg);

/// Command line entry point; returns the process exit code
/// (0 pass, 1 verdict failure, 2 configuration error, 3 blow-up).
int run_cli(int argc, char** argv);

}  // namespace pme
