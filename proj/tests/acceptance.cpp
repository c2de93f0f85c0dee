// Acceptance suite: one PASS/FAIL line per criterion. Every configuration and tolerance is
// pinned here; nothing is read from disk.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pme/cli.hpp"

using namespace pme;
namespace fs = std::filesystem;

namespace {

const char* kContractM2 = R"(
experiment = contract
model.m = 2
domain.N = 200
solver.dt = 2e-4
solver.t_end = 4
solver.record_every = 250
noise.family = linear
noise.amplitude = 0.5
noise.modes = 4
ensemble.M = 64
ensemble.seed = 1
ic.shape = bump
ic.amplitude = 2
ic2.shape = bump
ic2.amplitude = -2
analysis.slack = 2
analysis.dissipation_tol = 1e-3
analysis.fit_lo = 0.5
analysis.fit_hi = 4
analysis.rate_tol_lo = 0.25
analysis.rate_tol_hi = 0.15
)";

const char* kSelfSim = R"(
experiment = selfsim
model.m = 2
domain.N = 400
solver.dt = 1e-4
solver.t_end = 10
solver.record_every = 500
noise.family = off
ic.shape = profile
ic.amplitude = 1
analysis.check_times = 0.5, 1, 5, 10
analysis.selfsim_tol = 0.01
analysis.exponent_tol = 1e-3
)";

const char* kComedown = R"(
experiment = comedown
model.m = 2
domain.N = 200
solver.dt = 2e-4
solver.t_end = 2
solver.record_every = 50
noise.family = linear
noise.amplitude = 0.5
noise.modes = 4
ensemble.M = 32
ensemble.seed = 1
ic.shape = bump
ic.amplitude = 2
analysis.scale = 10
analysis.scale_tol = 0.25
)";

const char* kMix = R"(
experiment = mix
model.m = 2
domain.N = 200
solver.dt = 2e-4
solver.t_end = 8
solver.record_every = 250
noise.family = linear
noise.amplitude = 0.5
noise.modes = 4
ensemble.M = 64
ensemble.seed = 1
ic.shape = bump
ic.amplitude = 2
ic2.shape = zero
ic2.amplitude = 0
analysis.clip = 0.05
analysis.fit_lo = 0.5
analysis.fit_hi = 8
analysis.rate_tol_hi = 0.2
)";

const char* kStability = R"(
experiment = stability
model.m = 2
domain.N = 200
solver.dt = 2e-4
solver.t_end = 1
solver.record_every = 50
noise.family = off
noise.modes = 8
ic.shape = bump
ic.amplitude = 6
stability.n_values = 4, 8, 16, 32
analysis.ratio_max = 0.5
)";

const char* kLemmas = R"(
experiment = lemmas
lemmas.pairs = 1000000
lemmas.seed = 7
)";

const char* kEntropy = R"(
experiment = entropy
model.m = 2
domain.N = 100
solver.dt = 1e-4
solver.t_end = 0.5
solver.record_every = 1
noise.family = off
ic.shape = bump
ic.amplitude = 2
analysis.delta = 0.1
analysis.level = 0
analysis.testfn = center
analysis.entropy_constant = 0.11
)";

const char* kSemilinear = R"(
experiment = semilinear
domain.N = 200
solver.dt = 1e-3
solver.t_end = 2
solver.record_every = 50
solver.drift = cubic_dissipative
noise.family = additive
noise.amplitude = 1
noise.modes = 4
ensemble.M = 64
ensemble.seed = 1
ic.shape = sine
ic.amplitude = 0.05
ic2.shape = zero
ic2.amplitude = 0
analysis.concavity_tol = 1e-6
analysis.gap_factor = 0.5
analysis.slack = 2
)";

struct Run {
    std::string id;
    std::string config;
};

std::vector<Run> runs() {
    std::string m3 = kContractM2;
    m3.replace(m3.find("model.m = 2"), 11, "model.m = 3");
    std::string stoch = kStability;
    stoch.replace(stoch.find("noise.family = off"), 18, "noise.family = linear\nensemble.M = 16\nensemble.seed = 1");
    return {{"contract_m2", kContractM2}, {"contract_m3", m3},      {"selfsim", kSelfSim},
            {"comedown", kComedown},      {"mix", kMix},            {"stability", kStability},
            {"stability_noise", stoch},   {"lemmas", kLemmas},      {"entropy", kEntropy},
            {"semilinear", kSemilinear}};
}

struct Outcome {
    ExperimentResult result;
    double seconds = 0.0;
    std::string error;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

class Suite {
public:
    explicit Suite(fs::path out) : out_(std::move(out)) {}

    void execute(std::size_t threads) {
        for (const auto& r : runs()) {
            ExperimentConfig cfg = parse_config(r.config);
            cfg.output_dir = out_ / ("threads" + std::to_string(threads)) / r.id;
            fs::remove_all(cfg.output_dir);
            Outcome o;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                o.result = run_experiment(cfg, threads);
                write_outputs(o.result, cfg);
            } catch (const std::exception& e) {
                o.error = e.what();
            }
            o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::cerr << "  [threads " << threads << "] " << r.id << " " << num(o.seconds) << " s"
                      << (o.error.empty() ? "" : " error: " + o.error) << "\n";
            if (threads == 1) outcomes_[r.id] = std::move(o);
        }
    }

    // all named verdicts of one run pass; detail lists observed values
    bool verdicts(const std::string& id, const std::vector<std::string>& names, std::string& detail) const {
        const Outcome& o = outcomes_.at(id);
        if (!o.error.empty()) {
            detail += id + ": " + o.error + "; ";
            return false;
        }
        bool ok = true;
        for (const auto& n : names) {
            try {
                const Verdict& v = o.result.verdict(n);
                ok = ok && v.pass;
                detail += id + " " + n + "=" + num(v.observed) + (v.pass ? "" : " (fail)") + "; ";
            } catch (const std::out_of_range&) {
                detail += id + " missing '" + n + "'; ";
                ok = false;
            }
        }
        return ok;
    }

    bool all_verdicts(const std::string& id, std::string& detail) const {
        const Outcome& o = outcomes_.at(id);
        std::vector<std::string> names;
        for (const auto& v : o.result.verdicts) names.push_back(v.name);
        if (names.empty() && o.error.empty()) {
            detail += id + ": no verdicts; ";
            return false;
        }
        return verdicts(id, names, detail);
    }

    double seconds(const std::string& id) const { return outcomes_.at(id).seconds; }

    bool identical_outputs(std::string& detail) const {
        std::size_t files = 0, differ = 0;
        const fs::path a = out_ / "threads1", b = out_ / "threads8";
        for (const auto& e : fs::recursive_directory_iterator(a)) {
            if (!e.is_regular_file()) continue;
            ++files;
            const fs::path other = b / fs::relative(e.path(), a);
            if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
                ++differ;
                detail += fs::relative(e.path(), a).string() + " differs; ";
            }
        }
        for (const auto& e : fs::recursive_directory_iterator(b)) {
            if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b))) {
                ++differ;
                detail += fs::relative(e.path(), b).string() + " only with 8 threads; ";
            }
        }
        detail += std::to_string(files) + " files compared";
        return files > 0 && differ == 0;
    }

private:
    fs::path out_;
    std::map<std::string, Outcome> outcomes_;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance suite"};
    std::string out = "acceptance_out";
    app.add_option("--out", out, "scratch directory for outputs");
    CLI11_PARSE(app, argc, argv);

    Suite suite{fs::path(out)};
    suite.execute(1);
    suite.execute(8);

    struct Line {
        int id;
        std::string title;
        std::function<bool(std::string&)> check;
    };
    const std::vector<Line> lines{
        {1, "contraction m=2",
         [&](std::string& d) {
             const bool ok = suite.verdicts("contract_m2", {"distance nonincreasing", "integrated contraction"}, d);
             d += "runtime " + num(suite.seconds("contract_m2")) + " s (limit 120)";
             return ok && suite.seconds("contract_m2") < 120.0;
         }},
        {2, "optimal rate m=2,3 and envelope",
         [&](std::string& d) {
             bool ok = true;
             for (const char* id : {"contract_m2", "contract_m3"}) {
                 ok = suite.verdicts(id, {"rate exponent", "envelope domination, fitted constant", "envelope domination"},
                                     d) && ok;
             }
             return ok;
         }},
        {3, "self-similar profile anchor", [&](std::string& d) { return suite.all_verdicts("selfsim", d); }},
        {4, "coming down from infinity", [&](std::string& d) { return suite.all_verdicts("comedown", d); }},
        {5, "mixing gap", [&](std::string& d) { return suite.all_verdicts("mix", d); }},
        {6, "stability sweep",
         [&](std::string& d) {
             const bool a = suite.verdicts("stability", {"D strictly decreasing", "D ratio"}, d);
             const bool b = suite.verdicts("stability_noise", {"D nonincreasing", "D ratio"}, d);
             return a && b;
         }},
        {7, "lemma suite",
         [&](std::string& d) {
             const bool ok = suite.all_verdicts("lemmas", d);
             d += "runtime " + num(suite.seconds("lemmas")) + " s (limit 30)";
             return ok && suite.seconds("lemmas") < 30.0;
         }},
        {8, "entropy residual",
         [&](std::string& d) {
             return suite.verdicts("entropy", {"entropy inequality", "reversed trajectory flagged"}, d);
         }},
        {9, "semilinear exponential mixing", [&](std::string& d) { return suite.all_verdicts("semilinear", d); }},
        {10, "determinism threads 1 vs 8", [&](std::string& d) { return suite.identical_outputs(d); }},
    };

    int failures = 0;
    for (const auto& l : lines) {
        std::string detail;
        const bool ok = l.check(detail);
        failures += ok ? 0 : 1;
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << l.id << ": " << l.title << " | " << detail << "\n";
    }
    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << "\n";
    return failures == 0 ? 0 : 1;
}
