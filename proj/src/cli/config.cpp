#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "pme/cli.hpp"

namespace pme {

namespace {

const std::vector<std::pair<Experiment, std::string>>& experiment_table() {
    static const std::vector<std::pair<Experiment, std::string>> t{
        {Experiment::weight, "weight"},         {Experiment::validate, "validate"}, {Experiment::simulate, "simulate"},
        {Experiment::contract, "contract"},     {Experiment::comedown, "comedown"}, {Experiment::selfsim, "selfsim"},
        {Experiment::mix, "mix"},               {Experiment::stability, "stability"}, {Experiment::lemmas, "lemmas"},
        {Experiment::entropy, "entropy"},       {Experiment::semilinear, "semilinear"},
    };
    return t;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigError("config: key '" + key + "' expects a nonnegative integer, got '" + v + "'");
    }
    return x;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
    return out;
}

std::string from_list(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt(xs[i]);
    return out;
}

struct Key {
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
    bool hashed = true;
};

template <typename Get>
Key real(Get get) {
    return {[get](ExperimentConfig& c, const std::string& k, const std::string& v) { get(c) = to_double(k, v); },
            [get](const ExperimentConfig& c) { return fmt(get(const_cast<ExperimentConfig&>(c))); }};
}

template <typename Get>
Key integer(Get get) {
    return {[get](ExperimentConfig& c, const std::string& k, const std::string& v) {
                get(c) = static_cast<std::remove_reference_t<decltype(get(c))>>(to_u64(k, v));
            },
            [get](const ExperimentConfig& c) { return std::to_string(get(const_cast<ExperimentConfig&>(c))); }};
}

template <typename Get>
Key text(Get get) {
    return {[get](ExperimentConfig& c, const std::string&, const std::string& v) { get(c) = v; },
            [get](const ExperimentConfig& c) { return get(const_cast<ExperimentConfig&>(c)); }};
}

template <typename Get, typename Parse, typename Show>
Key enumeration(Get get, Parse parse, Show show) {
    return {[get, parse](ExperimentConfig& c, const std::string& k, const std::string& v) {
                try {
                    get(c) = parse(v);
                } catch (const std::exception&) {
                    throw ConfigError("config: key '" + k + "' has invalid value '" + v + "'");
                }
            },
            [get, show](const ExperimentConfig& c) { return show(get(const_cast<ExperimentConfig&>(c))); }};
}

const std::map<std::string, Key>& key_table() {
    using C = ExperimentConfig;
    static const std::map<std::string, Key> t = [] {
        std::map<std::string, Key> k;
        k["experiment"] = enumeration([](C& c) -> Experiment& { return c.experiment; }, parse_experiment,
                                      [](Experiment e) { return to_string(e); });
        k["domain.a"] = real([](C& c) -> double& { return c.domain.a; });
        k["domain.b"] = real([](C& c) -> double& { return c.domain.b; });
        k["domain.N"] = integer([](C& c) -> std::size_t& { return c.domain.N; });
        k["model.kind"] = text([](C& c) -> std::string& { return c.model.kind; });
        k["model.m"] = real([](C& c) -> double& { return c.model.m; });
        k["model.K"] = real([](C& c) -> double& { return c.model.K; });
        k["model.n"] = real([](C& c) -> double& { return c.model.n; });
        k["noise.family"] = enumeration([](C& c) -> NoiseFamily& { return c.noise.family; }, parse_noise_family,
                                        [](NoiseFamily f) { return to_string(f); });
        k["noise.amplitude"] = real([](C& c) -> double& { return c.noise.amplitude; });
        k["noise.modes"] = integer([](C& c) -> std::size_t& { return c.noise.modes; });
        k["noise.kappa"] = real([](C& c) -> double& { return c.noise.kappa; });
        k["noise.decay"] = real([](C& c) -> double& { return c.noise.decay; });
        k["solver.scheme"] = enumeration([](C& c) -> Scheme& { return c.solver.scheme; }, parse_scheme,
                                         [](Scheme s) { return to_string(s); });
        k["solver.galerkin_modes"] = integer([](C& c) -> std::size_t& { return c.solver.galerkin_modes; });
        k["solver.dt"] = real([](C& c) -> double& { return c.solver.dt; });
        k["solver.t_end"] = real([](C& c) -> double& { return c.solver.t_end; });
        k["solver.cfl_safety"] = real([](C& c) -> double& { return c.solver.cfl_safety; });
        k["solver.record_every"] = integer([](C& c) -> std::size_t& { return c.solver.record_every; });
        k["solver.equation"] = enumeration([](C& c) -> Equation& { return c.solver.equation; }, parse_equation,
                                           [](Equation e) { return to_string(e); });
        k["solver.drift"] = enumeration([](C& c) -> Drift& { return c.solver.drift; }, parse_drift,
                                        [](Drift d) { return to_string(d); });
        k["ic.shape"] = text([](C& c) -> std::string& { return c.ic.shape; });
        k["ic.amplitude"] = real([](C& c) -> double& { return c.ic.amplitude; });
        k["ic2.shape"] = text([](C& c) -> std::string& { return c.ic2.shape; });
        k["ic2.amplitude"] = real([](C& c) -> double& { return c.ic2.amplitude; });
        k["ensemble.M"] = integer([](C& c) -> std::size_t& { return c.ensemble.M; });
        k["ensemble.seed"] = integer([](C& c) -> std::uint64_t& { return c.ensemble.seed; });
        k["analysis.fit_lo"] = real([](C& c) -> double& { return c.analysis.fit_lo; });
        k["analysis.fit_hi"] = real([](C& c) -> double& { return c.analysis.fit_hi; });
        k["analysis.clip"] = real([](C& c) -> double& { return c.analysis.clip; });
        k["analysis.slack"] = real([](C& c) -> double& { return c.analysis.slack; });
        k["analysis.dissipation_tol"] = real([](C& c) -> double& { return c.analysis.dissipation_tol; });
        k["analysis.rate_tol_lo"] = real([](C& c) -> double& { return c.analysis.rate_tol_lo; });
        k["analysis.rate_tol_hi"] = real([](C& c) -> double& { return c.analysis.rate_tol_hi; });
        k["analysis.delta"] = real([](C& c) -> double& { return c.analysis.delta; });
        k["analysis.level"] = real([](C& c) -> double& { return c.analysis.level; });
        k["analysis.testfn"] = text([](C& c) -> std::string& { return c.analysis.testfn; });
        k["analysis.entropy_constant"] = real([](C& c) -> double& { return c.analysis.entropy_constant; });
        k["analysis.scale"] = real([](C& c) -> double& { return c.analysis.scale; });
        k["analysis.scale_tol"] = real([](C& c) -> double& { return c.analysis.scale_tol; });
        k["analysis.check_times"] = {
            [](C& c, const std::string& key, const std::string& v) { c.analysis.check_times = to_list(key, v); },
            [](const C& c) { return from_list(c.analysis.check_times); }};
        k["analysis.selfsim_tol"] = real([](C& c) -> double& { return c.analysis.selfsim_tol; });
        k["analysis.exponent_tol"] = real([](C& c) -> double& { return c.analysis.exponent_tol; });
        k["analysis.concavity_tol"] = real([](C& c) -> double& { return c.analysis.concavity_tol; });
        k["analysis.gap_factor"] = real([](C& c) -> double& { return c.analysis.gap_factor; });
        k["analysis.ratio_max"] = real([](C& c) -> double& { return c.analysis.ratio_max; });
        k["validate.r_max"] = real([](C& c) -> double& { return c.validate_r_max; });
        k["validate.samples"] = integer([](C& c) -> std::size_t& { return c.validate_samples; });
        k["stability.n_values"] = {
            [](C& c, const std::string& key, const std::string& v) { c.stability_n = to_list(key, v); },
            [](const C& c) { return from_list(c.stability_n); }};
        k["lemmas.pairs"] = integer([](C& c) -> std::size_t& { return c.lemma_pairs; });
        k["lemmas.seed"] = integer([](C& c) -> std::uint64_t& { return c.lemma_seed; });
        k["output.dir"] = {[](C& c, const std::string&, const std::string& v) { c.output_dir = v; },
                           [](const C& c) { return c.output_dir.string(); }, false};
        k["output.emit"] = {[](C& c, const std::string& key, const std::string& v) {
                                std::set<std::string> e;
                                for (const auto& s : split_list(v)) {
                                    if (s != "csv" && s != "json" && s != "svg") {
                                        throw ConfigError("config: key '" + key + "' has invalid entry '" + s + "'");
                                    }
                                    e.insert(s);
                                }
                                c.emit = e;
                            },
                            [](const C& c) {
                                std::string out;
                                for (const auto& s : c.emit) out += (out.empty() ? "" : ",") + s;
                                return out;
                            },
                            false};
        return k;
    }();
    return t;
}

}  // namespace

std::string to_string(Experiment e) {
    for (const auto& [v, name] : experiment_table()) {
        if (v == e) return name;
    }
    return "?";
}

Experiment parse_experiment(const std::string& s) {
    for (const auto& [v, name] : experiment_table()) {
        if (name == s) return v;
    }
    throw ConfigError("unknown experiment '" + s + "'");
}

std::vector<std::string> experiment_names() {
    std::vector<std::string> out;
    for (const auto& [v, name] : experiment_table()) out.push_back(name);
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [k, v] : key_table()) out.push_back(k);
    return out;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const auto& t = key_table();
    const auto it = t.find(key);
    if (it == t.end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second.set(cfg, key, value);
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
    std::stringstream ss(text);
    std::string line;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError("config: duplicate key '" + key + "'");
        set_config_value(base, key, value);
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string ExperimentConfig::canonical() const {
    std::string out;
    for (const auto& [k, key] : key_table()) {
        if (key.hashed) out += k + " = " + key.get(*this) + "\n";
    }
    return out;
}

std::uint64_t ExperimentConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace pme
