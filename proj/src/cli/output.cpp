#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>
#include <json.hpp>

#include "pme/cli.hpp"
#include "pme/exactsol.hpp"

namespace pme {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_stem(const std::string& name) {
    std::string out;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_') ? c : '_';
    return out;
}

// JSON cannot hold inf / nan
nlohmann::json number(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

void write_csv(const std::filesystem::path& path, const std::string& hash, const std::string& header,
               const std::vector<double>& c0, const std::vector<double>& c1, const std::vector<double>* c2) {
    std::ofstream out(path, std::ios::binary);
    out << "# config_hash=" << hash << "\n" << header << "\n";
    for (std::size_t k = 0; k < c0.size(); ++k) {
        out << fmt(c0[k]) << "," << fmt(c1[k]);
        if (c2) out << "," << fmt((*c2)[k]);
        out << "\n";
    }
}

void write_svg(const std::filesystem::path& path, const std::string& hash, const std::string& title,
               const DecaySeries& s) {
    // log-log on the positive points (drops t = 0); linear axes if fewer than two remain
    std::vector<double> x, y;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s.times[k] > 0.0 && s.values[k] > 0.0) {
            x.push_back(std::log10(s.times[k]));
            y.push_back(std::log10(s.values[k]));
        }
    }
    const bool loglog = x.size() >= 2;
    if (!loglog) {
        x = s.times;
        y = s.values;
    }
    const double W = 640, H = 420, pad = 50;
    std::ofstream out(path, std::ios::binary);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<!-- config_hash=" << hash << " -->\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << pad << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">" << title
        << (loglog ? " (log10-log10)" : "") << "</text>\n";
    if (x.size() < 2) {
        out << "</svg>\n";
        return;
    }
    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    const double x0 = *xmin, x1 = *xmax > *xmin ? *xmax : *xmin + 1.0;
    const double y0 = *ymin, y1 = *ymax > *ymin ? *ymax : *ymin + 1.0;
    auto px = [&](double v) { return pad + (v - x0) / (x1 - x0) * (W - 2 * pad); };
    auto py = [&](double v) { return H - pad - (v - y0) / (y1 - y0) * (H - 2 * pad); };
    out << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    out << "<text x=\"" << pad << "\" y=\"" << H - 20 << "\" font-family=\"sans-serif\" font-size=\"11\">x: "
        << fmt(x0) << " .. " << fmt(x1) << "   y: " << fmt(y0) << " .. " << fmt(y1) << "</text>\n";
    out << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < x.size(); ++k) out << px(x[k]) << "," << py(y[k]) << " ";
    out << "\"/>\n</svg>\n";
}

std::size_t env_threads() {
    if (const char* v = std::getenv("PME_MIXER_THREADS")) {
        char* end = nullptr;
        const unsigned long n = std::strtoul(v, &end, 10);
        if (end != v && *end == '\0' && n > 0) return n;
        throw ConfigError("PME_MIXER_THREADS must be a positive integer");
    }
    return 1;
}

}  // namespace

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const std::string h = hex(result.config_hash);
    std::vector<fs::path> written;

    if (cfg.emit.count("csv")) {
        for (const auto& s : result.series) {
            const fs::path p = cfg.output_dir / (file_stem(s.name) + ".csv");
            write_csv(p, h, "t,mean,stderr", s.series.times, s.series.values, &s.series.std_error);
            written.push_back(p);
        }
        for (const auto& t : result.tables) {
            const fs::path p = cfg.output_dir / (file_stem(t.name) + ".csv");
            write_csv(p, h, "x,value", t.x, t.values, nullptr);
            written.push_back(p);
        }
    }
    if (cfg.emit.count("svg")) {
        for (const auto& s : result.series) {
            const fs::path p = cfg.output_dir / (file_stem(s.name) + ".svg");
            write_svg(p, h, s.name, s.series);
            written.push_back(p);
        }
    }
    if (cfg.emit.count("json")) {
        nlohmann::json j;
        j["experiment"] = to_string(result.experiment);
        j["config_hash"] = h;
        j["verdicts"] = nlohmann::json::array();
        for (const auto& v : result.verdicts) {
            nlohmann::json jv{{"name", v.name},
                              {"pass", v.pass},
                              {"observed", number(v.observed)},
                              {"expected", number(v.expected)},
                              {"tolerance", number(v.tolerance)}};
            if (!v.violations.empty()) {
                jv["violations"] = nlohmann::json::array();
                for (const auto& x : v.violations) {
                    jv["violations"].push_back({{"time", number(x.time)},
                                                {"observed", number(x.observed)},
                                                {"bound", number(x.bound)}});
                }
            }
            j["verdicts"].push_back(jv);
        }
        j["fits"] = nlohmann::json::array();
        for (const auto& f : result.fits) {
            j["fits"].push_back({{"name", f.name},
                                 {"exponent", number(f.fit.exponent)},
                                 {"ci", number(f.fit.ci_halfwidth)},
                                 {"intercept", number(f.fit.intercept)},
                                 {"window", {number(f.fit.t_lo), number(f.fit.t_hi)}}});
        }
        j["metadata"] = result.metadata;
        j["config"] = cfg.canonical();
        const fs::path p = cfg.output_dir / "verdicts.json";
        std::ofstream(p, std::ios::binary) << j.dump(2) << "\n";
        written.push_back(p);
    }
    return written;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Stochastic porous medium simulator and verification harness"};
    std::string experiment;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    app.add_option("experiment", experiment, "experiment to run")
        ->required()
        ->check(CLI::IsMember(experiment_names()));
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "base seed");
    app.add_option("--threads", threads, "worker threads (results do not depend on it)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        cfg.experiment = parse_experiment(experiment);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (*seed_opt) cfg.ensemble.seed = seed;
        if (threads == 0) threads = env_threads();

        const ExperimentResult res = run_experiment(cfg, threads);
        write_outputs(res, cfg);
        for (const auto& v : res.verdicts) {
            std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << "  observed=" << fmt(v.observed)
                      << " expected=" << fmt(v.expected) << " tolerance=" << fmt(v.tolerance) << "\n";
        }
        for (const auto& f : res.fits) {
            std::cout << "fit " << f.name << ": exponent " << fmt(f.fit.exponent) << " +- " << fmt(f.fit.ci_halfwidth)
                      << "\n";
        }
        std::cout << "config_hash " << hex(res.config_hash) << "\n";
        return res.all_pass() ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const BlowUpError& e) {
        std::cerr << "numerical blow-up: " << e.what() << "\n";
        return 3;
    } catch (const EnsembleRejected& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const ProfileError& e) {
        std::cerr << "profile: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace pme
