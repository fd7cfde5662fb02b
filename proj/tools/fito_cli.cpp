// Command-line front end. Every subcommand builds an ExperimentConfig from an
// optional --config file overlaid with flags, runs it and writes the report.
//
// Exit codes: 0 all checks pass, 1 a check or the numerics failed,
// 2 usage/alignment/domain error, 3 I/O error.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "fito/error.hpp"
#include "fito/experiment.hpp"
#include "fito/kernels.hpp"

namespace {

struct Flag {
    const char* name;  // CLI11 option name(s)
    const char* key;   // configuration key
    const char* help;
};

const std::map<std::string, std::vector<Flag>>& subcommand_flags() {
    static const Flag M{"-M,--segments", "M", "grid segments on [-T,0]"};
    static const Flag T{"-T,--horizon", "T", "window length and time horizon"};
    static const Flag eps{"--eps", "eps", "regularization schedule: dyadic:K or a list of step multiples"};
    static const Flag seed{"--seed", "seed", "random seed"};
    static const Flag paths{"--paths", "paths", "Monte Carlo paths"};
    static const Flag workers{"--workers", "workers", "worker threads (0 = hardware)"};
    static const Flag problem{"--problem", "problem", "problem registry name"};
    static const Flag functional{"--functional", "functional", "functional registry name"};
    static const Flag path{"--path", "path", "initial path: smooth, linear, zero, one, brownian or a CSV file"};
    static const Flag t{"--t", "t", "initial time"};
    static const Flag tol{"--tolerance", "tolerance", "override the pipeline tolerance"};
    static const Flag mode{"--mode", "mode", "forward, backward or measure"};
    static const Flag interval{"--interval", "interval", "integration interval a,b"};
    static const Flag integrand{"--integrand", "integrand", "g: one, x, x2, exp, sin, cos, step, brownian or CSV"};
    static const Flag integrator{"--integrator", "integrator", "f: same choices as --integrand"};
    static const Flag atoms{"--atoms", "atoms", "measure atoms loc:mass,..."};
    static const Flag basis{"--basis-degree", "basis-degree", "regression polynomial degree"};
    static const Flag steps{"--steps", "steps", "time steps on [t,T]"};

    static const std::map<std::string, std::vector<Flag>> flags{
        {"integrate", {M, eps, seed, mode, interval, integrand, integrator, atoms, tol}},
        {"qv", {M, eps, seed, interval, integrand, integrator}},
        {"deriv",
         {M, T, eps, seed, functional, path, t, tol, {"--which", "which", "h, v, vv or all"}}},
        {"simulate",
         {M, T, seed, paths, workers, problem, path, t,
          {"--dump", "dump", "number of trajectories written as CSV"}}},
        {"solve-bsde", {M, T, seed, paths, workers, problem, path, t, basis, steps, tol}},
        {"solve-kolmogorov",
         {M, T, seed, paths, workers, problem, path, t, basis, steps, tol,
          {"--method", "method", "closed-form, feynman-kac or bsde"}}},
        {"verify-ito",
         {M, T, seed, paths, workers, problem, functional, path, tol,
          {"--doublings", "doublings", "grid doublings in the convergence study"},
          {"--qv-mode", "qv-mode", "model or realized bracket in the convergence study"},
          {"--expect-slope", "expect-slope", "expected log-log slope"}}},
        {"verify-bridge",
         {M, T, eps, seed, functional, path, tol, {"--order", "order", "1 or 2"}}},
        {"selftest", {seed, workers}},
    };
    return flags;
}

const char* summary(const std::string& name) {
    static const std::map<std::string, const char*> text{
        {"integrate", "forward/backward integral by regularization"},
        {"qv", "covariation curve of two sampled functions"},
        {"deriv", "horizontal and vertical derivatives of a functional"},
        {"simulate", "Euler-Maruyama simulation of a path-dependent SDE"},
        {"solve-bsde", "regression solver for the associated BSDE"},
        {"solve-kolmogorov", "value of the path-dependent Kolmogorov equation"},
        {"verify-ito", "pathwise functional Ito formula residuals"},
        {"verify-bridge", "horizontal derivative against its Frechet representation"},
        {"selftest", "small run of every pipeline"},
    };
    return text.at(name);
}

int run(int argc, char** argv) {
    CLI::App app{"Functional Ito calculus via regularization"};
    app.require_subcommand(1);
    std::string simd;
    app.add_option("--simd", simd, "kernel set: scalar or avx2 (default: best available)");

    struct Parsed {
        CLI::App* sub = nullptr;
        std::map<std::string, std::string> values;
        std::string config;
        std::string out;
        bool quiet = false;
    };
    std::map<std::string, Parsed> parsed;
    for (const auto& [name, flags] : subcommand_flags()) {
        Parsed& p = parsed[name];
        p.sub = app.add_subcommand(name, summary(name));
        p.sub->add_option("--config", p.config, "flat key=value configuration file");
        p.sub->add_option("--out", p.out, "json (stdout), json+csv, or an output directory");
        p.sub->add_flag("--quiet", p.quiet, "do not print the summary line");
        for (const Flag& f : flags) p.sub->add_option(f.name, p.values[f.key], f.help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!simd.empty() && !fito::kernels::select(simd)) throw fito::UsageError("kernel set unavailable: " + simd);
        for (auto& [name, p] : parsed) {
            if (!p.sub->parsed()) continue;
            fito::ExperimentConfig cfg;
            cfg.command = name;
            if (!p.config.empty()) {
                auto kv = fito::ExperimentConfig::read_file(p.config);
                kv.erase("command");
                cfg.apply(kv);
            }
            std::map<std::string, std::string> given;
            for (const Flag& f : subcommand_flags().at(name)) {
                if (p.sub->count(std::string(f.name).substr(std::string(f.name).rfind(',') + 1)) > 0) {
                    given[f.key] = p.values[f.key];
                }
            }
            cfg.apply(given);

            const fito::RunReport report = fito::run_experiment(cfg);
            const char* env = std::getenv("FITO_OUT_DIR");
            std::filesystem::path dir = cfg.out_dir.empty() ? std::filesystem::path(env ? env : "fito-out")
                                                            : cfg.out_dir;
            const bool to_stdout = p.out == "json" || p.out == "json+csv";
            if (p.out == "json") {
                std::cout << report.to_json();
            } else {
                if (!p.out.empty() && p.out != "json+csv") dir = p.out;
                fito::emit_report(report, dir);
                if (to_stdout) std::cout << report.to_json();
            }
            if (!p.quiet) {
                std::size_t failed = 0;
                for (const auto& c : report.checks) failed += c.pass ? 0 : 1;
                std::cerr << name << ": " << report.checks.size() - failed << "/" << report.checks.size()
                          << " checks passed";
                if (p.out != "json") std::cerr << ", report in " << dir.string();
                std::cerr << "\n";
                for (const auto& c : report.checks) {
                    if (!c.pass) {
                        std::cerr << "  FAIL " << c.name << ": " << c.value << " > " << c.tolerance << "\n";
                    }
                }
            }
            return report.passed() ? 0 : 1;
        }
    } catch (const fito::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fito::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const fito::AlignmentError& e) {
        std::cerr << "alignment error: " << e.what() << "\n";
        return 2;
    } catch (const fito::DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const fito::UnsupportedError& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return 2;
    } catch (const fito::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
