#pragma once

// Experiment runner shared by the CLI and the tests. A run takes a flat
// key=value configuration, executes one pipeline and returns a report whose
// numeric content depends on the configuration only.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fito/regcalc.hpp"
#include "fito/sde.hpp"

namespace fito {

struct ExperimentConfig {
    std::string command;  // integrate, qv, deriv, simulate, solve-bsde, ...
    std::string problem = "heat";
    std::string functional = "cyl-heat";
    std::string method = "closed-form";
    std::size_t segments = 1024;  // M
    double horizon = 1.0;         // T
    std::size_t paths = 1000;
    std::optional<std::uint64_t> seed;
    std::string eps = "dyadic:4";
    std::filesystem::path out_dir;
    std::size_t workers = 0;

    // integrate / qv
    std::string mode = "forward";
    std::string integrand = "x2";
    std::string integrator = "x";
    double a = -1.0;
    double b = 0.0;
    std::string atoms;  // "loc:mass,loc:mass"

    // deriv / solve-kolmogorov / verify-bridge
    std::string which = "all";
    std::string path = "smooth";  // builtin name or CSV file
    double t = 0.0;
    int order = 1;
    double tolerance = 0.0;  // 0 selects the pipeline default

    // solve-bsde / verify-ito
    std::size_t basis_degree = 2;
    std::size_t steps = 0;  // when set, M = steps * T / (T - t)
    std::size_t doublings = 4;
    std::string qv_mode = "model";
    double expect_slope = 0.5;
    std::size_t dump = 0;  // trajectories written by simulate

    // Parse a flat key=value file ('#' starts a comment).
    static std::map<std::string, std::string> read_file(const std::filesystem::path& file);
    // Apply key=value settings; throws UsageError on unknown keys or bad values.
    void apply(const std::map<std::string, std::string>& kv);
    void validate() const;
    // True for subcommands that draw random numbers (and so need a seed).
    bool stochastic() const;
    EpsSchedule schedule() const;
    McConfig mc() const;
};

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;  // pass iff value <= tolerance
    bool pass = false;
};

struct Curve {
    std::string file;
    std::string x_name;
    std::vector<double> x;
    std::vector<double> values;
};

struct RunReport {
    static constexpr int schema_version = 1;
    std::map<std::string, std::string> config;  // echo, without workers or output directory
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    std::vector<Check> checks;
    std::vector<Curve> curves;
    std::vector<std::string> notes;
    double wall_seconds = 0.0;

    bool passed() const;
    void check(const std::string& name, double value, double tolerance);
    // Boolean check recorded as value 0 (ok) or 1 against tolerance 0.
    void check_true(const std::string& name, bool ok);
    void add(const std::string& name, nlohmann::ordered_json result);
    std::string to_json() const;
};

RunReport run_experiment(const ExperimentConfig& cfg);

// report.json (schema-versioned), timing.json and one CSV per curve.
void emit_report(const RunReport& report, const std::filesystem::path& dir);

// Fixed in-process suite touching every pipeline.
RunReport selftest(std::uint64_t seed, std::size_t workers);

}  // namespace fito
