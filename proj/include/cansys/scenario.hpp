#pragma once

#include "cansys/canonical.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cansys {

// Raised on malformed scenario text or an unknown series selection; the CLI
// maps it to exit code 2 (library precondition failures map to 3).
struct ScenarioParseError : std::runtime_error {
    explicit ScenarioParseError(const std::string& what) : std::runtime_error(what) {}
};

struct SeedConfig {
    std::string kind; // "scalar" or "triangular"
    // scalar: A = a, two-exponential weights f1, f2
    Complex a{1.0, 1.0};
    double c = 1.0;
    Complex alpha{1.0, 0.0};
    Complex f1{1.0, 0.0};
    Complex f2{0.0, 0.0};
    // triangular: A = [[xi, *], [0, xi]] with data (q, f, g)
    double xi = 1.0;
    Complex q{1.0, 0.0};
    Complex f{1.0, 0.0};
    Complex g{1.0, 0.0};
};

struct LambdaLine {
    double im = 1.0;
    double re_start = -1.0;
    double re_end = 1.0;
    int count = 41;
};

struct WeylConfig {
    std::vector<double> radii{0.5, 1.0, 2.0, 5.0};
    std::vector<double> l2_lengths{1.0, 2.0, 4.0};
};

struct VolterraConfig {
    double c = 0.5;
    double length = 1.0;
    int nodes = 400;
    int kmax = 40;
    double tol = 1e-10;
    std::vector<Complex> lambdas{Complex(0.0, 1.0), Complex(0.0, 2.0)};
};

struct StringConfig {
    double u = -0.25;
    double length = 2.0;
    int nodes = 801;
};

struct Scenario {
    std::string name;
    SeedConfig seed;
    double length = 2.0;
    int nodes = 2001;
    std::vector<Complex> lambdas;
    bool has_lambda_line = false;
    LambdaLine lambda_line;
    std::vector<std::string> stages; // normalized order, prerequisites inserted
    WeylConfig weyl;
    VolterraConfig volterra;
    StringConfig string_cfg;
    std::map<std::string, double> tolerance_overrides;
    std::vector<std::string> emit;
    int emit_nodes = 201;
    std::string raw; // exact file text; hashed into the report
};

Scenario parse_scenario_text(const std::string& text, const std::string& fallback_name);
Scenario load_scenario(const std::string& path);

Complex parse_complex(const std::string& text);
std::string format_complex(Complex z);
std::uint64_t fnv1a64(const std::string& data);

struct CheckResult {
    std::string stage;
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct SeriesData {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct RunOptions {
    int nodes_override = 0; // 0 keeps the scenario's node count
    double tol_scale = 1.0;
    bool emit_override = false; // when set, emit exactly emit_list
    std::vector<std::string> emit_list;
};

struct Report {
    std::string scenario_name;
    std::uint64_t scenario_hash = 0;
    double tol_scale = 1.0;
    int nodes = 0;
    std::vector<std::string> stages;
    std::vector<CheckResult> checks;
    std::vector<SeriesData> series;

    bool all_passed() const;
    std::string to_json() const; // deterministic; no timestamps or paths
};

std::map<std::string, double> default_tolerances();

Report run_scenario(const Scenario& scenario, const RunOptions& options = {});

std::string render_csv(const SeriesData& series);

// Writes <name>_report.json plus one CSV per series; returns the paths.
std::vector<std::string> write_report(const Report& report, const std::string& out_dir);

// Writes only the selected series; throws ScenarioParseError on an unknown name.
std::vector<std::string> emit_plot_data(const Report& report,
                                        const std::vector<std::string>& selection,
                                        const std::string& out_dir);

} // namespace cansys
