#include "cansys/scenario.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef CANSYS_HAVE_OPENMP
#include <omp.h>
#endif

namespace {

std::string scenario_directory(const std::string& flag_value) {
    if (!flag_value.empty())
        return flag_value;
    if (const char* env = std::getenv("CANSYS_SCENARIO_DIR"))
        return env;
    return "scenarios";
}

std::vector<std::string> bundled_scenarios(const std::string& dir) {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (entry.path().extension() == ".scn")
            names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

std::string resolve_scenario(const std::string& arg, const std::string& dir) {
    if (std::filesystem::exists(arg))
        return arg;
    const std::filesystem::path candidate = std::filesystem::path(dir) / (arg + ".scn");
    if (std::filesystem::exists(candidate))
        return candidate.string();
    throw cansys::ScenarioParseError("no scenario file or bundled name '" + arg + "'");
}

void apply_worker_env() {
#ifdef CANSYS_HAVE_OPENMP
    if (const char* env = std::getenv("CANSYS_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0)
            omp_set_num_threads(n);
    }
#endif
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"canonical-system scenario runner"};
    app.require_subcommand(0, 1);

    bool list = false;
    std::string dir_flag;
    app.add_flag("--list-scenarios", list, "print bundled scenario names and exit");
    app.add_option("--scenario-dir", dir_flag,
                   "bundled scenario directory (default: $CANSYS_SCENARIO_DIR or ./scenarios)");

    std::string scenario_arg, out_dir = ".", emit_arg;
    int nodes = 0;
    double tol_scale = 1.0;
    CLI::App* run = app.add_subcommand("run", "run a scenario and write report + data series");
    run->fallthrough(); // accept top-level flags like --scenario-dir after the subcommand
    run->add_option("scenario", scenario_arg, "scenario file path or bundled name")->required();
    run->add_option("--out", out_dir, "output directory for report and CSV files");
    run->add_option("--nodes", nodes, "override the grid node count");
    run->add_option("--tol-scale", tol_scale, "multiply every tolerance by this factor");
    run->add_option("--emit", emit_arg, "comma separated series selection (overrides scenario)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    apply_worker_env();
    const std::string dir = scenario_directory(dir_flag);

    if (list) {
        for (const auto& name : bundled_scenarios(dir))
            std::cout << name << "\n";
        return 0;
    }
    if (!run->parsed()) {
        std::cerr << app.help();
        return 2;
    }

    try {
        const cansys::Scenario scenario =
            cansys::load_scenario(resolve_scenario(scenario_arg, dir));

        cansys::RunOptions options;
        options.nodes_override = nodes;
        options.tol_scale = tol_scale;
        if (run->count("--emit")) {
            options.emit_override = true;
            std::string item;
            std::istringstream in(emit_arg);
            while (std::getline(in, item, ',')) {
                while (!item.empty() && item.front() == ' ')
                    item.erase(item.begin());
                while (!item.empty() && item.back() == ' ')
                    item.pop_back();
                if (!item.empty())
                    options.emit_list.push_back(item);
            }
        }

        const cansys::Report report = cansys::run_scenario(scenario, options);
        for (const auto& path : cansys::write_report(report, out_dir))
            std::cout << "wrote " << path << "\n";

        for (const auto& c : report.checks)
            std::printf("[%s] %s/%s  value=%.3e  tolerance=%.3e\n", c.pass ? "pass" : "FAIL",
                        c.stage.c_str(), c.name.c_str(), c.value, c.tolerance);
        const bool ok = report.all_passed();
        std::printf("scenario %s: %s (%zu checks)\n", report.scenario_name.c_str(),
                    ok ? "PASS" : "FAIL", report.checks.size());
        return ok ? 0 : 1;
    } catch (const cansys::ScenarioParseError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "precondition failure: " << e.what() << "\n";
        return 3;
    }
}
