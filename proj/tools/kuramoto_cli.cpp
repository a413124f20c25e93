// Command-line front end: coupling bounds, simulations, parameter studies,
// and equilibrium reports. Exit codes: 0 ok, 2 configuration error,
// 3 numerical failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kuramoto/kuramoto.hpp"

namespace {

using namespace kuramoto;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

std::vector<double> parse_csv_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("--omega", "not a number: '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("--omega", "empty frequency list");
    return out;
}

struct BoundsArgs {
    std::string omega;
    bool exact = false;
    std::optional<double> continuum;
    std::string density;
    std::string json_out;
    std::string csv_out;
};

int run_bounds(const BoundsArgs& a) {
    const auto omega = parse_csv_list(a.omega);
    if (omega.size() < 2) throw ConfigError("--omega", "need at least two frequencies");
    BoundOptions opt;
    opt.exact = a.exact;
    opt.continuum_g0 = a.continuum;
    json resolved{{"omega", omega}, {"exact", a.exact}};
    if (a.continuum) resolved["continuum_g0"] = *a.continuum;
    if (!a.density.empty()) {
        opt.density = read_density_csv(a.density);
        resolved["ermentrout_density"] = a.density;
    }
    const auto rep = compute_bounds(omega, opt);
    json j = output_stamp(resolved, 0);
    j["bounds"] = to_json(rep);
    std::cout << j.dump(2) << "\n";
    if (!a.json_out.empty()) atomic_write(a.json_out, j.dump(2) + "\n");
    if (!a.csv_out.empty()) atomic_write(a.csv_out, bounds_csv(rep, resolved, 0));
    return exit_ok;
}

int run_simulate(const std::string& config, const std::string& out, std::string summary_out) {
    const auto cfg = parse_simulate_config(read_json_file(config));
    const auto res = run_scenario(cfg);
    atomic_write(out, trajectory_csv(cfg, res.trajectory));
    if (summary_out.empty()) summary_out = out + ".summary.json";
    json j = output_stamp(cfg.resolved, cfg.seed);
    j["summary"] = to_json(res.summary);
    atomic_write(summary_out, j.dump(2) + "\n");
    std::cout << j["summary"].dump(2) << "\n";
    return exit_ok;
}

int run_study_cmd(const std::string& config, const std::string& out) {
    const auto cfg = parse_study_config(read_json_file(config));
    const auto rows = run_study(cfg);
    const auto csv = study_csv(cfg, rows);
    atomic_write(out, csv);
    std::cout << csv;
    return exit_ok;
}

int run_equilibria(const std::string& config, const std::string& out) {
    const auto cfg = parse_equilibria_config(read_json_file(config));
    const auto j = equilibria_report(cfg);
    atomic_write(out, j.dump(2) + "\n");
    std::cout << "inertia " << j["inertia"].dump() << ", " << j["classification"].get<std::string>() << "\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kuramoto oscillator synchronization toolkit"};
    app.set_version_flag("--version", std::string(kuramoto::tool_version));
    app.require_subcommand(1);

    BoundsArgs bargs;
    auto* bounds = app.add_subcommand("bounds", "Critical coupling estimates for a frequency vector");
    bounds->add_option("--omega", bargs.omega, "Comma-separated natural frequencies")->required();
    bounds->add_flag("--exact", bargs.exact, "Also compute the exact implicit coupling");
    bounds->add_option("--continuum", bargs.continuum, "Density at zero g(0) for the continuum bound");
    bounds->add_option("--ermentrout", bargs.density, "CSV density (omega,density) on a uniform grid over [-1, 1]");
    bounds->add_option("--json", bargs.json_out, "Write the report as JSON");
    bounds->add_option("--csv", bargs.csv_out, "Write the report as CSV");

    std::string config;
    std::string out;
    std::string summary;
    auto* simulate = app.add_subcommand("simulate", "Integrate a configured network");
    simulate->add_option("--config", config, "Run configuration (JSON)")->required();
    simulate->add_option("--out", out, "Trajectory CSV")->required();
    simulate->add_option("--summary", summary, "Summary JSON (default: <out>.summary.json)");

    auto* study = app.add_subcommand("study", "Monte Carlo comparison of the coupling bounds");
    study->add_option("--config", config, "Study configuration (JSON)")->required();
    study->add_option("--out", out, "Study CSV")->required();

    auto* equilibria = app.add_subcommand("equilibria", "Equilibrium, Jacobian inertia, and invariance report");
    equilibria->add_option("--config", config, "Network configuration (JSON)")->required();
    equilibria->add_option("--out", out, "Report JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*bounds) return run_bounds(bargs);
        if (*simulate) return run_simulate(config, out, summary);
        if (*study) return run_study_cmd(config, out);
        if (*equilibria) return run_equilibria(config, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const IntegrationError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const EquilibriumNotFound& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const BracketError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_config;
}
