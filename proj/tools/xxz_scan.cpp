#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xxz/commands.hpp"
#include "xxz/model.hpp"
#include "xxz/sweep.hpp"

namespace {

constexpr int exit_validation = 1;
constexpr int exit_numerical = 2;

std::string render(const xxz::SweepResult& r, const std::string& format) {
    if (format == "json") return xxz::to_json(r);
    if (format == "svg") return xxz::to_svg(r);
    return xxz::to_csv(r);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steady-state scans of the boundary-driven XXZ chain"};
    app.name(std::string(xxz::tool_name));
    app.set_version_flag("--version", std::string(xxz::tool_version));
    app.set_config("--config", "", "key=value file; command-line flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    xxz::Options o;
    double gamma = 1.0;
    int n = 0;
    std::string variant;
    std::string out_path;
    bool no_jackknife = false;
    app.add_option("--J", o.J, "hopping J (energy unit)")->capture_default_str();
    app.add_option("--delta", o.delta, "anisotropy value(s), comma separated")->delimiter(',');
    app.add_option("--omega", o.omega, "drive value(s), comma separated")->delimiter(',');
    auto* gamma_opt = app.add_option("--gamma", gamma, "dissipation rate");
    auto* n_opt = app.add_option("--n", n, "system size (walk-sim: steps)");
    app.add_option("--n-list", o.n_list, "system sizes, comma separated")->delimiter(',');
    app.add_option("--nth", o.nth, "thermal occupation of the bath")->capture_default_str();
    auto* variant_opt = app.add_option("--variant", variant, "model variant");
    app.add_option("--grid", o.grid, "axis name:lo:hi:count[:log][:open]; repeatable");
    app.add_option("--seed", o.seed, "random seed")->capture_default_str();
    app.add_option("--threads", o.threads, "worker threads, 0 = hardware")->capture_default_str();
    app.add_option("--out", out_path, "output file (default stdout)");
    app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json", "svg"}))->capture_default_str();
    app.add_option("--max-m", o.max_m, "fractal-scan: annotation depth")->capture_default_str();
    app.add_option("--peak", o.peak, "fractal-scan: resonance for the width report")->capture_default_str();
    app.add_option("--gauge", o.gauge, "coeff-dump: cunit or weak")->capture_default_str();
    app.add_option("--env", o.env, "walk-sim: quasiperiodic, random or uniform")->capture_default_str();
    app.add_option("--trajectories", o.trajectories, "walk-sim: Monte Carlo trajectories")->capture_default_str();
    app.add_flag("--free-energy", o.free_energy, "walk-sim: emit the model free-energy profile");
    app.add_option("--method", o.method, "fss: auto, collapse or power-law")->capture_default_str();
    app.add_option("--window", o.window, "fss: power-law delta window lo,hi")->delimiter(',');
    app.add_flag("--no-jackknife", no_jackknife, "fss: skip jackknife errors");
    app.add_flag("--timestamp", o.timestamp, "record the UTC time in the metadata (breaks byte reproducibility)");

    for (const auto& name : xxz::command_names()) {
        app.add_subcommand(name, xxz::command_help(name))->footer("Shared flags: see " + std::string(xxz::tool_name) + " --help.");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return exit_validation;
    }

    o.command = app.get_subcommands().front()->get_name();
    if (gamma_opt->count() > 0) o.gamma = gamma;
    if (n_opt->count() > 0) o.n = n;
    if (variant_opt->count() > 0) o.variant = variant;
    o.jackknife = !no_jackknife;

    try {
        const xxz::CommandOutput result = xxz::run_command(o);
        const std::string text = render(result.result, o.format);
        if (out_path.empty()) {
            std::cout << text;
            std::cout.flush();
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!(f << text)) {
                std::cerr << "error: cannot write " << out_path << "\n";
                return exit_validation;
            }
        }
        if (result.numerical_failure) {
            std::cerr << "numerical failure: " << *result.numerical_failure << "\n";
            return exit_numerical;
        }
    } catch (const xxz::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const xxz::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    return 0;
}
