#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xxz/sweep.hpp"

namespace xxz {

// One sweep axis: `count` points from lo to hi, geometric when log is set.
// open keeps only the interior of a count + 2 point grid. count = 1 is the
// single point lo.
struct GridAxis {
    std::string name;
    double lo = 0.0, hi = 0.0;
    int count = 1;
    bool log = false;
    bool open = false;

    [[nodiscard]] std::vector<double> values() const;
    [[nodiscard]] std::string text() const;  // round-trips through parse_grid
};

// "name:lo:hi:count[:log][:open]"; ValidationError on malformed input.
GridAxis parse_grid(std::string_view text);

// Flag values as parsed; unset optionals and empty lists select the command
// presets listed in command_help.
struct Options {
    std::string command;
    double J = 1.0;
    std::vector<double> delta;
    std::vector<double> omega;
    std::optional<double> gamma;
    std::optional<int> n;
    std::vector<int> n_list;
    double nth = 0.0;
    std::optional<std::string> variant;
    std::vector<std::string> grid;
    std::uint64_t seed = 2024;
    int threads = 0;  // 0: hardware concurrency
    std::string format = "csv";

    int max_m = 7;                      // fractal-scan annotation depth
    double peak = 0.5;                  // fractal-scan: resonance whose width is reported
    std::string gauge = "cunit";        // coeff-dump: cunit | weak
    std::string env = "quasiperiodic";  // walk-sim environment
    std::uint64_t trajectories = 100000;
    bool free_energy = false;           // walk-sim: model free-energy profile instead
    std::string method = "auto";        // fss: auto | collapse | power-law
    std::vector<double> window;         // fss power-law delta window lo,hi
    bool jackknife = true;
    bool timestamp = false;
};

inline constexpr std::string_view tool_name = "xxz-scan";
inline constexpr std::string_view tool_version = "1.0.0";

struct CommandOutput {
    SweepResult result;
    // Set when the command completed but a numerical check failed or grid
    // points recorded errors; the output is still written.
    std::optional<std::string> numerical_failure;
};

// Runs opts.command. ValidationError for bad input, NumericalError when the
// command cannot produce a result at all.
CommandOutput run_command(const Options& opts);

std::vector<std::string> command_names();
// One-paragraph description with the presets, used for --help.
std::string command_help(std::string_view command);

int resolved_threads(int requested);

}  // namespace xxz
