#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>

#include "chi2cav/run_config.hpp"

namespace chi2cav {

enum ExitCode : int {
    exit_ok = 0,
    exit_verify_failed = 1,
    exit_config_error = 2,
    exit_non_convergence = 3,
};

// Command-line overrides; unset fields fall back to the run configuration.
struct CommandFlags {
    bool detuned = false;
    bool numeric = false;
    bool analytic = false;
    std::optional<double> power;
    std::optional<double> pmin;
    std::optional<double> pmax;
    std::optional<std::size_t> steps;
    std::optional<std::string> model;
    std::optional<double> n_scaled;
    std::optional<double> omega_max;
    std::optional<std::size_t> points;
    std::optional<double> delta;
    std::optional<int> order;
    std::optional<std::string> output;
    std::optional<std::string> format;
    std::optional<std::string> json_path;
    std::size_t threads = 1;
};

// CHI2CAV_THREADS if set to a positive integer, else hardware concurrency.
std::size_t default_threads();

// Runs one of: threshold, steady, clamp-curve, spectrum, cascade, verify.
// Tables go to the configured output path, or to `out` when none is set;
// diagnostics go to `err`.
int run_command(const std::string& command, const RunConfig& config, const CommandFlags& flags, std::ostream& out,
                std::ostream& err);

}  // namespace chi2cav
