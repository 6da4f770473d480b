// chi2cav: threshold, steady-state, clamping, squeezing-spectrum and cascade
// tables for a doubling cavity with a competing parametric oscillator.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "chi2cav/commands.hpp"
#include "chi2cav/run_config.hpp"

int main(int argc, char** argv) {
    using namespace chi2cav;

    CLI::App app{"chi2cav - competing second-order nonlinearities in an optical cavity"};
    app.require_subcommand(1);

    std::string config_path;
    CommandFlags flags;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config,-c", config_path, "JSON configuration file")->required();
        sub->add_option("--output,-o", flags.output, "output path (default: stdout)");
        sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };

    auto* threshold = app.add_subcommand("threshold", "threshold, clamp and efficiency at threshold");
    common(threshold);
    threshold->add_flag("--detuned", flags.detuned, "substitute |gamma + i Delta| for every decay rate");
    threshold->add_flag("--numeric", flags.numeric, "bisect the trivial-branch instability");

    auto* steady = app.add_subcommand("steady", "steady state at one pump power");
    common(steady);
    steady->add_option("--power", flags.power, "pump power (W)");
    steady->add_flag("--analytic", flags.analytic, "closed-form branches (zero detunings only)");

    auto* curve = app.add_subcommand("clamp-curve", "second-harmonic power versus pump power");
    common(curve);
    curve->add_option("--pmin", flags.pmin, "first pump power (W)");
    curve->add_option("--pmax", flags.pmax, "last pump power (W)");
    curve->add_option("--steps", flags.steps, "number of grid points");

    auto* spectrum = app.add_subcommand("spectrum", "second-harmonic amplitude squeezing spectrum");
    common(spectrum);
    spectrum->add_option("--model", flags.model, "eq4, eq5 or eq6")->check(CLI::IsMember({"eq4", "eq5", "eq6"}));
    spectrum->add_option("--n", flags.n_scaled, "scaled pump power N = P1 / P1_thr");
    spectrum->add_option("--omega-max", flags.omega_max, "largest analysis frequency in units of gamma1");
    spectrum->add_option("--points", flags.points, "number of frequency points");

    auto* cascade = app.add_subcommand("cascade", "cascaded line positions around nu and 2 nu");
    common(cascade);
    cascade->add_option("--delta", flags.delta, "signal/idler offset from degeneracy (Hz)");
    cascade->add_option("--order", flags.order, "cascade order");

    auto* verify = app.add_subcommand("verify", "self-consistency report");
    common(verify);
    verify->add_option("--json", flags.json_path, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config_error;
    }

    RunConfig config;
    try {
        config = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error (" << e.key() << "): " << e.what() << '\n';
        return exit_config_error;
    }
    flags.threads = default_threads();

    const std::string command = app.get_subcommands().front()->get_name();
    return run_command(command, config, flags, std::cout, std::cerr);
}
