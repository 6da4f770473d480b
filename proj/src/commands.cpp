#include "chi2cav/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <thread>

#include "chi2cav/dynamics.hpp"
#include "chi2cav/errors.hpp"
#include "chi2cav/spectra.hpp"
#include "chi2cav/table.hpp"
#include "chi2cav/thresholds.hpp"
#include "chi2cav/verify.hpp"

namespace chi2cav {

namespace {

OutputFormat resolve_format(const RunConfig& rc, const CommandFlags& f) {
    if (!f.format) return rc.output.format;
    if (*f.format == "csv") return OutputFormat::csv;
    if (*f.format == "json") return OutputFormat::json;
    throw ConfigError("--format", "--format must be csv or json");
}

void emit(const Table& t, const RunConfig& rc, const CommandFlags& f, std::ostream& out) {
    const OutputFormat fmt = resolve_format(rc, f);
    const std::string path = f.output.value_or(rc.output.path);
    auto write = [&](std::ostream& os) {
        if (fmt == OutputFormat::csv)
            write_csv(os, t);
        else
            write_json(os, t);
    };
    if (path.empty() || path == "-") {
        write(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("output.path", "cannot open output file " + path);
    write(file);
}

int cmd_threshold(const RunConfig& rc, const CommandFlags& f, std::ostream& out) {
    const ThresholdMode mode = f.numeric   ? ThresholdMode::numeric_bifurcation
                               : f.detuned ? ThresholdMode::effective_decay_substitution
                                           : ThresholdMode::zero_detuning;
    const ThresholdReport r = threshold_report(rc.cavity, mode);
    Table t;
    t.columns = {"p1_thr_w", "p1_min_w", "eta", "clamped_p2_w", "efficiency_at_threshold", "mode"};
    t.rows.push_back({r.p1_thr, r.p1_min, r.eta, r.clamped_p2, r.efficiency_at_threshold, to_string(r.mode)});
    emit(t, rc, f, out);
    return exit_ok;
}

int cmd_steady(const RunConfig& rc, const CommandFlags& f, std::ostream& out) {
    const std::optional<double> power = f.power ? f.power : rc.pump_power;
    if (!power) throw ConfigError("pump_power", "steady needs --power or \"pump_power\" in the config");
    const PumpDrive drive = pump_drive(*power, rc.cavity.nu);
    SteadyStateOptions opts;
    opts.tol = rc.tol;
    opts.kick = rc.kick;
    const SteadyStateReport r =
        f.analytic ? steady_state_analytic(rc.cavity, drive) : find_steady_state(rc.cavity, drive, opts);
    Table t;
    t.columns = {"alpha1_re",   "alpha1_im", "alpha_s_re",           "alpha_s_im",
                 "alpha_i_re",  "alpha_i_im", "branch",              "sh_flux",
                 "p2_w",        "fundamental_out_flux", "conservation_residual", "max_re_eigenvalue",
                 "stability",   "phase_drift_rad_s"};
    const FieldState& s = r.state;
    t.rows.push_back({s.alpha1.real(), s.alpha1.imag(), s.alpha_s.real(), s.alpha_s.imag(), s.alpha_i.real(),
                      s.alpha_i.imag(), to_string(r.branch), r.fluxes.sh_flux,
                      constants::planck * 2.0 * rc.cavity.nu * r.fluxes.sh_flux, r.fluxes.fundamental_out_flux,
                      r.conservation_residual, r.max_re_eigenvalue, to_string(r.stability), r.phase_drift});
    emit(t, rc, f, out);
    return exit_ok;
}

int cmd_clamp_curve(const RunConfig& rc, const CommandFlags& f, std::ostream& out) {
    SweepSpec sw = rc.sweep.value_or(SweepSpec{});
    if (f.pmin) sw.start = *f.pmin;
    if (f.pmax) sw.stop = *f.pmax;
    if (f.steps) sw.steps = *f.steps;
    if (!rc.sweep && !(f.pmin && f.pmax))
        throw ConfigError("sweep", "clamp-curve needs --pmin/--pmax or a \"sweep\" section");
    if (!(sw.start >= 0.0) || !(sw.stop >= sw.start)) throw ConfigError("--pmin", "need 0 <= pmin <= pmax");
    if (sw.steps < 1) throw ConfigError("--steps", "--steps must be >= 1");
    if (sw.spacing == Spacing::log && !(sw.start > 0.0))
        throw ConfigError("--pmin", "log spacing needs pmin > 0");

    const auto curve = power_curve(rc.cavity, sweep_grid(sw), f.threads);
    Table t;
    t.columns = {"p1_w", "p2_w", "efficiency", "regime"};
    bool failed = false;
    for (const auto& pt : curve) {
        t.rows.push_back({pt.p1, pt.p2, pt.efficiency, to_string(pt.regime)});
        failed |= pt.regime == Regime::failed;
    }
    if (failed) t.notes.push_back("some points failed to converge (regime=failed)");
    emit(t, rc, f, out);
    return failed ? exit_non_convergence : exit_ok;
}

int cmd_spectrum(const RunConfig& rc, const CommandFlags& f, std::ostream& out) {
    SpectrumSpec sp = rc.spectrum.value_or(SpectrumSpec{});
    if (f.model) {
        const auto m = parse_spectrum_model(*f.model);
        if (!m) throw ConfigError("--model", "--model must be eq4, eq5 or eq6");
        sp.model = *m;
    }
    if (f.n_scaled) sp.n_scaled = *f.n_scaled;
    if (f.omega_max) sp.omega_max_over_gamma1 = *f.omega_max;
    if (f.points) sp.points = *f.points;
    if (sp.points < 2) throw ConfigError("--points", "--points must be >= 2");
    if (!(sp.omega_max_over_gamma1 > 0.0)) throw ConfigError("--omega-max", "--omega-max must be > 0");

    const CavityConfig& c = rc.cavity;
    const double g1 = c.fundamental.gamma_total;
    double gamma_nl = 0.0;
    if (sp.model == SpectrumModel::eq4) {
        // no competition: the fundamental sits on the trivial branch at P1 = N P1_thr
        const PumpDrive drive = pump_drive(sp.n_scaled * threshold_power(c), c.nu);
        gamma_nl = c.mu1 * std::norm(trivial_branch_alpha1(c, drive));
    }
    const SpectrumParams params = spectrum_params(c, sp.n_scaled, gamma_nl, sp.v1_in);

    const bool hat = sp.model == SpectrumModel::eq6;
    std::vector<double> omegas(sp.points), grid(sp.points);
    for (std::size_t k = 0; k < sp.points; ++k) {
        omegas[k] = sp.omega_max_over_gamma1 * g1 * static_cast<double>(k) / static_cast<double>(sp.points - 1);
        grid[k] = hat ? omegas[k] / (2.0 * g1) : omegas[k];
    }
    const SqueezingSpectrum spec = spectrum_sweep(sp.model, params, grid);

    auto to_omega = [&](double x) { return hat ? x * 2.0 * g1 : x; };
    Table t;
    t.columns = {hat ? "omega_hat" : "omega_rad_s", "f_hz", "v2", "v2_db"};
    for (std::size_t k = 0; k < grid.size(); ++k)
        t.rows.push_back({grid[k], omegas[k] / (2.0 * std::numbers::pi), spec.values[k], spec.db[k]});
    t.footer_columns = {"min", t.columns[0], "f_hz", "v2", "v2_db"};
    t.footer.push_back({std::string("min"), spec.minimum.omega,
                        to_omega(spec.minimum.omega) / (2.0 * std::numbers::pi), spec.minimum.value,
                        to_db(spec.minimum.value)});
    t.notes.push_back(std::string("model=") + to_string(sp.model) + " n_scaled=" + format_number(sp.n_scaled));
    emit(t, rc, f, out);
    return exit_ok;
}

int cmd_cascade(const RunConfig& rc, const CommandFlags& f, std::ostream& out) {
    const double delta = f.delta.value_or(rc.cascade.delta_hz);
    const int order = f.order.value_or(rc.cascade.order);
    if (order < 1) throw ConfigError("--order", "--order must be >= 1");
    if (!(delta >= 0.0)) throw ConfigError("--delta", "--delta must be >= 0");
    const CascadeLayout layout = cascade_lines(rc.cavity.nu, delta, order);
    Table t;
    t.columns = {"band", "frequency_hz", "wavelength_nm", "order_k"};
    auto add = [&](const std::vector<CascadeLine>& lines) {
        for (const auto& l : lines)
            t.rows.push_back({l.band == Band::infrared ? "ir" : "vis", l.frequency, wavelength_nm(l.frequency),
                              static_cast<long long>(l.order)});
    };
    add(layout.infrared_lines);
    add(layout.visible_lines);
    emit(t, rc, f, out);
    return exit_ok;
}

int cmd_verify(const RunConfig& rc, const CommandFlags& f, std::ostream& out) {
    const VerifyReport report = run_verify(rc, f.threads);
    print_report(out, report);
    const std::string path = f.json_path.value_or(f.output.value_or(rc.output.path));
    const std::string json = to_json(report).dump(2);
    if (path.empty() || path == "-") {
        out << json << '\n';
    } else {
        std::ofstream file(path, std::ios::binary);
        if (!file) throw ConfigError("output.path", "cannot open output file " + path);
        file << json << '\n';
    }
    return report.overall ? exit_ok : exit_verify_failed;
}

}  // namespace

std::size_t default_threads() {
    if (const char* env = std::getenv("CHI2CAV_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int run_command(const std::string& command, const RunConfig& rc, const CommandFlags& f, std::ostream& out,
                std::ostream& err) {
    try {
        if (command == "threshold") return cmd_threshold(rc, f, out);
        if (command == "steady") return cmd_steady(rc, f, out);
        if (command == "clamp-curve") return cmd_clamp_curve(rc, f, out);
        if (command == "spectrum") return cmd_spectrum(rc, f, out);
        if (command == "cascade") return cmd_cascade(rc, f, out);
        if (command == "verify") return cmd_verify(rc, f, out);
        err << "error: unknown command \"" << command << "\"\n";
        return exit_config_error;
    } catch (const ConfigError& e) {
        err << "configuration error (" << e.key() << "): " << e.what() << '\n';
        return exit_config_error;
    } catch (const NonConvergence& e) {
        err << "numerical non-convergence: " << e.what() << '\n';
        return exit_non_convergence;
    } catch (const AmbiguousBranch& e) {
        err << "numerical non-convergence: " << e.what() << '\n';
        return exit_non_convergence;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const UnsupportedRegime& e) {
        err << "unsupported regime: " << e.what() << '\n';
        return exit_config_error;
    } catch (const InvalidConfig& e) {
        err << "configuration error (" << e.key() << "): " << e.what() << '\n';
        return exit_config_error;
    }
}

}  // namespace chi2cav
