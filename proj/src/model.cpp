#include "chi2cav/model.hpp"

#include <cmath>
#include <string>

#include "chi2cav/errors.hpp"
#include "chi2cav/thresholds.hpp"

namespace chi2cav {

namespace {

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

void validate_mode(const ModeParams& mode, const std::string& prefix) {
    if (!finite_positive(mode.gamma_total))
        throw InvalidConfig(prefix + ".gamma_total", prefix + ": decay rate must be finite and > 0");
    if (!finite_positive(mode.gamma_coupling) || mode.gamma_coupling > mode.gamma_total)
        throw InvalidConfig(prefix + ".gamma_coupling",
                            prefix + ": coupling rate must satisfy 0 < gamma_coupling <= gamma_total");
    if (!std::isfinite(mode.detuning))
        throw InvalidConfig(prefix + ".detuning", prefix + ": detuning must be finite");
}

}  // namespace

void validate(const CavityConfig& config) {
    validate_mode(config.fundamental, "fundamental");
    validate_mode(config.signal, "signal");
    validate_mode(config.idler, "idler");
    if (config.signal.gamma_coupling != config.signal.gamma_total)
        throw InvalidConfig("signal.gamma_coupling", "signal mode has no separate output coupler");
    if (config.idler.gamma_coupling != config.idler.gamma_total)
        throw InvalidConfig("idler.gamma_coupling", "idler mode has no separate output coupler");
    if (!finite_positive(config.mu1)) throw InvalidConfig("mu1", "mu1 must be finite and > 0");
    if (!finite_positive(config.mu2)) throw InvalidConfig("mu2", "mu2 must be finite and > 0");
    if (!finite_positive(config.nu)) throw InvalidConfig("nu", "nu must be finite and > 0");
}

CavityConfig make_config(double gamma1, double gamma1_c, double gamma_s, double gamma_i,
                         double mu1, double mu2, double nu) {
    CavityConfig c;
    c.fundamental = {gamma1, gamma1_c, 0.0};
    c.signal = {gamma_s, gamma_s, 0.0};
    c.idler = {gamma_i, gamma_i, 0.0};
    c.mu1 = mu1;
    c.mu2 = mu2;
    c.nu = nu;
    validate(c);
    return c;
}

CavityConfig reference_config() { return make_config(1e7, 1e7, 1e7, 1e7, 1.0, 1.0, 2.818e14); }

bool has_zero_detunings(const CavityConfig& config) {
    return config.fundamental.detuning == 0.0 && config.signal.detuning == 0.0 &&
           config.idler.detuning == 0.0;
}

PumpDrive pump_drive(double power_w, double nu) {
    if (!(power_w >= 0.0) || !std::isfinite(power_w))
        throw DomainError("pump power must be finite and >= 0");
    if (!finite_positive(nu)) throw DomainError("optical frequency must be > 0");
    return {power_w, std::sqrt(power_w / (constants::planck * nu))};
}

double power_of(double amplitude, double nu) { return amplitude * amplitude * constants::planck * nu; }

EffectiveDecay effective_decay(const ModeParams& mode) {
    const std::complex<double> value(mode.gamma_total, mode.detuning);
    return {value, std::abs(value)};
}

double gamma_bar(const CavityConfig& config) {
    return std::sqrt(config.signal.gamma_total * config.idler.gamma_total);
}

double coupling_ratio(const CavityConfig& config) { return std::sqrt(config.mu1 / config.mu2); }

double escape_efficiency(const CavityConfig& config) {
    return config.fundamental.gamma_coupling / config.fundamental.gamma_total;
}

double threshold_photon_number(const CavityConfig& config) {
    return gamma_bar(config) / std::sqrt(config.mu1 * config.mu2);
}

DerivedScales derived_scales(const CavityConfig& config, double power_w) {
    if (!(power_w >= 0.0)) throw DomainError("pump power must be >= 0");
    DerivedScales s;
    s.gamma_bar = gamma_bar(config);
    s.r = coupling_ratio(config);
    s.eta = escape_efficiency(config);
    s.p1_thr = threshold_power(config);
    s.p1_min = min_threshold_power(config);
    s.n_scaled = power_w / s.p1_thr;
    return s;
}

CascadeLayout cascade_lines(double nu, double delta, int order) {
    if (order < 1) throw DomainError("cascade order must be >= 1");
    if (!(delta >= 0.0)) throw DomainError("cascade offset must be >= 0");
    CascadeLayout layout;
    layout.delta = delta;
    auto fill = [&](std::vector<CascadeLine>& lines, Band band, double centre, int kmax) {
        if (delta == 0.0) {
            lines.push_back({band, 0, centre});
            return;
        }
        for (int k = -kmax; k <= kmax; ++k) lines.push_back({band, k, centre + k * delta});
    };
    fill(layout.infrared_lines, Band::infrared, nu, order);
    fill(layout.visible_lines, Band::visible, 2.0 * nu, 2 * order);
    return layout;
}

double wavelength_nm(double frequency_hz) { return constants::speed_of_light / frequency_hz * 1e9; }

double frequency_of_wavelength_nm(double wavelength_nm) {
    return constants::speed_of_light / (wavelength_nm * 1e-9);
}

}  // namespace chi2cav
