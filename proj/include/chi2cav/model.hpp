#pragma once

// Cavity parameters, unit conversions and derived scales for a singly
// resonant frequency doubler whose intracavity second harmonic can also pump
// a nondegenerate parametric oscillator on the neighbouring cavity modes.
//
// Units: decay rates, detunings and nonlinear rates in s^-1 (detunings and
// analysis frequencies are angular), optical frequencies in Hz, powers in W,
// field amplitudes such that |alpha|^2 is a photon number and |A|^2 a photon
// flux (photons/s).

#include <complex>
#include <vector>

namespace chi2cav {

namespace constants {
inline constexpr double planck = 6.62607015e-34;      // J s
inline constexpr double speed_of_light = 299792458.0;  // m/s
}  // namespace constants

struct ModeParams {
    double gamma_total = 0.0;     // s^-1
    double gamma_coupling = 0.0;  // s^-1, output-coupler share of gamma_total
    double detuning = 0.0;        // rad/s
};

// Signal and idler have no separate output coupler, so their gamma_coupling
// must equal gamma_total.
struct CavityConfig {
    ModeParams fundamental;
    ModeParams signal;
    ModeParams idler;
    double mu1 = 0.0;  // SHG rate per photon
    double mu2 = 0.0;  // NDOPO rate per photon
    double nu = 0.0;   // fundamental optical frequency, Hz
};

// Throws InvalidConfig naming the first violated field.
void validate(const CavityConfig& config);

// Symmetric test cavity: all decay rates 1e7 s^-1, unit couplings,
// fundamental at 2.818e14 Hz, no detuning, unity escape efficiency.
CavityConfig reference_config();

// Convenience constructor for the zero-detuning case; validates.
CavityConfig make_config(double gamma1, double gamma1_c, double gamma_s, double gamma_i,
                         double mu1, double mu2, double nu);

bool has_zero_detunings(const CavityConfig& config);

// Pump amplitude gauge: A is real and non-negative.
struct PumpDrive {
    double power = 0.0;      // W
    double amplitude = 0.0;  // sqrt(photons/s)
};

PumpDrive pump_drive(double power_w, double nu);
double power_of(double amplitude, double nu);

struct EffectiveDecay {
    std::complex<double> value;
    double magnitude = 0.0;
};

EffectiveDecay effective_decay(const ModeParams& mode);

struct DerivedScales {
    double gamma_bar = 0.0;  // sqrt(gamma_s gamma_i)
    double r = 0.0;          // sqrt(mu1 / mu2)
    double eta = 0.0;        // gamma1_c / gamma1
    double p1_thr = 0.0;     // W, zero-detuning competition threshold
    double p1_min = 0.0;     // W, symmetric-optimum threshold
    double n_scaled = 0.0;   // P1 / p1_thr
};

DerivedScales derived_scales(const CavityConfig& config, double power_w);

double gamma_bar(const CavityConfig& config);
double coupling_ratio(const CavityConfig& config);
double escape_efficiency(const CavityConfig& config);

// Intracavity fundamental amplitude squared at which sqrt(mu1 mu2)|alpha1|^2
// equals gamma_bar; the natural amplitude scale of the problem.
double threshold_photon_number(const CavityConfig& config);

enum class Band { infrared, visible };

struct CascadeLine {
    Band band = Band::infrared;
    int order = 0;  // signed multiple of delta relative to nu (infrared) or 2 nu (visible)
    double frequency = 0.0;
};

// Frequency bookkeeping for cascaded SFG/SHG/DFG products of a signal/idler
// pair at nu +- delta. Infrared: nu + k delta for |k| <= order. Visible:
// 2 nu + k delta for |k| <= 2 order. Lists ascending; delta == 0 collapses
// each band to a single line.
struct CascadeLayout {
    double delta = 0.0;
    std::vector<CascadeLine> infrared_lines;
    std::vector<CascadeLine> visible_lines;
};

inline constexpr int default_cascade_order = 2;

CascadeLayout cascade_lines(double nu, double delta, int order = default_cascade_order);

double wavelength_nm(double frequency_hz);
double frequency_of_wavelength_nm(double wavelength_nm);

}  // namespace chi2cav
