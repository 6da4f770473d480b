#pragma once

// Amplitude-quadrature noise spectra of the second-harmonic output,
// normalised to shot noise (V = 1).
//
//   eq4: no competition, arbitrary pump noise V1_in
//   eq5: competing NDOPO above threshold, general rates (V1_in = 1, g1c = g1)
//   eq6: eq5 at the symmetric optimum, in omega_hat = omega / (2 g1)

#include <optional>
#include <string_view>
#include <vector>

#include "chi2cav/dynamics.hpp"
#include "chi2cav/model.hpp"

namespace chi2cav {

struct SpectrumParams {
    double gamma_nl = 0.0;  // mu1 |alpha1|^2
    double gamma1 = 0.0;
    double gamma1_c = 0.0;
    double v1_in = 1.0;
    double n_scaled = 0.0;
    double r = 0.0;
    double gamma_bar = 0.0;
    double gamma_f = 0.0;  // gamma1 + r gamma_bar
};

// Builds params from a cavity; gamma_f is derived, never supplied.
SpectrumParams spectrum_params(const CavityConfig& config, double n_scaled, double gamma_nl, double v1_in = 1.0);

double v2_no_competition(double omega, const SpectrumParams& p);
double v2_competition_general(double omega, const SpectrumParams& p);
double v2_competition_symmetric(double omega_hat, double n_scaled);

// mu1 |alpha1|^2 at the operating point. Zero detunings use the analytic
// branches, otherwise a numerical steady state.
double gamma_nl_at(const CavityConfig& config, const PumpDrive& drive);
double gamma_nl_at(const CavityConfig& config, const SteadyStateReport& report);

// Largest |eq4(gamma_nl = g1) - eq6(N = 1)| over a log grid
// omega in [1e-3, 1e3] g1. Requires the symmetric optimum.
double continuity_check(const CavityConfig& config, int points = 2001);

enum class SpectrumModel { eq4, eq5, eq6 };

const char* to_string(SpectrumModel m);
std::optional<SpectrumModel> parse_spectrum_model(std::string_view s);

double to_db(double v);

struct SpectrumMinimum {
    double omega = 0.0;
    double value = 0.0;
};

struct SqueezingSpectrum {
    SpectrumModel model = SpectrumModel::eq6;
    std::vector<double> omegas;  // rad/s, or omega_hat for eq6
    std::vector<double> values;
    std::vector<double> db;
    SpectrumMinimum minimum;
};

// eq6 reads n_scaled from params and expects omega_hat on the grid.
SqueezingSpectrum spectrum_sweep(SpectrumModel model, const SpectrumParams& params,
                                 const std::vector<double>& omega_grid);

// Side-by-side evaluation of eq5 (symmetric parameters) against eq6 on a
// shared omega_hat grid.
struct Eq5Comparison {
    double gap_at_zero = 0.0;         // |eq5 - eq6| at omega = 0
    double max_relative_gap = 0.0;    // max |eq5 - eq6| / |eq6| over omega_hat > 0
    double worst_omega_hat = 0.0;
    double ratio_at_worst = 1.0;      // eq5 / eq6 at worst_omega_hat
};

Eq5Comparison compare_eq5_eq6(double n_scaled, const std::vector<double>& omega_hat_grid);

}  // namespace chi2cav
