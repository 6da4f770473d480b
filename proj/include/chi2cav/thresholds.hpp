#pragma once

// Competition threshold, second-harmonic clamping and conversion efficiency.

#include <cstddef>
#include <vector>

#include "chi2cav/model.hpp"

namespace chi2cav {

// Zero-detuning threshold: h 2nu (gbar/g1c)(g1^2/sqrt(mu1 mu2))(1/4)(1 + r gbar/g1)^2.
// Detunings in config are ignored.
double threshold_power(const CavityConfig& config);

// Same formula with g1, gs, gi replaced by |g + i D|. The coupling rate g1c
// is a mirror property and is left untouched.
double detuned_threshold_power(const CavityConfig& config);

// Pump power at which trivial_branch_growth_rate changes sign along the
// trivial branch, by bisection. Exact for any detunings.
double numeric_threshold_power(const CavityConfig& config);

// h 2nu g1^2 / (eta mu1)
double min_threshold_power(const CavityConfig& config);

// Inverse of min_threshold_power: g1^2/(eta mu1) in seconds for a measured
// minimum threshold.
double min_threshold_rate_ratio(double p1_min_w, double nu);

// h 2nu gbar^2 / mu2
double clamped_sh_power(const CavityConfig& config);

enum class ThresholdMode { zero_detuning, effective_decay_substitution, numeric_bifurcation };

const char* to_string(ThresholdMode m);

struct ThresholdReport {
    double p1_thr = 0.0;
    double p1_min = 0.0;
    double eta = 0.0;
    double clamped_p2 = 0.0;
    double efficiency_at_threshold = 0.0;
    ThresholdMode mode = ThresholdMode::zero_detuning;
};

ThresholdReport threshold_report(const CavityConfig& config, ThresholdMode mode = ThresholdMode::zero_detuning);

// Real positive root x of g1 x + mu1 x^3 = sqrt(2 g1c) A (trivial branch,
// zero detunings).
double below_threshold_alpha1(const CavityConfig& config, double power_w);

enum class Regime { below, clamped, failed };

const char* to_string(Regime r);

struct EfficiencyPoint {
    double p1 = 0.0;
    double p2 = 0.0;
    double efficiency = 0.0;
    Regime regime = Regime::below;
};

// Zero detunings: trivial-branch cubic below threshold, clamp above.
// Otherwise each point comes from a numerical steady state; points whose
// solve fails are marked Regime::failed with NaN powers.
std::vector<EfficiencyPoint> power_curve(const CavityConfig& config, const std::vector<double>& p1_grid,
                                         std::size_t threads = 1);

}  // namespace chi2cav
