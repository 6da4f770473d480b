#include "chi2cav/thresholds.hpp"

#include <cmath>
#include <limits>

#include "chi2cav/dynamics.hpp"
#include "chi2cav/errors.hpp"
#include "chi2cav/parallel.hpp"

namespace chi2cav {

namespace {

double sh_photon_energy(const CavityConfig& c) { return constants::planck * 2.0 * c.nu; }

double threshold_formula(const CavityConfig& c, double g1, double gs, double gi) {
    const double gbar = std::sqrt(gs * gi);
    const double r = coupling_ratio(c);
    const double bracket = 1.0 + r * gbar / g1;
    return sh_photon_energy(c) * (gbar / c.fundamental.gamma_coupling) * (g1 * g1 / std::sqrt(c.mu1 * c.mu2)) *
           0.25 * bracket * bracket;
}

double growth_at_power(const CavityConfig& c, double power) {
    return trivial_branch_growth_rate(c, trivial_branch_alpha1(c, pump_drive(power, c.nu)));
}

}  // namespace

double threshold_power(const CavityConfig& c) {
    return threshold_formula(c, c.fundamental.gamma_total, c.signal.gamma_total, c.idler.gamma_total);
}

double detuned_threshold_power(const CavityConfig& c) {
    return threshold_formula(c, effective_decay(c.fundamental).magnitude, effective_decay(c.signal).magnitude,
                             effective_decay(c.idler).magnitude);
}

double numeric_threshold_power(const CavityConfig& c) {
    validate(c);
    const double ref = detuned_threshold_power(c);
    double lo = 1e-3 * ref, hi = 1e3 * ref;
    // widen until the growth rate changes sign (asymmetric detunings can move
    // the exact threshold away from the substitution estimate)
    for (int i = 0; i < 20 && growth_at_power(c, lo) > 0.0; ++i) lo *= 1e-3;
    for (int i = 0; i < 20 && growth_at_power(c, hi) < 0.0; ++i) hi *= 1e3;
    if (growth_at_power(c, lo) > 0.0 || growth_at_power(c, hi) < 0.0)
        throw NonConvergence("numeric_threshold_power: could not bracket the threshold");
    while (hi - lo > 1e-12 * hi) {
        const double mid = std::sqrt(lo * hi);
        if (growth_at_power(c, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double min_threshold_power(const CavityConfig& c) {
    const double g1 = c.fundamental.gamma_total;
    return sh_photon_energy(c) * g1 * g1 / (escape_efficiency(c) * c.mu1);
}

double min_threshold_rate_ratio(double p1_min_w, double nu) {
    if (!(p1_min_w > 0.0) || !(nu > 0.0)) throw DomainError("min_threshold_rate_ratio: arguments must be > 0");
    return p1_min_w / (constants::planck * 2.0 * nu);
}

double clamped_sh_power(const CavityConfig& c) {
    const double gbar = gamma_bar(c);
    return sh_photon_energy(c) * gbar * gbar / c.mu2;
}

const char* to_string(ThresholdMode m) {
    switch (m) {
        case ThresholdMode::zero_detuning: return "zero_detuning";
        case ThresholdMode::effective_decay_substitution: return "effective_decay_substitution";
        case ThresholdMode::numeric_bifurcation: return "numeric_bifurcation";
    }
    return "?";
}

ThresholdReport threshold_report(const CavityConfig& c, ThresholdMode mode) {
    validate(c);
    ThresholdReport rep;
    rep.mode = mode;
    rep.p1_min = min_threshold_power(c);
    rep.eta = escape_efficiency(c);
    switch (mode) {
        case ThresholdMode::zero_detuning:
            rep.p1_thr = threshold_power(c);
            rep.clamped_p2 = clamped_sh_power(c);
            break;
        case ThresholdMode::effective_decay_substitution:
            rep.p1_thr = detuned_threshold_power(c);
            rep.clamped_p2 = sh_photon_energy(c) * effective_decay(c.signal).magnitude *
                             effective_decay(c.idler).magnitude / c.mu2;
            break;
        case ThresholdMode::numeric_bifurcation: {
            rep.p1_thr = numeric_threshold_power(c);
            // the plateau is independent of P1 above threshold; sample it at 2x
            const PumpDrive drive = pump_drive(2.0 * rep.p1_thr, c.nu);
            const SteadyStateReport ss =
                has_zero_detunings(c) ? steady_state_analytic(c, drive) : find_steady_state(c, drive);
            rep.clamped_p2 = sh_photon_energy(c) * ss.fluxes.sh_flux;
            break;
        }
    }
    rep.efficiency_at_threshold = rep.clamped_p2 / rep.p1_thr;
    return rep;
}

double below_threshold_alpha1(const CavityConfig& c, double power_w) {
    if (!has_zero_detunings(c)) throw UnsupportedRegime("below_threshold_alpha1: nonzero detunings");
    const PumpDrive drive = pump_drive(power_w, c.nu);
    const double d = std::sqrt(2.0 * c.fundamental.gamma_coupling) * drive.amplitude;
    if (d == 0.0) return 0.0;
    const double g1 = c.fundamental.gamma_total, mu = c.mu1;
    // depressed cubic x^3 + (g1/mu) x - d/mu = 0 with positive linear
    // coefficient: hyperbolic form of the single real root
    const double z = 1.5 * std::sqrt(3.0) * d * std::sqrt(mu) / std::pow(g1, 1.5);
    double x = 2.0 * std::sqrt(g1 / (3.0 * mu)) * std::sinh(std::asinh(z) / 3.0);
    for (int it = 0; it < 4; ++it) {
        const double f = (mu * x * x + g1) * x - d;
        const double df = 3.0 * mu * x * x + g1;
        const double step = f / df;
        x -= step;
        if (std::abs(step) <= 1e-16 * x) break;
    }
    return x;
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::below: return "below";
        case Regime::clamped: return "clamped";
        case Regime::failed: return "failed";
    }
    return "?";
}

std::vector<EfficiencyPoint> power_curve(const CavityConfig& c, const std::vector<double>& grid,
                                         std::size_t threads) {
    validate(c);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0)) throw DomainError("power_curve: grid must be non-negative");
        if (i > 0 && grid[i] < grid[i - 1]) throw DomainError("power_curve: grid must be ascending");
    }
    std::vector<EfficiencyPoint> out(grid.size());
    const double energy = sh_photon_energy(c);
    const bool analytic = has_zero_detunings(c);
    const double p_thr = analytic ? threshold_power(c) : 0.0;
    const double clamp = clamped_sh_power(c);

    parallel_for(grid.size(), threads, [&](std::size_t i) {
        EfficiencyPoint& pt = out[i];
        pt.p1 = grid[i];
        if (analytic) {
            if (pt.p1 <= p_thr) {
                const double x = below_threshold_alpha1(c, pt.p1);
                pt.p2 = energy * c.mu1 * x * x * x * x;
                pt.regime = Regime::below;
            } else {
                pt.p2 = clamp;
                pt.regime = Regime::clamped;
            }
        } else {
            try {
                const SteadyStateReport ss = find_steady_state(c, pump_drive(pt.p1, c.nu));
                pt.p2 = energy * ss.fluxes.sh_flux;
                pt.regime = ss.branch == Branch::ndopo ? Regime::clamped : Regime::below;
            } catch (const std::runtime_error&) {
                pt.p2 = std::numeric_limits<double>::quiet_NaN();
                pt.regime = Regime::failed;
            }
        }
        pt.efficiency = pt.p1 > 0.0 ? pt.p2 / pt.p1 : (pt.regime == Regime::failed ? pt.p2 : 0.0);
    });
    return out;
}

}  // namespace chi2cav
