#pragma once

// Coupled-mode equations for the fundamental, signal and idler intracavity
// amplitudes, their numerical integration and steady states.
//
//   d a1/dt = -(g1 + i D1) a1 - 2 k conj(a1) as ai - mu1 |a1|^2 a1 + sqrt(2 g1c) A
//   d as/dt = -(gs + i Ds) as - k a1^2 conj(ai) - 2 mu2 |ai|^2 as
//   d ai/dt = -(gi + i Di) ai - k a1^2 conj(as) - 2 mu2 |as|^2 ai
//
// with k = sqrt(mu1 mu2). The nonresonant second-harmonic field is
// B = sqrt(mu1) a1^2 + 2 sqrt(mu2) as ai and its output flux is |B|^2.

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chi2cav/model.hpp"

namespace chi2cav {

using cplx = std::complex<double>;
using RealState = Eigen::Matrix<double, 6, 1>;
using RealJacobian = Eigen::Matrix<double, 6, 6>;

struct FieldState {
    cplx alpha1;
    cplx alpha_s;
    cplx alpha_i;
};

RealState to_real(const FieldState& s);
FieldState from_real(const RealState& x);
bool is_finite(const FieldState& s);

FieldState rhs(const FieldState& state, const CavityConfig& config, const PumpDrive& drive);

// Analytic 6x6 Jacobian of rhs in (Re a1, Im a1, Re as, Im as, Re ai, Im ai).
RealJacobian jacobian(const FieldState& state, const CavityConfig& config, const PumpDrive& drive);

// Generator of the signal/idler counter-rotation (as e^{i phi}, ai e^{-i phi})
// under which the equations are invariant.
RealState phase_generator(const FieldState& state);

FieldState rotate_phase(const FieldState& state, double phi);

double sh_output_flux(const FieldState& state, const CavityConfig& config);

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    double final_step = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<FieldState> states;
    StepStats step_stats;
};

struct IntegrateOptions {
    double tol = 1e-10;
    std::size_t record_stride = 1;  // keep every n-th accepted step (final state always kept)
    std::size_t max_steps = 20'000'000;
};

class NonConvergence : public std::runtime_error {
public:
    explicit NonConvergence(const std::string& what, std::optional<Trajectory> partial = std::nullopt)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const std::optional<Trajectory>& partial() const noexcept { return partial_; }

private:
    std::optional<Trajectory> partial_;
};

// Signal/idler amplitudes within the branch dead-band of zero while the
// trivial state is unstable.
class AmbiguousBranch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws NonConvergence (carrying the partial trajectory) on step-size
// underflow or a non-finite state.
Trajectory integrate(const FieldState& state0, const CavityConfig& config, const PumpDrive& drive,
                     double t_end, const IntegrateOptions& options);
Trajectory integrate(const FieldState& state0, const CavityConfig& config, const PumpDrive& drive,
                     double t_end, double tol);

enum class Branch { trivial, ndopo };
enum class Stability { stable, marginal, unstable };

const char* to_string(Branch b);
const char* to_string(Stability s);

struct OutputFluxes {
    double sh_flux = 0.0;               // photons/s at 2 nu
    double fundamental_out_flux = 0.0;  // reflected pump, photons/s
    double internal_loss_flux = 0.0;    // 2 (g1 - g1c) |a1|^2
    double signal_flux = 0.0;           // 2 gs |as|^2
    double idler_flux = 0.0;            // 2 gi |ai|^2
    double input_flux = 0.0;            // A^2
};

OutputFluxes output_fluxes(const FieldState& state, const CavityConfig& config, const PumpDrive& drive);

struct SteadyStateReport {
    FieldState state;
    Branch branch = Branch::trivial;
    // max |d alpha/dt| in the frame co-rotating with phase_drift
    double residual = 0.0;
    // Signal/idler counter-rotation rate (rad/s); nonzero only when
    // detunings pull the oscillation off the cavity resonances.
    double phase_drift = 0.0;
    double max_re_eigenvalue = 0.0;
    std::optional<double> neutral_eigenvalue;  // phase mode of the ndopo branch
    Stability stability = Stability::stable;
    bool stable = true;
    OutputFluxes fluxes;
    double conservation_residual = 0.0;
};

struct SteadyStateOptions {
    double tol = 1e-10;
    double kick = 1e-3;
};

inline constexpr double branch_dead_band = 1e-6;   // |as ai| relative to threshold photon number
inline constexpr double stability_margin = 1e-9;   // relative to gamma1

double residual_tolerance(const CavityConfig& config, const FieldState& state, double tol);

// Empty fundamental, signal = kick * sqrt(n_thr), idler a quarter turn ahead
// so the seed overlaps the amplified quadrature for any pump phase.
FieldState kicked_seed(const CavityConfig& config, double kick);

// Time-march from a deterministic kicked seed, then bordered Newton with the
// neutral phase direction deflated.
SteadyStateReport find_steady_state(const CavityConfig& config, const PumpDrive& drive,
                                    const SteadyStateOptions& options = {});

// Closed-form branches; zero detunings only.
SteadyStateReport steady_state_analytic(const CavityConfig& config, const PumpDrive& drive);

// Trivial-branch fundamental amplitude for arbitrary fundamental detuning.
cplx trivial_branch_alpha1(const CavityConfig& config, const PumpDrive& drive);

// Largest real part of the signal/idler fluctuation eigenvalues about the
// trivial branch with fundamental amplitude alpha1.
double trivial_branch_growth_rate(const CavityConfig& config, cplx alpha1);

// Relative photon-flux balance error; throws DomainError when the report is
// not a steady state to within its own tolerance.
double conservation_audit(const SteadyStateReport& report, const CavityConfig& config,
                          const PumpDrive& drive, double tol = 1e-6);

}  // namespace chi2cav
