#include "chi2cav/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chi2cav/errors.hpp"
#include "chi2cav/ode.hpp"
#include "chi2cav/thresholds.hpp"

namespace chi2cav {

namespace {

constexpr cplx I{0.0, 1.0};

double max_component(const FieldState& s) {
    return std::max({std::abs(s.alpha1), std::abs(s.alpha_s), std::abs(s.alpha_i)});
}

// 2x2 real block of d f / d(x, y) for f holomorphic-plus-antiholomorphic in z:
// P = df/dz, Q = df/dconj(z).
void put_block(RealJacobian& j, int row, int col, cplx p, cplx q) {
    const cplx dx = p + q;
    const cplx dy = I * (p - q);
    j(row, col) = dx.real();
    j(row, col + 1) = dy.real();
    j(row + 1, col) = dx.imag();
    j(row + 1, col + 1) = dy.imag();
}

// d(phase_generator)/dx, constant.
RealJacobian phase_generator_matrix() {
    RealJacobian m = RealJacobian::Zero();
    m(2, 3) = -1.0;
    m(3, 2) = 1.0;
    m(4, 5) = 1.0;
    m(5, 4) = -1.0;
    return m;
}

FieldState co_rotating_rhs(const FieldState& s, const CavityConfig& config, const PumpDrive& drive,
                           double drift) {
    return from_real(to_real(rhs(s, config, drive)) - drift * phase_generator(s));
}

// Residual after removing the component along the phase generator, together
// with the drift rate that removes it.
std::pair<double, double> projected_residual(const FieldState& s, const CavityConfig& config,
                                             const PumpDrive& drive) {
    const RealState f = to_real(rhs(s, config, drive));
    const RealState v = phase_generator(s);
    const double vv = v.squaredNorm();
    const double drift = vv > 0.0 ? f.dot(v) / vv : 0.0;
    return {max_component(from_real(f - drift * v)), drift};
}

double product_dead_band(const CavityConfig& config) {
    return branch_dead_band * threshold_photon_number(config);
}

struct NewtonResult {
    RealState x = RealState::Zero();
    double drift = 0.0;
    double residual = 0.0;
    bool converged = false;
};

NewtonResult newton_refine(const RealState& x0, double drift0, bool deflate, const CavityConfig& config,
                           const PumpDrive& drive, double tol) {
    const RealJacobian vm = phase_generator_matrix();
    NewtonResult out{x0, deflate ? drift0 : 0.0, 0.0, false};

    auto residual_vec = [&](const RealState& x, double drift) {
        RealState g = to_real(rhs(from_real(x), config, drive));
        if (deflate) g -= drift * phase_generator(from_real(x));
        return g;
    };

    RealState g = residual_vec(out.x, out.drift);
    for (int iter = 0; iter < 60; ++iter) {
        const FieldState s = from_real(out.x);
        out.residual = max_component(from_real(g));
        if (!std::isfinite(out.residual)) return out;
        if (out.residual <= residual_tolerance(config, s, tol)) {
            out.converged = true;
            return out;
        }

        RealState dx;
        double ddrift = 0.0;
        const RealJacobian j = jacobian(s, config, drive);
        if (deflate) {
            const RealState v = phase_generator(s);
            const double vn = v.norm();
            if (vn == 0.0) return out;
            Eigen::Matrix<double, 7, 7> m = Eigen::Matrix<double, 7, 7>::Zero();
            m.topLeftCorner<6, 6>() = j - out.drift * vm;
            m.topRightCorner<6, 1>() = -v / vn;
            m.bottomLeftCorner<1, 6>() = (v / vn).transpose();
            Eigen::Matrix<double, 7, 1> b = Eigen::Matrix<double, 7, 1>::Zero();
            b.head<6>() = -g;
            Eigen::FullPivLU<Eigen::Matrix<double, 7, 7>> lu(m);
            if (!lu.isInvertible()) return out;
            const Eigen::Matrix<double, 7, 1> sol = lu.solve(b);
            dx = sol.head<6>();
            ddrift = sol(6) / vn;
        } else {
            Eigen::FullPivLU<RealJacobian> lu(j);
            if (!lu.isInvertible()) return out;
            dx = lu.solve(RealState(-g));
        }

        // damped step on the 2-norm of the residual
        const double g0 = g.norm();
        double lambda = 1.0;
        RealState x_try;
        RealState g_try;
        double d_try = out.drift;
        for (int half = 0; half < 30; ++half) {
            x_try = out.x + lambda * dx;
            d_try = out.drift + lambda * ddrift;
            g_try = residual_vec(x_try, d_try);
            if (g_try.allFinite() && g_try.norm() < g0) break;
            lambda *= 0.5;
        }
        if (!g_try.allFinite()) return out;
        if (!(g_try.norm() < g0)) {
            // Stagnated at roundoff level; accept a final tolerance check.
            out.residual = max_component(from_real(g));
            out.converged = out.residual <= residual_tolerance(config, s, tol);
            return out;
        }
        out.x = x_try;
        out.drift = d_try;
        g = g_try;
    }
    out.residual = max_component(from_real(g));
    out.converged = out.residual <= residual_tolerance(config, from_real(out.x), tol);
    return out;
}

SteadyStateReport finish_report(const FieldState& state, Branch branch, double drift,
                                const CavityConfig& config, const PumpDrive& drive) {
    SteadyStateReport rep;
    rep.state = state;
    rep.branch = branch;
    rep.phase_drift = drift;
    rep.residual = max_component(co_rotating_rhs(state, config, drive, drift));

    const RealJacobian j = jacobian(state, config, drive) - drift * phase_generator_matrix();
    Eigen::EigenSolver<RealJacobian> es(j, false);
    const auto eig = es.eigenvalues();
    std::vector<double> re;
    re.reserve(6);
    int neutral = -1;
    if (branch == Branch::ndopo) {
        double smallest = std::numeric_limits<double>::infinity();
        for (int k = 0; k < eig.size(); ++k) {
            if (std::abs(eig[k]) < smallest) {
                smallest = std::abs(eig[k]);
                neutral = k;
            }
        }
        rep.neutral_eigenvalue = eig[neutral].real();
    }
    double max_re = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < eig.size(); ++k)
        if (k != neutral) max_re = std::max(max_re, eig[k].real());
    rep.max_re_eigenvalue = max_re;

    const double margin = stability_margin * config.fundamental.gamma_total;
    if (max_re < -margin)
        rep.stability = Stability::stable;
    else if (max_re > margin)
        rep.stability = Stability::unstable;
    else
        rep.stability = Stability::marginal;
    rep.stable = rep.stability == Stability::stable;

    rep.fluxes = output_fluxes(state, config, drive);
    const auto& f = rep.fluxes;
    const double balance = f.fundamental_out_flux + f.internal_loss_flux + 2.0 * f.sh_flux + f.signal_flux +
                           f.idler_flux;
    rep.conservation_residual =
        f.input_flux > 0.0 ? std::abs(f.input_flux - balance) / f.input_flux : std::abs(balance);
    return rep;
}

}  // namespace

RealState to_real(const FieldState& s) {
    RealState x;
    x << s.alpha1.real(), s.alpha1.imag(), s.alpha_s.real(), s.alpha_s.imag(), s.alpha_i.real(),
        s.alpha_i.imag();
    return x;
}

FieldState from_real(const RealState& x) { return {{x(0), x(1)}, {x(2), x(3)}, {x(4), x(5)}}; }

bool is_finite(const FieldState& s) { return to_real(s).allFinite(); }

FieldState rhs(const FieldState& st, const CavityConfig& c, const PumpDrive& drive) {
    const double k = std::sqrt(c.mu1 * c.mu2);
    const cplx a1 = st.alpha1, as = st.alpha_s, ai = st.alpha_i;
    const cplx g1(c.fundamental.gamma_total, c.fundamental.detuning);
    const cplx gs(c.signal.gamma_total, c.signal.detuning);
    const cplx gi(c.idler.gamma_total, c.idler.detuning);
    const cplx a1sq = a1 * a1;

    FieldState d;
    d.alpha1 = -g1 * a1 - 2.0 * k * std::conj(a1) * as * ai - c.mu1 * std::norm(a1) * a1 +
               std::sqrt(2.0 * c.fundamental.gamma_coupling) * drive.amplitude;
    d.alpha_s = -gs * as - k * a1sq * std::conj(ai) - 2.0 * c.mu2 * std::norm(ai) * as;
    d.alpha_i = -gi * ai - k * a1sq * std::conj(as) - 2.0 * c.mu2 * std::norm(as) * ai;
    return d;
}

RealJacobian jacobian(const FieldState& st, const CavityConfig& c, const PumpDrive&) {
    const double k = std::sqrt(c.mu1 * c.mu2);
    const cplx a1 = st.alpha1, as = st.alpha_s, ai = st.alpha_i;
    const cplx g1(c.fundamental.gamma_total, c.fundamental.detuning);
    const cplx gs(c.signal.gamma_total, c.signal.detuning);
    const cplx gi(c.idler.gamma_total, c.idler.detuning);
    const cplx a1sq = a1 * a1;

    RealJacobian j;
    put_block(j, 0, 0, -g1 - 2.0 * c.mu1 * std::norm(a1), -2.0 * k * as * ai - c.mu1 * a1sq);
    put_block(j, 0, 2, -2.0 * k * std::conj(a1) * ai, 0.0);
    put_block(j, 0, 4, -2.0 * k * std::conj(a1) * as, 0.0);

    put_block(j, 2, 0, -2.0 * k * a1 * std::conj(ai), 0.0);
    put_block(j, 2, 2, -gs - 2.0 * c.mu2 * std::norm(ai), 0.0);
    put_block(j, 2, 4, -2.0 * c.mu2 * std::conj(ai) * as, -k * a1sq - 2.0 * c.mu2 * ai * as);

    put_block(j, 4, 0, -2.0 * k * a1 * std::conj(as), 0.0);
    put_block(j, 4, 2, -2.0 * c.mu2 * std::conj(as) * ai, -k * a1sq - 2.0 * c.mu2 * as * ai);
    put_block(j, 4, 4, -gi - 2.0 * c.mu2 * std::norm(as), 0.0);
    return j;
}

RealState phase_generator(const FieldState& s) {
    RealState v;
    v << 0.0, 0.0, -s.alpha_s.imag(), s.alpha_s.real(), s.alpha_i.imag(), -s.alpha_i.real();
    return v;
}

FieldState rotate_phase(const FieldState& s, double phi) {
    return {s.alpha1, s.alpha_s * std::polar(1.0, phi), s.alpha_i * std::polar(1.0, -phi)};
}

double sh_output_flux(const FieldState& s, const CavityConfig& c) {
    const cplx b = std::sqrt(c.mu1) * s.alpha1 * s.alpha1 + 2.0 * std::sqrt(c.mu2) * s.alpha_s * s.alpha_i;
    return std::norm(b);
}

Trajectory integrate(const FieldState& state0, const CavityConfig& config, const PumpDrive& drive,
                     double t_end, const IntegrateOptions& options) {
    if (!(t_end > 0.0)) throw DomainError("t_end must be > 0");
    if (!(options.tol >= 1e-12 && options.tol <= 1e-3)) throw DomainError("tol must lie in [1e-12, 1e-3]");
    if (!is_finite(state0)) throw DomainError("initial state must be finite");

    ode::StepControl ctrl;
    ctrl.rtol = options.tol;
    ctrl.atol = options.tol * std::sqrt(threshold_photon_number(config));
    ctrl.max_steps = options.max_steps;

    Trajectory traj;
    std::size_t seen = 0;
    RealState y = to_real(state0);
    auto f = [&](const RealState& x) { return to_real(rhs(from_real(x), config, drive)); };
    const std::size_t stride = std::max<std::size_t>(1, options.record_stride);
    auto observer = [&](double t, const RealState& x) {
        if (seen++ % stride == 0 || t >= t_end) {
            traj.times.push_back(t);
            traj.states.push_back(from_real(x));
        }
        return true;
    };
    const ode::Outcome out = ode::dopri5<6>(f, y, 0.0, t_end, ctrl, observer);
    traj.step_stats = {out.accepted, out.rejected, out.last_step};
    if (traj.times.back() != out.t) {
        traj.times.push_back(out.t);
        traj.states.push_back(from_real(y));
    }
    switch (out.status) {
        case ode::Status::success:
            return traj;
        case ode::Status::step_underflow:
            throw NonConvergence("integrate: step size underflow", std::move(traj));
        case ode::Status::step_limit:
            throw NonConvergence("integrate: step limit reached", std::move(traj));
        case ode::Status::non_finite:
            throw NonConvergence("integrate: state became non-finite", std::move(traj));
    }
    return traj;
}

Trajectory integrate(const FieldState& state0, const CavityConfig& config, const PumpDrive& drive,
                     double t_end, double tol) {
    IntegrateOptions opts;
    opts.tol = tol;
    return integrate(state0, config, drive, t_end, opts);
}

const char* to_string(Branch b) { return b == Branch::trivial ? "trivial" : "ndopo"; }

const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::marginal: return "marginal";
        case Stability::unstable: return "unstable";
    }
    return "?";
}

OutputFluxes output_fluxes(const FieldState& s, const CavityConfig& c, const PumpDrive& drive) {
    OutputFluxes f;
    const double a = drive.amplitude;
    const double g1 = c.fundamental.gamma_total, g1c = c.fundamental.gamma_coupling;
    f.sh_flux = sh_output_flux(s, c);
    f.fundamental_out_flux = std::norm(std::sqrt(2.0 * g1c) * s.alpha1 - a);
    f.internal_loss_flux = 2.0 * (g1 - g1c) * std::norm(s.alpha1);
    f.signal_flux = 2.0 * c.signal.gamma_total * std::norm(s.alpha_s);
    f.idler_flux = 2.0 * c.idler.gamma_total * std::norm(s.alpha_i);
    f.input_flux = a * a;
    return f;
}

double residual_tolerance(const CavityConfig& config, const FieldState& state, double tol) {
    return tol * config.fundamental.gamma_total * std::max(1.0, std::abs(state.alpha1));
}

cplx trivial_branch_alpha1(const CavityConfig& c, const PumpDrive& drive) {
    const double d = std::sqrt(2.0 * c.fundamental.gamma_coupling) * drive.amplitude;
    if (d == 0.0) return 0.0;
    const double g1 = c.fundamental.gamma_total, det = c.fundamental.detuning, mu = c.mu1;
    // n ((g1 + mu n)^2 + det^2) = d^2 is convex and increasing in n >= 0; Newton
    // from an upper bound descends monotonically onto the root.
    const double d2 = d * d;
    auto lhs = [&](double n) { return n * ((g1 + mu * n) * (g1 + mu * n) + det * det); };
    auto dlhs = [&](double n) { return (g1 + mu * n) * (g1 + mu * n) + det * det + 2.0 * mu * n * (g1 + mu * n); };
    double n = std::min(d2 / (g1 * g1 + det * det), std::cbrt(d2 / (mu * mu)));
    for (int it = 0; it < 200; ++it) {
        const double step = (lhs(n) - d2) / dlhs(n);
        const double next = n - step;
        if (!(next > 0.0)) break;
        const bool done = std::abs(step) <= 1e-16 * n;
        n = next;
        if (done) break;
    }
    return d / cplx(g1 + mu * n, det);
}

double trivial_branch_growth_rate(const CavityConfig& c, cplx alpha1) {
    const cplx gs(c.signal.gamma_total, c.signal.detuning);
    const cplx gi_conj(c.idler.gamma_total, -c.idler.detuning);
    const double n = std::norm(alpha1);
    const cplx half_diff = 0.5 * (gs - gi_conj);
    const cplx root = std::sqrt(half_diff * half_diff + c.mu1 * c.mu2 * n * n);
    const cplx mean = -0.5 * (gs + gi_conj);
    return std::max((mean + root).real(), (mean - root).real());
}

SteadyStateReport steady_state_analytic(const CavityConfig& config, const PumpDrive& drive) {
    validate(config);
    if (!has_zero_detunings(config))
        throw UnsupportedRegime("steady_state_analytic: nonzero detunings, use find_steady_state");

    const double gbar = gamma_bar(config);
    const double k = std::sqrt(config.mu1 * config.mu2);
    const double x_below = below_threshold_alpha1(config, drive.power);
    if (k * x_below * x_below <= gbar)
        return finish_report({x_below, 0.0, 0.0}, Branch::trivial, 0.0, config, drive);

    const double d = std::sqrt(2.0 * config.fundamental.gamma_coupling) * drive.amplitude;
    const double a1 = d / (config.fundamental.gamma_total + coupling_ratio(config) * gbar);
    const double sq_mu2 = std::sqrt(config.mu2);
    const double p = -(std::sqrt(config.mu1) * a1 * a1 - gbar / sq_mu2) / (2.0 * sq_mu2);
    const double ratio = std::pow(config.idler.gamma_total / config.signal.gamma_total, 0.25);
    const double mag = std::sqrt(std::abs(p));
    const FieldState s{a1, I * ratio * mag, I * mag / ratio};
    return finish_report(s, Branch::ndopo, 0.0, config, drive);
}

FieldState kicked_seed(const CavityConfig& config, double kick) {
    const double seed = kick * std::sqrt(threshold_photon_number(config));
    return {0.0, seed, cplx(0.0, seed)};
}

SteadyStateReport find_steady_state(const CavityConfig& config, const PumpDrive& drive,
                                    const SteadyStateOptions& options) {
    validate(config);
    if (!(options.kick > 0.0)) throw DomainError("kick must be > 0");
    const double tol = options.tol;

    const double scale = std::sqrt(threshold_photon_number(config));
    RealState x = to_real(kicked_seed(config, options.kick));

    const double slowest =
        std::min({config.fundamental.gamma_total, config.signal.gamma_total, config.idler.gamma_total});
    const double chunk = 20.0 / slowest;
    constexpr int max_chunks = 3000;
    constexpr double settle = 1e-5;

    ode::StepControl ctrl;
    ctrl.rtol = 1e-9;
    ctrl.atol = 1e-9 * scale;
    auto f = [&](const RealState& y) { return to_real(rhs(from_real(y), config, drive)); };
    auto no_observer = [](double, const RealState&) { return true; };

    const double dead_band = product_dead_band(config);
    const cplx trivial_a1 = trivial_branch_alpha1(config, drive);
    const bool trivial_unstable =
        trivial_branch_growth_rate(config, trivial_a1) > stability_margin * config.fundamental.gamma_total;
    NewtonResult newton;
    bool converged = false;
    for (int c = 0; c < max_chunks && !converged; ++c) {
        const ode::Outcome out = ode::dopri5<6>(f, x, 0.0, chunk, ctrl, no_observer);
        if (out.status != ode::Status::success)
            throw NonConvergence("find_steady_state: time march failed");
        ctrl.initial_step = out.last_step;
        const FieldState s = from_real(x);
        const auto [res, drift] = projected_residual(s, config, drive);
        if (res > settle * config.fundamental.gamma_total * std::max(1.0, std::abs(s.alpha1))) continue;
        const bool deflate = std::abs(s.alpha_s * s.alpha_i) > dead_band;
        // near threshold the march lingers by the unstable trivial state; keep going until the pair grows
        if (!deflate && trivial_unstable) continue;
        newton = newton_refine(x, drift, deflate, config, drive, tol);
        const FieldState landed = from_real(newton.x);
        converged = newton.converged && !(trivial_unstable && std::abs(landed.alpha_s * landed.alpha_i) <= dead_band);
    }
    if (!converged) {
        // limit cycle or very slow approach: last attempt from wherever the march ended
        const FieldState s = from_real(x);
        const bool deflate = std::abs(s.alpha_s * s.alpha_i) > dead_band;
        newton = newton_refine(x, projected_residual(s, config, drive).second, deflate, config, drive, tol);
        if (!newton.converged) throw NonConvergence("find_steady_state: Newton refinement did not converge");
    }

    FieldState s = from_real(newton.x);
    if (std::abs(s.alpha_s * s.alpha_i) <= dead_band) {
        if (trivial_unstable)
            throw AmbiguousBranch("find_steady_state: signal/idler within dead-band of zero but trivial branch unstable");
        return finish_report({trivial_a1, 0.0, 0.0}, Branch::trivial, 0.0, config, drive);
    }
    const double phi = -0.5 * (std::arg(s.alpha_s) - std::arg(s.alpha_i));
    s = rotate_phase(s, phi);
    SteadyStateReport rep = finish_report(s, Branch::ndopo, newton.drift, config, drive);
    if (rep.residual > residual_tolerance(config, s, tol)) {
        // the gauge rotation is exact in theory; polish once more if roundoff crept in
        NewtonResult again = newton_refine(to_real(s), newton.drift, true, config, drive, tol);
        if (again.converged) rep = finish_report(from_real(again.x), Branch::ndopo, again.drift, config, drive);
    }
    return rep;
}

double conservation_audit(const SteadyStateReport& report, const CavityConfig& config, const PumpDrive& drive,
                          double tol) {
    if (report.residual > residual_tolerance(config, report.state, tol))
        throw DomainError("conservation_audit: state is not stationary");
    const OutputFluxes f = output_fluxes(report.state, config, drive);
    const double balance =
        f.fundamental_out_flux + f.internal_loss_flux + 2.0 * f.sh_flux + f.signal_flux + f.idler_flux;
    return f.input_flux > 0.0 ? std::abs(f.input_flux - balance) / f.input_flux : std::abs(balance);
}

}  // namespace chi2cav
