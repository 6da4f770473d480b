#pragma once

// Adaptive Dormand-Prince 5(4) integrator for fixed-size Eigen vectors.
// First-same-as-last: the derivative at the end of an accepted step is reused
// as the first stage of the next one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include <Eigen/Dense>

namespace chi2cav::ode {

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-10;
    double initial_step = 0.0;  // 0: pick from the initial derivative
    double max_step = std::numeric_limits<double>::infinity();
    double min_step_fraction = 1e-14;  // underflow when h < fraction * max(|t|, span)
    std::size_t max_steps = 10'000'000;
};

enum class Status { success, step_underflow, step_limit, non_finite };

struct Outcome {
    Status status = Status::success;
    double t = 0.0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    double last_step = 0.0;
};

// Integrates dy/dt = rhs(y) (autonomous) from t0 to t1. observer(t, y) is
// called at t0 and after every accepted step; returning false stops early
// with Status::success.
template <int Dim, typename Rhs, typename Observer>
Outcome dopri5(Rhs&& rhs, Eigen::Matrix<double, Dim, 1>& y, double t0, double t1,
               const StepControl& ctrl, Observer&& observer) {
    using Vec = Eigen::Matrix<double, Dim, 1>;

    constexpr double a21 = 1.0 / 5.0;
    constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                     a54 = -212.0 / 729.0;
    constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                     a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                     b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    // fifth-order minus embedded fourth-order weights
    constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                     e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    Outcome out;
    out.t = t0;
    const double span = t1 - t0;
    if (!(span > 0.0)) return out;

    auto error_norm = [&](const Vec& err, const Vec& y0, const Vec& y1) {
        double worst = 0.0;
        for (int i = 0; i < y0.size(); ++i) {
            const double scale = ctrl.atol + ctrl.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            worst = std::max(worst, std::abs(err[i]) / scale);
        }
        return worst;
    };

    Vec k1 = rhs(y);
    double h = ctrl.initial_step;
    if (!(h > 0.0)) {
        double d0 = 0.0, d1 = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            const double scale = ctrl.atol + ctrl.rtol * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / scale);
            d1 = std::max(d1, std::abs(k1[i]) / scale);
        }
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    }
    h = std::min({h, ctrl.max_step, span});

    if (!observer(out.t, y)) return out;

    double t = t0;
    while (t < t1) {
        if (out.accepted + out.rejected >= ctrl.max_steps) {
            out.status = Status::step_limit;
            break;
        }
        if (h < ctrl.min_step_fraction * std::max(std::abs(t), span)) {
            out.status = Status::step_underflow;
            break;
        }
        const bool last = t + h >= t1;
        if (last) h = t1 - t;

        const Vec k2 = rhs(Vec(y + h * a21 * k1));
        const Vec k3 = rhs(Vec(y + h * (a31 * k1 + a32 * k2)));
        const Vec k4 = rhs(Vec(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
        const Vec k5 = rhs(Vec(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const Vec k6 = rhs(Vec(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        const Vec y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec k7 = rhs(y_new);
        const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double en = error_norm(err, y, y_new);
        if (!std::isfinite(en)) {
            ++out.rejected;
            h *= 0.1;
            continue;
        }
        if (en <= 1.0) {
            t = last ? t1 : t + h;
            y = y_new;
            k1 = k7;
            ++out.accepted;
            out.last_step = h;
            out.t = t;
            if (!y.allFinite()) {
                out.status = Status::non_finite;
                break;
            }
            if (!observer(t, y)) break;
            const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            h = std::min(h * factor, ctrl.max_step);
        } else {
            ++out.rejected;
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
        }
    }
    return out;
}

}  // namespace chi2cav::ode
