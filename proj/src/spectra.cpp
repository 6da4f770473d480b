#include "chi2cav/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "chi2cav/errors.hpp"

namespace chi2cav {

namespace {

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

double golden_section_min(const std::function<double(double)>& f, double a, double b) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(std::abs(a), std::abs(b)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

double evaluate(SpectrumModel model, double omega, const SpectrumParams& p) {
    switch (model) {
        case SpectrumModel::eq4: return v2_no_competition(omega, p);
        case SpectrumModel::eq5: return v2_competition_general(omega, p);
        case SpectrumModel::eq6: return v2_competition_symmetric(omega, p.n_scaled);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

SpectrumParams spectrum_params(const CavityConfig& c, double n_scaled, double gamma_nl, double v1_in) {
    if (!(gamma_nl >= 0.0)) throw DomainError("gamma_nl must be >= 0");
    if (!(v1_in >= 0.0)) throw DomainError("v1_in must be >= 0");
    if (!(n_scaled >= 0.0)) throw DomainError("n_scaled must be >= 0");
    SpectrumParams p;
    p.gamma_nl = gamma_nl;
    p.gamma1 = c.fundamental.gamma_total;
    p.gamma1_c = c.fundamental.gamma_coupling;
    p.v1_in = v1_in;
    p.n_scaled = n_scaled;
    p.r = coupling_ratio(c);
    p.gamma_bar = gamma_bar(c);
    p.gamma_f = p.gamma1 + p.r * p.gamma_bar;
    return p;
}

double v2_no_competition(double omega, const SpectrumParams& p) {
    const double g = p.gamma_nl;
    const double num = 8.0 * g * g - 8.0 * g * p.gamma1_c * (p.v1_in - 1.0);
    const double a = 3.0 * g + p.gamma1;
    return 1.0 - num / (a * a + omega * omega);
}

double v2_competition_general(double omega, const SpectrumParams& p) {
    const double n = p.n_scaled;
    if (!(n > 1.0)) throw DomainError("competing spectrum requires N > 1");
    const double w2 = omega * omega;
    const double a = p.r * p.r * w2;
    const double b = p.gamma_f * p.gamma_f + w2;
    const double c = p.gamma1 / p.gamma_bar + p.r * (n + 1.0) + 2.0 * (n - 1.0);
    const double gf_term = p.gamma_f / (2.0 * p.gamma_bar);
    const double w2_term = w2 / (2.0 * p.gamma_bar);
    const double num = 2.0 * (n - 1.0) * b - 2.0 * n * a;
    const double den = (n - 1.0) * (n - 1.0) * b + w2 * gf_term * gf_term + c * n * a / p.r + w2_term * w2_term;
    return 1.0 + num / den;
}

double v2_competition_symmetric(double omega_hat, double n) {
    if (!(n >= 1.0)) throw DomainError("symmetric competing spectrum requires N >= 1");
    const double w2 = omega_hat * omega_hat;
    const double m = n - 1.0 - w2;
    const double den = 4.0 * n * n * w2 + m * m;
    if (den == 0.0) return 0.5;  // N = 1, omega_hat = 0: limit along omega_hat
    return 1.0 + 2.0 * m / den;
}

double gamma_nl_at(const CavityConfig& config, const PumpDrive& drive) {
    const SteadyStateReport rep =
        has_zero_detunings(config) ? steady_state_analytic(config, drive) : find_steady_state(config, drive);
    return gamma_nl_at(config, rep);
}

double gamma_nl_at(const CavityConfig& config, const SteadyStateReport& report) {
    return config.mu1 * std::norm(report.state.alpha1);
}

double continuity_check(const CavityConfig& c, int points) {
    const double g1 = c.fundamental.gamma_total;
    if (!(nearly_equal(c.signal.gamma_total, g1) && nearly_equal(c.idler.gamma_total, g1) &&
          nearly_equal(c.fundamental.gamma_coupling, g1) && nearly_equal(c.mu1, c.mu2)))
        throw UnsupportedRegime("continuity_check: requires gs = gi = g1 = g1c and mu1 = mu2");
    if (points < 2) throw DomainError("continuity_check: need at least two grid points");
    const SpectrumParams p = spectrum_params(c, 1.0, g1, 1.0);
    double worst = 0.0;
    for (int k = 0; k < points; ++k) {
        const double omega = g1 * std::pow(10.0, -3.0 + 6.0 * k / (points - 1));
        const double gap = std::abs(v2_no_competition(omega, p) - v2_competition_symmetric(omega / (2.0 * g1), 1.0));
        worst = std::max(worst, gap);
    }
    return worst;
}

const char* to_string(SpectrumModel m) {
    switch (m) {
        case SpectrumModel::eq4: return "eq4";
        case SpectrumModel::eq5: return "eq5";
        case SpectrumModel::eq6: return "eq6";
    }
    return "?";
}

std::optional<SpectrumModel> parse_spectrum_model(std::string_view s) {
    if (s == "eq4") return SpectrumModel::eq4;
    if (s == "eq5") return SpectrumModel::eq5;
    if (s == "eq6") return SpectrumModel::eq6;
    return std::nullopt;
}

double to_db(double v) { return 10.0 * std::log10(v); }

SqueezingSpectrum spectrum_sweep(SpectrumModel model, const SpectrumParams& params,
                                 const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("spectrum_sweep: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw DomainError("spectrum_sweep: grid must be strictly ascending");

    SqueezingSpectrum out;
    out.model = model;
    out.omegas = grid;
    out.values.reserve(grid.size());
    out.db.reserve(grid.size());
    for (double w : grid) {
        const double v = evaluate(model, w, params);
        if (!(v > 0.0)) throw DomainError("spectrum_sweep: non-positive noise power (unphysical parameters)");
        out.values.push_back(v);
        out.db.push_back(to_db(v));
    }

    const auto it = std::min_element(out.values.begin(), out.values.end());
    const std::size_t i = static_cast<std::size_t>(it - out.values.begin());
    out.minimum = {grid[i], *it};
    if (grid.size() >= 2) {
        const double a = grid[i == 0 ? 0 : i - 1];
        const double b = grid[std::min(i + 1, grid.size() - 1)];
        auto f = [&](double w) { return evaluate(model, w, params); };
        const double w = golden_section_min(f, a, b);
        const double v = f(w);
        if (v < out.minimum.value) out.minimum = {w, v};
    }
    return out;
}

Eq5Comparison compare_eq5_eq6(double n, const std::vector<double>& grid) {
    if (!(n > 1.0)) throw DomainError("compare_eq5_eq6: requires N > 1");
    // symmetric optimum in units where g1 = 1, so omega = 2 omega_hat
    SpectrumParams p;
    p.gamma_nl = 0.0;
    p.gamma1 = p.gamma1_c = p.gamma_bar = 1.0;
    p.r = 1.0;
    p.gamma_f = 2.0;
    p.v1_in = 1.0;
    p.n_scaled = n;

    Eq5Comparison cmp;
    cmp.gap_at_zero = std::abs(v2_competition_general(0.0, p) - v2_competition_symmetric(0.0, n));
    for (double wh : grid) {
        if (!(wh > 0.0)) continue;
        const double e5 = v2_competition_general(2.0 * wh, p);
        const double e6 = v2_competition_symmetric(wh, n);
        const double rel = std::abs(e5 - e6) / std::abs(e6);
        if (rel >= cmp.max_relative_gap) {
            cmp.max_relative_gap = rel;
            cmp.worst_omega_hat = wh;
            cmp.ratio_at_worst = e5 / e6;
        }
    }
    return cmp;
}

}  // namespace chi2cav
