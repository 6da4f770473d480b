#include "doctest.h"

#include <cmath>
#include <random>

#include "chi2cav/errors.hpp"
#include "chi2cav/spectra.hpp"
#include "chi2cav/thresholds.hpp"

using namespace chi2cav;

namespace {

const CavityConfig ref = reference_config();

SpectrumParams eq4_params(double gamma_nl, double v1_in = 1.0) { return spectrum_params(ref, 0.0, gamma_nl, v1_in); }

std::vector<double> linear_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int k = 0; k < n; ++k) g.push_back(lo + (hi - lo) * k / (n - 1));
    return g;
}

// minimiser of the symmetric spectrum over omega_hat^2 = w: w^2 - 2(N-1)w - ... reduces for N = 3 to
// w^2 - 4w - 68 = 0
const double n3_w = 2.0 + std::sqrt(72.0);

}  // namespace

TEST_CASE("spectrum params") {
    const SpectrumParams p = spectrum_params(make_config(1e7, 0.8e7, 4e7, 1e7, 1.0, 4.0, 2.8e14), 2.0, 3e6, 1.5);
    CHECK(p.gamma_bar == doctest::Approx(2e7));
    CHECK(p.r == 0.5);
    CHECK(p.gamma_f == p.gamma1 + p.r * p.gamma_bar);
    CHECK(p.gamma1_c == 0.8e7);
    CHECK_THROWS_AS(spectrum_params(ref, 1.0, -1.0), DomainError);
    CHECK_THROWS_AS(spectrum_params(ref, 1.0, 1.0, -0.1), DomainError);
}

TEST_CASE("no-competition spectrum") {
    for (double w : {0.0, 1e6, 1e9}) CHECK(v2_no_competition(w, eq4_params(0.0)) == 1.0);
    const double v = v2_no_competition(0.0, eq4_params(1e10));
    // 1 - 8e6 / (3001)^2
    CHECK(v == doctest::Approx(1.0 - 8e6 / (3001.0 * 3001.0)).epsilon(1e-14));
    CHECK(v == doctest::Approx(0.1118).epsilon(1e-3));
    CHECK(std::abs(v - 1.0 / 9.0) < 1e-3);
    CHECK(std::abs(to_db(v) - to_db(1.0 / 9.0)) < 0.05);
    CHECK(to_db(1.0 / 9.0) == doctest::Approx(-9.54).epsilon(1e-3));
    CHECK(v2_no_competition(0.0, eq4_params(1e7)) == 0.5);

    SUBCASE("bounded by 1/9 and shot noise for a quiet pump") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> dec(-4.0, 4.0);
        for (int k = 0; k < 2000; ++k) {
            const double g = 1e7 * std::pow(10.0, dec(rng));
            const double w = 1e7 * std::pow(10.0, dec(rng));
            const double x = v2_no_competition(w, eq4_params(g));
            CHECK(x >= 1.0 / 9.0);
            CHECK(x < 1.0);
        }
    }
    SUBCASE("a noisy pump adds noise") {
        CHECK(v2_no_competition(0.0, eq4_params(1e7, 3.0)) > v2_no_competition(0.0, eq4_params(1e7, 1.0)));
    }
}

TEST_CASE("symmetric competing spectrum") {
    CHECK(v2_competition_symmetric(0.0, 1.0) == 0.5);
    CHECK(v2_competition_symmetric(1e-8, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(v2_competition_symmetric(0.0, 3.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(v2_competition_symmetric(0.0, 1.25) == doctest::Approx(9.0).epsilon(1e-14));
    CHECK(v2_competition_symmetric(0.0, 1.001) == doctest::Approx(2001.0).epsilon(1e-9));
    for (double n : {1.5, 3.0, 40.0}) CHECK(v2_competition_symmetric(std::sqrt(n - 1.0), n) == 1.0);
    CHECK(v2_competition_symmetric(1.0, 1.0) == doctest::Approx(1.0 - 2.0 / 5.0).epsilon(1e-15));
    CHECK_THROWS_AS(v2_competition_symmetric(1.0, 0.99), DomainError);

    SUBCASE("squeezing exactly outside omega_hat^2 = N - 1") {
        for (double n : {1.001, 1.25, 3.0, 7.0}) {
            for (double wh : linear_grid(1e-3, 10.0, 997)) {
                const double v = v2_competition_symmetric(wh, n);
                if (wh * wh > n - 1.0 + 1e-9) CHECK(v < 1.0);
                if (wh * wh < n - 1.0 - 1e-9) CHECK(v > 1.0);
            }
        }
    }
    SUBCASE("N = 3 minimum") {
        const double wh = std::sqrt(n3_w);
        CHECK(wh == doctest::Approx(3.238).epsilon(1e-3));
        CHECK(v2_competition_symmetric(wh, 3.0) == doctest::Approx(0.9622).epsilon(1e-3));
        for (double d : {-1e-3, 1e-3}) CHECK(v2_competition_symmetric(wh + d, 3.0) > v2_competition_symmetric(wh, 3.0));
    }
    SUBCASE("shot-noise pulling") {
        for (double wh : {0.5, 1.0, 3.0}) {
            const double big = 1e4;
            const double bound = 2.0 / (big * (4 * wh * wh + 1));
            CHECK(std::abs(v2_competition_symmetric(wh, big) - 1.0) == doctest::Approx(bound).epsilon(2e-3));
        }
        // |V - 1| falls monotonically once N is past the sign change at omega_hat^2 = N - 1
        // (for omega_hat = 3 the excess crosses zero at N = 10 and peaks near N = 19.9)
        for (auto [wh, n0] : {std::pair{0.5, 5.0}, std::pair{1.0, 5.0}, std::pair{3.0, 20.0}}) {
            double prev = std::abs(v2_competition_symmetric(wh, n0) - 1.0);
            for (double n = n0 * 1.01; n <= 1e4; n *= 1.01) {
                const double now = std::abs(v2_competition_symmetric(wh, n) - 1.0);
                CHECK(now < prev);
                prev = now;
            }
        }
    }
}

TEST_CASE("general competing spectrum") {
    SpectrumParams p = spectrum_params(ref, 3.0, 0.0);
    CHECK(v2_competition_general(0.0, p) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::abs(v2_competition_general(1e13, p) - 1.0) < 1e-6);
    p.n_scaled = 1.0;
    CHECK_THROWS_AS(v2_competition_general(0.0, p), DomainError);

    SUBCASE("zero-frequency agreement with the symmetric form") {
        for (double n = 1.01; n <= 10.0; n += 0.01) {
            p.n_scaled = n;
            CHECK(std::abs(v2_competition_general(0.0, p) - v2_competition_symmetric(0.0, n)) <= 1e-12 * (1 + 2 / (n - 1)));
        }
    }
    SUBCASE("comparison harness") {
        const auto grid = linear_grid(0.0, 20.0, 2001);
        for (double n : {1.0001, 1.5, 3.0, 10.0}) {
            const Eq5Comparison cmp = compare_eq5_eq6(n, grid);
            CHECK(cmp.gap_at_zero <= 1e-12 * (1 + 2 / (n - 1)));
            CHECK(cmp.worst_omega_hat > 0.0);
            // with gs = gi = g1 and r = 1 the general form reduces to the symmetric one term by term
            CHECK(cmp.max_relative_gap < 1e-12);
            CHECK(cmp.ratio_at_worst == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK_THROWS_AS(compare_eq5_eq6(1.0, grid), DomainError);
    }
}

TEST_CASE("nonlinear loss rate at the operating point") {
    const double p = threshold_power(ref);
    CHECK(gamma_nl_at(ref, pump_drive(p, ref.nu)) == doctest::Approx(1e7).epsilon(1e-10));
    CHECK(gamma_nl_at(ref, pump_drive(0.0, ref.nu)) == 0.0);
    CHECK(gamma_nl_at(ref, pump_drive(2 * p, ref.nu)) == doctest::Approx(2e7).epsilon(1e-12));
    CavityConfig det = ref;
    det.signal.detuning = det.idler.detuning = 2e6;
    const PumpDrive d = pump_drive(0.5 * p, det.nu);
    CHECK(gamma_nl_at(det, d) == doctest::Approx(std::norm(trivial_branch_alpha1(det, d))).epsilon(1e-9));
}

TEST_CASE("continuity between the two limits") {
    CHECK(continuity_check(ref) < 1e-12);
    CavityConfig scaled = make_config(3e8, 3e8, 3e8, 3e8, 0.2, 0.2, 5e14);
    CHECK(continuity_check(scaled) < 1e-12);
    CHECK_THROWS_AS(continuity_check(make_config(1e7, 1e7, 2e7, 1e7, 1, 1, 2.8e14)), UnsupportedRegime);
    CHECK_THROWS_AS(continuity_check(make_config(1e7, 0.9e7, 1e7, 1e7, 1, 1, 2.8e14)), UnsupportedRegime);
}

TEST_CASE("spectrum sweep") {
    SUBCASE("N = 3 minimum with refinement") {
        SpectrumParams p;
        p.n_scaled = 3.0;
        const SqueezingSpectrum s = spectrum_sweep(SpectrumModel::eq6, p, linear_grid(0.0, 10.0, 101));
        CHECK(s.minimum.omega == doctest::Approx(std::sqrt(n3_w)).epsilon(1e-6));
        CHECK(s.minimum.value == doctest::Approx(v2_competition_symmetric(std::sqrt(n3_w), 3.0)).epsilon(1e-12));
        CHECK(std::abs(s.minimum.value - 0.9622) < 1e-3);
        for (std::size_t k = 0; k < s.values.size(); ++k) {
            CHECK(s.values[k] > 0.0);
            CHECK(std::abs(s.db[k] - 10 * std::log10(s.values[k])) <= 1e-12 * std::max(1.0, std::abs(s.db[k])));
        }
    }
    SUBCASE("zero-frequency excess noise falls with N") {
        double prev = 1e300;
        for (double n : {1.001, 1.25, 3.0}) {
            SpectrumParams p;
            p.n_scaled = n;
            const SqueezingSpectrum s = spectrum_sweep(SpectrumModel::eq6, p, linear_grid(0.0, 5.0, 51));
            CHECK(s.values[0] == doctest::Approx(1 + 2 / (n - 1)).epsilon(1e-9));
            CHECK(s.values[0] < prev);
            prev = s.values[0];
        }
    }
    SUBCASE("eq4 minimum at zero frequency") {
        const SqueezingSpectrum s =
            spectrum_sweep(SpectrumModel::eq4, eq4_params(1e7), linear_grid(0.0, 2e8, 201));
        CHECK(s.minimum.omega == doctest::Approx(0.0));
        CHECK(s.minimum.value == 0.5);
        CHECK(s.model == SpectrumModel::eq4);
    }
    SpectrumParams p;
    p.n_scaled = 2.0;
    CHECK_THROWS_AS(spectrum_sweep(SpectrumModel::eq6, p, {1.0, 0.5}), DomainError);
    CHECK_THROWS_AS(spectrum_sweep(SpectrumModel::eq6, p, {}), DomainError);
    CHECK(parse_spectrum_model("eq5") == SpectrumModel::eq5);
    CHECK_FALSE(parse_spectrum_model("eq7"));
}
