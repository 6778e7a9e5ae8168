#include <doctest.h>

#include <cmath>
#include <string>

#include "xxz/model.hpp"
#include "xxz/scaling.hpp"

using namespace xxz;

TEST_CASE("grids") {
    const auto l = linspace(0.0, 1.0, 5);
    CHECK(l == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    const auto g = geomspace(1e-2, 1.0, 3);
    CHECK(g.front() == 1e-2);
    CHECK(g[1] == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(g.back() == 1.0);
    CHECK_THROWS_AS(linspace(0, 1, 1), ValidationError);
    CHECK_THROWS_AS(geomspace(0, 1, 3), ValidationError);
}

TEST_CASE("finite-difference susceptibility") {
    // [TRIVIAL] central differences are exact for quadratics
    const MagnetizationFn quad = [](int N, double x) { return N * x * x; };
    const std::vector<double> om{0.5, 1.0, 1.5};
    const auto chi = susceptibility(quad, 3, om, 1e-3);
    for (std::size_t i = 0; i < om.size(); ++i) CHECK(chi[i] == doctest::Approx(6.0 * om[i]).epsilon(1e-9));
}

TEST_CASE("susceptibility crossing") {
    // [DERIVED] lines through a common point cross exactly there
    const std::vector<int> sizes{100, 200, 400};
    const auto om = linspace(0.9, 1.1, 21);
    const double x0 = 1.0123;
    std::vector<std::vector<double>> chi;
    for (int n : sizes) {
        std::vector<double> c;
        for (double x : om) c.push_back(2.0 + 0.01 * n * (x0 - x));
        chi.push_back(c);
    }
    const CrossingEstimate est = susceptibility_crossing(sizes, om, chi);
    CHECK(est.pair_estimates.size() == 2);
    CHECK(est.omega_c == doctest::Approx(x0).epsilon(1e-12));
    CHECK(est.spread <= 1e-12);

    SUBCASE("two sizes are rejected") {
        const std::vector<int> two{100, 200};
        CHECK_THROWS_AS(susceptibility_crossing(two, om, {chi[0], chi[1]}), ValidationError);
    }
    SUBCASE("no crossing is a numerical failure with diagnostics") {
        std::vector<std::vector<double>> flat;
        for (int n : sizes) flat.push_back(std::vector<double>(om.size(), 1.0 * n));
        try {
            (void)susceptibility_crossing(sizes, om, flat);
            FAIL("expected NumericalError");
        } catch (const NumericalError& e) {
            CHECK(std::string(e.what()).find("no bracketed sign change") != std::string::npos);
        }
    }
}

TEST_CASE("collapse recovers planted exponents") {
    // [DERIVED] synthetic data |m| = N^-a M(delta N^b)
    const double a = 0.55;
    const double b = 0.75;
    CollapseData d;
    d.sizes = {100, 200, 400};
    d.delta = linspace(0.0, 0.05, 41);
    for (int n : d.sizes) {
        std::vector<double> row;
        for (double dl : d.delta) {
            const double x = dl * std::pow(n, b);
            row.push_back(std::pow(n, -a) * (0.3 + x) / (1.0 + 0.2 * x));
        }
        d.abs_m.push_back(row);
    }
    CHECK(collapse_objective(d, a, b) <= 1e-8);  // cubic interpolation error only
    CHECK(collapse_objective(d, a + 0.05, b) > 1e-4);
    const CollapseFit fit = fit_collapse(d, {}, true);
    CHECK(std::abs(fit.a - a) <= 1e-3);
    CHECK(std::abs(fit.b - b) <= 1e-3);
    CHECK(fit.beta == doctest::Approx(fit.a / fit.b));
    CHECK(fit.a_err <= 5e-3);
    CHECK(fit.b_err <= 5e-3);

    SUBCASE("preconditions") {
        CollapseData two = d;
        two.sizes.pop_back();
        two.abs_m.pop_back();
        CHECK_THROWS_AS(fit_collapse(two), ValidationError);
        CollapseData unsorted = d;
        std::swap(unsorted.delta[1], unsorted.delta[2]);
        CHECK_THROWS_AS(fit_collapse(unsorted), ValidationError);
    }
}

TEST_CASE("power-law and linear fits") {
    // [TRIVIAL] exact data
    const auto x = geomspace(0.01, 1.0, 20);
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 1.7));
    const PowerLawFit f = power_law_fit(x, y, 0.02, 0.5);
    CHECK(f.exponent == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(std::exp(f.log_prefactor) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.points > 3);
    CHECK_THROWS_AS(power_law_fit(x, y, 0.5, 0.6), ValidationError);

    const std::vector<double> lx{0, 1, 2, 3};
    const std::vector<double> ly{1, 3, 5, 8};
    const LinearFit l = linear_fit(lx, ly);
    CHECK(l.slope == doctest::Approx(2.3));
    CHECK(l.intercept == doctest::Approx(0.8));
    CHECK(l.rss == doctest::Approx(0.3));
}

TEST_CASE("peak detection") {
    // [DERIVED] Gaussian FWHM = 2 sqrt(2 ln 2) sigma
    const auto x = linspace(-1.0, 1.0, 2001);
    const double sigma = 0.05;
    std::vector<double> y;
    for (double v : x) y.push_back(0.2 + std::exp(-0.5 * std::pow((v - 0.1) / sigma, 2)));
    const auto peaks = local_maxima(y);
    REQUIRE(peaks.size() == 1);
    CHECK(x[peaks[0]] == doctest::Approx(0.1).epsilon(1e-12));
    const PeakWidth w = peak_fwhm(x, y, 0.0);
    CHECK(w.center == doctest::Approx(0.1));
    CHECK(std::abs(w.fwhm - 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma) <= 1e-4);
    CHECK(w.baseline == doctest::Approx(0.2).epsilon(1e-6));

    const std::vector<double> ramp{0.0, 1.0, 2.0, 3.0};
    CHECK(local_maxima(ramp).empty());
    CHECK_THROWS_AS(peak_fwhm(linspace(0, 1, 4), ramp, 0.5), NumericalError);
}

TEST_CASE("critical fit requires three sizes") {
    // [TRIVIAL] precondition
    CriticalFitSettings s;
    s.sizes = {100, 200};
    s.omega_c_ref = 1.0;
    const MagnetizationFn m = [](int, double) { return 0.0; };
    CHECK_THROWS_AS(fit_critical(m, s), ValidationError);
}
