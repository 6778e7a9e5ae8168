#include <doctest.h>

#include <cmath>
#include <random>

#include "xxz/mps.hpp"
#include "xxz/observables.hpp"
#include "xxz/oracle.hpp"

using namespace xxz;
using cplx = std::complex<double>;

namespace {

ModelParams params(int N, double delta, double omega, double gamma = 1.0) {
    ModelParams p;
    p.N = N;
    p.Delta = delta;
    p.Omega = omega;
    p.gamma = gamma;
    return p;
}

double rel(cplx x, cplx y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); }

}  // namespace

TEST_CASE("recursion initial values") {
    const MpsCoefficients m = solve_coefficients(params(5, 0.2, 1.0));
    CHECK(m.a[0].value() == cplx(1.0, 0.0));
    // [PAPER] a_1 = Delta + i gamma / 2
    CHECK(m.a[1].value() == cplx(0.2, 0.5));
    // [TRIVIAL] one recursion step
    CHECK(std::abs(m.a[2].value() - cplx(-0.92, 0.2)) <= 1e-15);
    CHECK(m.bc[0].value() == cplx(0.0, 0.5));
    CHECK(m.alpha[0].value() == cplx(1.0, 0.0));
    for (int k = 0; k < m.N; ++k) CHECK(m.c[k].value() == cplx(1.0, 0.0));
}

TEST_CASE("a_k matches the trigonometric closed form") {
    // [DERIVED] cos(k eta) + (i gamma/2) sin(k eta)/sin(eta)
    for (double d : {-0.7, 0.2, 0.5}) {
        const double g = 0.8;
        const MpsCoefficients m = solve_coefficients(params(200, d, 1.0, g));
        const double eta = std::acos(d);
        for (int k = 0; k <= 200; ++k) {
            const cplx expect(std::cos(k * eta), 0.5 * g * std::sin(k * eta) / std::sin(eta));
            CHECK(std::abs(m.a[k].value() - expect) <= 1e-10 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST_CASE("recursion and closed form agree for k <= 500") {
    // [DERIVED] two independent code paths
    for (double d : {0.2, -0.45, 0.9}) {
        for (double g : {0.1, 1.0, 10.0}) {
            const ModelParams p = params(501, d, 1.3, g);
            const MpsCoefficients r = solve_coefficients(p);
            const MpsCoefficients a = analytic_coefficients(p);
            double worst = 0.0;
            for (int k = 0; k <= 500; ++k) {
                worst = std::max(worst, rel(r.a[k].value(), a.a[k].value()));
                worst = std::max(worst, rel(r.bc[k].value(), a.bc[k].value()));
            }
            CAPTURE(d);
            CAPTURE(g);
            CHECK(worst <= 1e-9);
        }
    }
}

TEST_CASE("closed-form split") {
    // [PAPER] b_0 c_0 = i gamma / 2
    const MpsCoefficients a = analytic_coefficients(params(10, 0.3, 1.0, 0.7));
    CHECK(std::abs(a.bc[0].value() - cplx(0.0, 0.35)) <= 1e-15);
    for (int k = 0; k < a.N; ++k) CHECK(rel((a.b[k] * a.c[k]).value(), a.bc[k].value()) <= 1e-12);
    // [TRIVIAL] eta = pi/2
    CHECK(std::abs(analytic_coefficients(params(4, 0.0, 1.0)).a[2].value() - cplx(-1.0, 0.0)) <= 1e-15);
    CHECK_THROWS_AS(analytic_coefficients(params(4, 1.2, 1.0)), ValidationError);
    CHECK_THROWS_AS(analytic_coefficients(params(4, 1.0, 1.0)), ValidationError);
}

TEST_CASE("special anisotropy zeroes the down hop exactly") {
    const MpsCoefficients a = analytic_coefficients(params(20, 0.5, 1.0, 0.3));
    for (int k = 0; k < a.N; ++k) {
        CAPTURE(k);
        CHECK(a.b[k].is_zero() == ((k + 1) % 3 == 0));
    }
}

TEST_CASE("chebyshev right vector") {
    // [TRIVIAL] T_k(1) = 1
    for (double t : chebyshev_alpha(0.8, 0.8, 10)) CHECK(t == doctest::Approx(1.0));
    // [TRIVIAL] T_2(0.5) = -0.5
    CHECK(chebyshev_alpha(2.0, 1.0, 5)[2] == doctest::Approx(-0.5));
    const auto w = weak_dissipation_alpha(2.0, 1.0, 5);
    const auto t = chebyshev_alpha(2.0, 1.0, 5);
    for (int k = 0; k <= 5; ++k) CHECK(w[k] == doctest::Approx(t[k] * t[k]));
    const auto wl = weak_dissipation_alpha(0.5, 1.0, 5);
    const auto tl = chebyshev_alpha(0.5, 1.0, 5);
    for (int k = 0; k <= 5; ++k) CHECK(wl[k] == doctest::Approx(tl[k] * tl[k]));
    CHECK_THROWS_AS(chebyshev_alpha(0.0, 1.0, 3), ValidationError);
}

TEST_CASE("weak-dissipation alpha tends to the chebyshev values") {
    // [DERIVED] gamma = 1e-6 limit, relative to max(1, |T_k|)
    const double wc = std::sqrt(1.0 - 0.04);
    for (double omega : {0.5, 1.5, 3.0}) {
        const MpsCoefficients m = analytic_coefficients(params(50, 0.2, omega, 1e-6));
        const auto t = chebyshev_alpha(omega, wc, 50);
        double worst = 0.0;
        for (int k = 0; k <= 50; ++k) {
            worst = std::max(worst, std::abs(m.alpha[k].value() - t[k]) / std::max(1.0, std::abs(t[k])));
        }
        CAPTURE(omega);
        CHECK(worst <= 1e-3);
    }
}

TEST_CASE("gauge transformations") {
    const MpsCoefficients m = solve_coefficients(params(20, 0.2, 1.1));
    SUBCASE("unit gauge is the identity") {
        // [TRIVIAL]
        const std::vector<double> ones(21, 1.0);
        const MpsCoefficients g = apply_gauge(m, ones);
        for (int k = 0; k < 20; ++k) {
            CHECK(g.b[k].value() == m.b[k].value());
            CHECK(g.c[k].value() == m.c[k].value());
        }
        for (int k = 0; k <= 20; ++k) CHECK(g.alpha[k].value() == m.alpha[k].value());
    }
    SUBCASE("random positive gauge keeps products and observables") {
        // [DERIVED] seeded property test, v_k in [0.5, 2]
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> u(0.5, 2.0);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> v(21);
            for (double& x : v) x = u(rng);
            const MpsCoefficients g = apply_gauge(m, v);
            for (int k = 0; k < 20; ++k) CHECK(rel((g.b[k] * g.c[k]).value(), (m.b[k] * m.c[k]).value()) <= 1e-14);
            CHECK(magnetization(g).magnetization ==
                  doctest::Approx(magnetization(m).magnetization).epsilon(1e-9));
        }
    }
    SUBCASE("invalid gauge") {
        std::vector<double> v(21, 1.0);
        v[3] = 0.0;
        CHECK_THROWS_AS(apply_gauge(m, v), ValidationError);
        CHECK_THROWS_AS(apply_gauge(m, std::vector<double>(5, 1.0)), ValidationError);
    }
}

TEST_CASE("zero drive and incoherent right vectors") {
    const MpsCoefficients z = solve_coefficients(params(4, 0.3, 0.0));
    CHECK(z.zero_drive);
    for (int k = 0; k < 4; ++k) CHECK(z.alpha[k].is_zero());
    CHECK(z.alpha[4].value() == cplx(1.0, 0.0));
    // [PAPER] right vector |0>
    const MpsCoefficients inc = solve_incoherent(params(4, 0.3, 0.0));
    CHECK(inc.incoherent);
    CHECK(inc.alpha[0].value() == cplx(1.0, 0.0));
    for (int k = 1; k <= 4; ++k) CHECK(inc.alpha[k].is_zero());
    ModelParams hot = params(4, 0.3, 1.0);
    hot.n_th = 0.1;
    CHECK_THROWS_AS(solve_coefficients(hot), ValidationError);
}

TEST_CASE("doubled state structure") {
    const int N = 4;
    const MpsCoefficients m = solve_coefficients(params(N, 0.2, 0.4));
    const DoubledState st = build_doubled_state(m);
    REQUIRE(st.amplitudes.size() == (1 << (2 * N)));

    // [TRIVIAL] all-triplet diagonal path a_0^N alpha_0 = 1; the component
    // with every dimer in (up, down) carries 2^{-N/2} of it.
    std::int64_t idx = 0;
    for (int s = 0; s < N; ++s) idx = (idx << 2) | 1;
    CHECK(std::abs(st.amplitudes[idx] * std::exp(st.log_scale) * std::pow(2.0, 0.5 * N) - 1.0) <= 1e-12);

    // Singlet components vanish: swapping (0,1) <-> (1,0) on any dimer
    // leaves the amplitude unchanged.
    for (std::int64_t i = 0; i < st.amplitudes.size(); ++i) {
        for (int s = 0; s < N; ++s) {
            const int shift = 2 * (N - 1 - s);
            const int code = static_cast<int>((i >> shift) & 3);
            if (code != 1) continue;
            const std::int64_t j = i ^ (std::int64_t{3} << shift);
            CHECK(st.amplitudes[i] == st.amplitudes[j]);
        }
    }
    CHECK_THROWS_AS(build_doubled_state(solve_coefficients(params(9, 0.2, 0.4))), CapacityError);
}

TEST_CASE("doubled state is dark") {
    // [PAPER] H_AB psi = 0 and L_AB psi = 0
    for (bool incoherent : {false, true}) {
        for (int N : {2, 4, 6}) {
            for (double d : {0.2, 0.5, 1.2}) {
                for (double w : {0.2, 1.0, 3.0}) {
                    const ModelParams p = params(N, d, incoherent ? 0.0 : w);
                    const MpsCoefficients m = incoherent ? solve_incoherent(p) : solve_coefficients(p);
                    const DoubledState st = build_doubled_state(m);
                    CAPTURE(incoherent);
                    CAPTURE(N);
                    CAPTURE(d);
                    CAPTURE(w);
                    CHECK(doubled_hamiltonian(p, incoherent).apply(st.amplitudes).norm() / st.norm <= 1e-10);
                    for (const auto& j : doubled_jumps(p, incoherent)) {
                        CHECK(j.apply(st.amplitudes).norm() / st.norm <= 1e-10);
                    }
                }
            }
        }
    }
}

TEST_CASE("cholesky factor structure") {
    for (double d : {0.2, 1.2}) {
        const MpsCoefficients m = solve_coefficients(params(5, d, 0.7));
        const CholeskyFactor f = build_cholesky(m);
        const auto n = f.psi.rows();
        for (Eigen::Index r = 0; r < n; ++r) {
            // [PAPER] unit diagonal
            CHECK(std::abs(f.psi(r, r) - 1.0) <= 1e-14);
            for (Eigen::Index c = r + 1; c < n; ++c) CHECK(f.psi(r, c) == cplx{});
        }
    }
    // [PAPER] full rank at N=4
    const Eigen::MatrixXcd rho = density_from_cholesky(build_cholesky(solve_coefficients(params(4, 0.3, 0.9))));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK(rho.trace().real() == doctest::Approx(1.0));
    CHECK_THROWS_AS(build_cholesky(solve_coefficients(params(11, 0.2, 0.4))), CapacityError);
}

TEST_CASE("cholesky state equals the oracle at N=4") {
    // [DERIVED]
    const ModelParams p = params(4, 0.2, 0.4);
    const SteadyState ss = steady_state(build_liouvillian(p, Variant::CoherentDrive));
    CHECK(trace_distance(density_from_cholesky(build_cholesky(solve_coefficients(p))), ss.rho) <= 1e-8);
}

TEST_CASE("coefficient table") {
    const std::string csv = coefficients_csv(solve_coefficients(params(3, 0.2, 1.0)));
    CHECK(csv.rfind("k,a_re,a_im,bc_re,bc_im,b_re,b_im,c_re,c_im,alpha_re,alpha_im\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(csv.find("\n0,1,0,0,0.5,") != std::string::npos);
}
