#include <doctest.h>

#include <cmath>
#include <random>

#include "xxz/mps.hpp"
#include "xxz/observables.hpp"
#include "xxz/oracle.hpp"

using namespace xxz;

namespace {

ModelParams params(int N, double delta, double omega, double gamma = 1.0) {
    ModelParams p;
    p.N = N;
    p.Delta = delta;
    p.Omega = omega;
    p.gamma = gamma;
    return p;
}

double expect(const Eigen::MatrixXcd& rho, const SpinOperator& op) { return (op.dense() * rho).trace().real(); }

}  // namespace

TEST_CASE("liouvillian is trace preserving for every variant") {
    ModelParams p = params(3, 0.3, 0.7);
    for (Variant v : {Variant::CoherentDrive, Variant::IncoherentPumpLoss, Variant::DoubledCoherent,
                      Variant::DoubledIncoherent}) {
        CAPTURE(to_string(v));
        CHECK(trace_preservation_residual(build_liouvillian(p, v)) <= 1e-12);
    }
    p.n_th = 0.1;
    CHECK(trace_preservation_residual(build_liouvillian(p, Variant::ThermalCoherent)) <= 1e-12);
}

TEST_CASE("liouvillian preserves hermiticity and has a hermitian hamiltonian") {
    const DenseLindblad l = build_liouvillian(params(3, 0.3, 0.7), Variant::CoherentDrive);
    CHECK((l.hamiltonian - l.hamiltonian.adjoint()).cwiseAbs().maxCoeff() <= 1e-14);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd r(l.dim, l.dim);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = {nd(rng), nd(rng)};
    const Eigen::MatrixXcd a = apply_liouvillian(l, r.adjoint());
    const Eigen::MatrixXcd b = apply_liouvillian(l, r).adjoint();
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("capacity and variant validation") {
    CHECK_THROWS_AS(build_liouvillian(params(6, 0.2, 1.0), Variant::CoherentDrive), CapacityError);
    CHECK_THROWS_AS(build_liouvillian(params(4, 0.2, 1.0), Variant::DoubledCoherent), CapacityError);
    ModelParams p = params(3, 0.2, 1.0);
    p.n_th = 0.1;
    CHECK_THROWS_AS(build_liouvillian(p, Variant::DoubledCoherent), ValidationError);
    CHECK_THROWS_AS(build_liouvillian(p, Variant::CoherentDrive), ValidationError);
    CHECK_THROWS_AS(parse_variant("bogus"), ValidationError);
    CHECK(parse_variant("doubled-incoherent") == Variant::DoubledIncoherent);
}

TEST_CASE("zero drive relaxes to the polarized down state") {
    // [PAPER] completely polarized pure state at zero drive
    const SteadyState ss = steady_state(build_liouvillian(params(2, 0.37, 0.0), Variant::CoherentDrive));
    CHECK(ss.rho(3, 3).real() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ss.rank == 1);
    CHECK_FALSE(ss.full_rank);
}

TEST_CASE("steady state matches the exact solution") {
    // [DERIVED] dense null space against Psi Psi^dagger
    for (double d : {0.2, 0.5, 1.2}) {
        for (double w : {0.2, 1.0, 3.0}) {
            const ModelParams p = params(3, d, w);
            CAPTURE(d);
            CAPTURE(w);
            const SteadyState ss = steady_state(build_liouvillian(p, Variant::CoherentDrive));
            REQUIRE(ss.kernel_dim.has_value());
            CHECK(*ss.kernel_dim == 1);
            CHECK(ss.residual <= 1e-10);
            CHECK(ss.min_eigenvalue >= -1e-10);
            CHECK(ss.full_rank);
            const Eigen::MatrixXcd exact = density_from_cholesky(build_cholesky(solve_coefficients(p)));
            CHECK(trace_distance(ss.rho, exact) <= 1e-8);
        }
    }
}

TEST_CASE("incoherent steady state matches the exact solution") {
    // [DERIVED]
    for (int N : {2, 3, 4}) {
        const ModelParams p = params(N, 0.4, 0.0, 0.8);
        const SteadyState ss = steady_state(build_liouvillian(p, Variant::IncoherentPumpLoss));
        const Eigen::MatrixXcd exact = density_from_cholesky(build_cholesky(solve_incoherent(p)));
        CHECK(trace_distance(ss.rho, exact) <= 1e-8);
    }
}

TEST_CASE("observables agree with the oracle at N=3") {
    // [DERIVED] sign and scale conventions of magnetization, current and zz
    const ModelParams p = params(3, 0.2, 0.4);
    const SteadyState ss = steady_state(build_liouvillian(p, Variant::CoherentDrive));
    const MpsCoefficients m = solve_coefficients(p);

    double zbar = 0.0;
    for (int s = 0; s < 3; ++s) {
        const double z = expect(ss.rho, SpinOperator::single(3, s, Pauli::Z));
        CHECK(std::abs(site_magnetization(m, s + 1) - z) <= 1e-9);
        zbar += z / 3.0;
    }
    CHECK(std::abs(magnetization(m).magnetization - zbar) <= 1e-9);

    for (int bond = 0; bond < 2; ++bond) {
        SpinOperator j(3);
        j.add({0.0, 1.0}, {{bond, Pauli::Plus}, {bond + 1, Pauli::Minus}});
        j.add({0.0, -1.0}, {{bond, Pauli::Minus}, {bond + 1, Pauli::Plus}});
        const double bond_current = expect(ss.rho, j);
        CHECK(std::abs(-0.5 * current(m) - bond_current) <= 1e-9);
    }

    SpinOperator zz(3);
    zz.add(1.0, {{0, Pauli::Z}, {1, Pauli::Z}});
    CHECK(std::abs(zz_correlation(m, 1, 2) - expect(ss.rho, zz)) <= 1e-9);
    SpinOperator zz13(3);
    zz13.add(1.0, {{0, Pauli::Z}, {2, Pauli::Z}});
    CHECK(std::abs(zz_correlation(m, 1, 3) - expect(ss.rho, zz13)) <= 1e-9);
}

TEST_CASE("doubled system relaxes to the absorber-traced pure state") {
    // [DERIVED]
    const ModelParams p = params(3, 0.3, 0.8);
    const SteadyState dss = steady_state(build_liouvillian(p, Variant::DoubledCoherent));
    CHECK_FALSE(dss.kernel_dim.has_value());
    const double purity = (dss.rho * dss.rho).trace().real();
    CHECK(purity >= 1.0 - 1e-8);

    const DoubledState psi = build_doubled_state(solve_coefficients(p));
    const Eigen::VectorXcd u = psi.amplitudes / psi.norm;
    const double fidelity = (u.adjoint() * dss.rho * u)(0, 0).real();
    CHECK(fidelity >= 1.0 - 1e-8);

    const SteadyState ss = steady_state(build_liouvillian(p, Variant::CoherentDrive));
    CHECK(trace_distance(trace_absorber(dss.rho, 3), ss.rho) <= 1e-8);
    CHECK(trace_distance(trace_absorber(u, 3), ss.rho) <= 1e-8);
}

TEST_CASE("incoherent doubled system traces to the pump-loss steady state") {
    // [DERIVED]
    const ModelParams p = params(3, 0.6, 0.0, 1.3);
    const SteadyState dss = steady_state(build_liouvillian(p, Variant::DoubledIncoherent));
    const SteadyState ss = steady_state(build_liouvillian(p, Variant::IncoherentPumpLoss));
    CHECK(trace_distance(trace_absorber(dss.rho, 3), ss.rho) <= 1e-8);
    const DoubledState psi = build_doubled_state(solve_incoherent(p));
    CHECK(trace_distance(trace_absorber(Eigen::VectorXcd(psi.amplitudes / psi.norm), 3), ss.rho) <= 1e-8);
}

TEST_CASE("operator pair satisfies the nested commutator identity") {
    // [PAPER] -1/2 [[H_eff, s-_1], s-_1] = J s-_1 s-_2
    for (double j : {1.0, 0.7}) {
        ModelParams p = params(3, 0.2, 0.4);
        p.J = j;
        const OnsagerPair pair = onsager_operator_pair(p);
        CHECK(pair.identity_residual <= 1e-12);
    }
}

TEST_CASE("two-time correlators") {
    const ModelParams p = params(3, 0.2, 0.4);
    const DenseLindblad l = build_liouvillian(p, Variant::CoherentDrive);
    const SteadyState ss = steady_state(l);
    const OnsagerPair pair = onsager_operator_pair(p);
    const Eigen::MatrixXcd x = pair.x.dense();
    const Eigen::MatrixXcd y = pair.y.dense();
    std::vector<double> t;
    for (int i = 0; i <= 100; ++i) t.push_back(0.1 * i);

    SUBCASE("zero time is the static expectation") {
        // [TRIVIAL]
        const auto c = two_time_correlator(l, ss.rho, x, y, {0.0});
        const std::complex<double> direct = (x * y * ss.rho).trace();
        CHECK(std::abs(c[0] - direct) <= 1e-14);
    }
    SUBCASE("certified pair is symmetric") {
        // [PAPER] symmetric correlation for this pair
        const auto xy = two_time_correlator(l, ss.rho, x, y, t);
        const auto yx = two_time_correlator(l, ss.rho, y, x, t);
        double worst = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) worst = std::max(worst, std::abs(xy[i] - yx[i]));
        CHECK(worst <= 1e-8);
    }
    SUBCASE("sigma-z pair is not symmetric") {
        // [PAPER] symmetry fails for general operators
        const Eigen::MatrixXcd z1 = SpinOperator::single(3, 0, Pauli::Z).dense();
        const Eigen::MatrixXcd z2 = SpinOperator::single(3, 1, Pauli::Z).dense();
        const auto a = two_time_correlator(l, ss.rho, z1, z2, t);
        const auto b = two_time_correlator(l, ss.rho, z2, z1, t);
        double worst = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        CHECK(worst > 1e-3);
    }
    SUBCASE("thermal bath breaks the symmetry") {
        // [PAPER] broken at finite temperature 0.1
        ModelParams q = p;
        q.n_th = 0.1;
        const DenseLindblad lt = build_liouvillian(q, Variant::ThermalCoherent);
        const SteadyState st = steady_state(lt);
        const auto xy = two_time_correlator(lt, st.rho, x, y, t);
        const auto yx = two_time_correlator(lt, st.rho, y, x, t);
        double worst = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) worst = std::max(worst, std::abs(xy[i] - yx[i]));
        CHECK(worst > 1e-3);
    }
    SUBCASE("autocorrelator smoke test") {
        // [TRIVIAL]
        const auto c = two_time_correlator(l, ss.rho, x, x, t);
        CHECK(c.size() == t.size());
    }
    SUBCASE("grid validation") {
        CHECK_THROWS_AS(two_time_correlator(l, ss.rho, x, y, {1.0, 0.5}), ValidationError);
    }
}

TEST_CASE("gap is positive for a driven chain") {
    const SteadyState ss = steady_state(build_liouvillian(params(2, 0.3, 1.0), Variant::CoherentDrive), true);
    REQUIRE(ss.gap.has_value());
    CHECK(*ss.gap > 1e-3);
}
