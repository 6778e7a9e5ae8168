#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xxz/log_scalar.hpp"
#include "xxz/model.hpp"

namespace xxz {

enum class Gauge { CUnit, WeakDissipation, Stochastic, Custom };

std::string to_string(Gauge g);

// Tridiagonal-in-auxiliary-space MPS data for one chain length N, in units
// J = 1. a has N+1 entries; b, c, bc have N; alpha has N+1.
//   A_T = sum_k a_k |k><k|, A_1 = sum_k b_k |k+1><k|, A_0 = sum_k c_k |k><k+1|
// with left vector |0> and right vector sum_k alpha_k |k>.
struct MpsCoefficients {
    int N = 0;
    double delta = 0.0;  // Delta / J
    double gamma = 0.0;  // gamma / J
    double omega = 0.0;  // Omega / J
    std::vector<LogComplex> a, bc, b, c, alpha;
    Gauge gauge = Gauge::CUnit;
    bool incoherent = false;
    // Omega = 0: alpha is replaced by |N>, the fully polarized down state.
    bool zero_drive = false;
};

// Recursions with the split c_k = 1.
MpsCoefficients solve_coefficients(const ModelParams& p);

// Closed-form a_k and the split b_k = sin((k+1)eta)/sqrt2; |Delta| < J only.
// At a special anisotropy b_{nm-1} is set to exactly zero.
MpsCoefficients analytic_coefficients(const ModelParams& p);

// Right vector |0>; Omega is ignored. Same a, bc as the coherent model.
MpsCoefficients solve_incoherent(const ModelParams& p);

// Chebyshev values T_k(omega_c / omega) for k = 0..N.
std::vector<double> chebyshev_alpha(double omega, double omega_c, int N);
// |alpha_k|^2 in the gamma -> 0 limit.
std::vector<double> weak_dissipation_alpha(double omega, double omega_c, int N);

// c_k -> c_k v_{k+1}/v_k, b_k -> b_k v_k/v_{k+1}, alpha_k -> alpha_k / v_k.
MpsCoefficients apply_gauge(const MpsCoefficients& m, std::span<const double> v);
// Same with v_k = exp(log_v[k]); admits factors far outside double range.
MpsCoefficients apply_log_gauge(const MpsCoefficients& m, std::span<const double> log_v);

// Doubled chain amplitudes, qubits interleaved A_1, B_1, A_2, B_2, ...; the
// stored vector is the state times exp(-log_scale).
struct DoubledState {
    int N = 0;
    Eigen::VectorXcd amplitudes;
    double log_scale = 0.0;
    double norm = 0.0;  // of the stored vector
};

inline constexpr int max_doubled_sites = 8;
inline constexpr int max_cholesky_sites = 10;

DoubledState build_doubled_state(const MpsCoefficients& m);

// Psi with rho_ss proportional to Psi Psi^dagger; spin configurations indexed
// with site 1 as the most significant bit and bit 0 = spin up. Psi is the
// doubled amplitude matrix (row = system, column = flipped absorber bits)
// times 2^{N/2}, so the diagonal is a_0^N alpha_0 = 1.
struct CholeskyFactor {
    int N = 0;
    Eigen::MatrixXcd psi;
};

CholeskyFactor build_cholesky(const MpsCoefficients& m);

// Psi Psi^dagger / Tr.
Eigen::MatrixXcd density_from_cholesky(const CholeskyFactor& f);

// Optional debug table: k, Re/Im of a, bc, b, c, alpha (NaN past each range).
std::string coefficients_csv(const MpsCoefficients& m);

}  // namespace xxz
