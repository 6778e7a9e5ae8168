#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "xxz/model.hpp"
#include "xxz/spin_ops.hpp"

namespace xxz {

enum class Variant { CoherentDrive, IncoherentPumpLoss, DoubledCoherent, DoubledIncoherent, ThermalCoherent };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

using SparseC = Eigen::SparseMatrix<std::complex<double>>;

// Column-stacked superoperator: vec(A rho B) = (B^T kron A) vec(rho).
struct DenseLindblad {
    Variant variant = Variant::CoherentDrive;
    int n_qubits = 0;
    Eigen::Index dim = 0;  // Hilbert dimension
    SparseC superop;       // dim^2 x dim^2
    Eigen::MatrixXcd hamiltonian;
    std::vector<std::pair<Eigen::MatrixXcd, double>> jumps;  // (operator, rate)
};

inline constexpr int max_oracle_sites = 5;
inline constexpr int max_doubled_oracle_sites = 3;

// Spin operators of the model, qubit q = site q+1 for a single chain and
// A_i = 2(i-1), B_i = 2(i-1)+1 for the doubled chain. The bulk is
// 0.5 sum_j [J (XX + YY) + Delta ZZ] = sum_j [J (s+s- + s-s+) + (Delta/2) ZZ].
SpinOperator chain_hamiltonian(const ModelParams& p);
SpinOperator doubled_hamiltonian(const ModelParams& p, bool incoherent);
std::vector<SpinOperator> doubled_jumps(const ModelParams& p, bool incoherent);

DenseLindblad build_liouvillian(const ModelParams& p, Variant v);
DenseLindblad liouvillian_from(const Eigen::MatrixXcd& h, std::vector<std::pair<Eigen::MatrixXcd, double>> jumps);

// L[rho] for a density matrix.
Eigen::MatrixXcd apply_liouvillian(const DenseLindblad& l, const Eigen::MatrixXcd& rho);

struct SteadyState {
    Eigen::MatrixXcd rho;
    // From a rank-revealing QR of the dense superoperator; empty above
    // dense_kernel_limit, where only the constrained solve vouches for it.
    std::optional<int> kernel_dim;
    double residual = 0.0;  // max |L[rho]|
    double min_eigenvalue = 0.0;
    int rank = 0;  // eigenvalues of rho above rank_tolerance
    bool full_rank = false;
    std::optional<double> gap;  // |Re| of the slowest nonzero mode
};

inline constexpr double kernel_tolerance = 1e-10;
// Weakly driven chains have genuine eigenvalues near 1e-11.
inline constexpr double rank_tolerance = 1e-13;
inline constexpr Eigen::Index dense_kernel_limit = 1024;

// Kernel of L via a trace-constrained sparse LU solve, Hermitized and
// normalized. Throws NumericalError if the kernel is not one-dimensional.
// with_gap runs a full dense eigendecomposition (superop dim <= 1024).
SteadyState steady_state(const DenseLindblad& l, bool with_gap = false);

// Tr(X e^{Lt}[Y rho]) on t_grid via adaptive Dormand-Prince integration.
std::vector<std::complex<double>> two_time_correlator(const DenseLindblad& l, const Eigen::MatrixXcd& rho,
                                                      const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y,
                                                      const std::vector<double>& t_grid, double tol = 1e-10);

struct OnsagerPair {
    SpinOperator x;  // sigma^-_1
    SpinOperator y;  // -1/2 [[H_eff, sigma^-_1], sigma^-_1] / J = sigma^-_1 sigma^-_2
    double identity_residual = 0.0;
};

// Builds H_eff = H + (Omega/2) X_N + (i gamma/2) s+_1 s-_1, checks the nested
// commutator against J s-_1 s-_2 (NumericalError beyond 1e-12).
OnsagerPair onsager_operator_pair(const ModelParams& p);

// max |L^dagger vec(I)|, zero for a trace-preserving generator.
double trace_preservation_residual(const DenseLindblad& l);

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Trace over the odd (absorber) qubits of an interleaved doubled state.
Eigen::MatrixXcd trace_absorber(const Eigen::VectorXcd& psi, int n_sites);
Eigen::MatrixXcd trace_absorber(const Eigen::MatrixXcd& rho, int n_sites);

}  // namespace xxz
