#pragma once

#include <vector>

#include "xxz/mps.hpp"

namespace xxz {

// Transfer weights in log form: log|a_k|^2 (k <= N), log|b_k|^2 and
// log|c_k|^2 (k < N), log|alpha_k|^2 (k <= N). -inf marks an exact zero.
// Row propagation: f'(k) = f(k)|a_k|^2 + f(k+1)|b_k|^2 + f(k-1)|c_{k-1}|^2.
struct TransferChain {
    int N = 0;
    std::vector<double> log_diag, log_down, log_up, log_post;
};

TransferChain transfer_chain(const MpsCoefficients& m);

// Real-weight chain given directly, e.g. a stochastic walk. Entries must be >= 0.
TransferChain transfer_chain(std::vector<double> diag, std::vector<double> down, std::vector<double> up,
                             std::vector<double> post);

// log <0|T^steps|k> for k = 0..N, elementwise in the log domain so entries
// hundreds of decades apart keep full relative precision.
std::vector<double> transfer_propagate(const TransferChain& chain, int steps);

// One row step applied in place.
void transfer_step(const TransferChain& chain, std::vector<double>& log_f);

struct NessObservables {
    double magnetization = 0.0;  // -sum_k (k/N) p_k
    double current = 0.0;        // (gamma/J) Z_{N-1}/Z_N
    std::vector<double> p;       // p_k, sums to 1
    double log_Z = 0.0;          // log Z_N
    double log_Z_prev = 0.0;     // log Z_{N-1}
    double z_ratio = 0.0;        // Z_{N-1}/Z_N
};

NessObservables magnetization(const MpsCoefficients& m);
// Same contraction on an explicit chain; the current is gamma Z_{N-1}/Z_N,
// meaningful only when the chain carries one gauge of the model.
NessObservables chain_observables(const TransferChain& chain, double gamma);
double current(const MpsCoefficients& m);

// <sigma^z_site> for 1 <= site <= N.
double site_magnetization(const MpsCoefficients& m, int site);
// <sigma^z_a sigma^z_b> for 1 <= a < b <= N.
double zz_correlation(const MpsCoefficients& m, int a, int b);

// Von Neumann entropy (natural log) of the normalized doubled pure state
// across the bond after site `cut`, 1 <= cut < N.
double entanglement_entropy(const MpsCoefficients& m, int cut);

inline constexpr double entropy_eigen_floor = 1e-14;

}  // namespace xxz
