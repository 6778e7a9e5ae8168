#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xxz/mps.hpp"
#include "xxz/observables.hpp"

namespace xxz {

enum class EnvironmentKind { Quasiperiodic, RandomIID, UniformQuarter };

std::string to_string(EnvironmentKind k);
EnvironmentKind parse_environment(const std::string& s);

// Lazy walk on k = 0, 1, ...: from site k hop left and right with weight w_k
// each and stay with 1 - 2 w_k. Site 0 reflects: it hops right with w_0 and
// stays with 1 - w_0.
struct WalkEnvironment {
    EnvironmentKind kind = EnvironmentKind::UniformQuarter;
    double eta = 0.0;        // quasiperiodic angle
    std::uint64_t seed = 0;  // random environments only
    std::vector<double> w;
    std::vector<double> stay;
};

// sin^2(0) = 0 would make the origin absorbing, so the quasiperiodic origin
// is seeded with this weight.
inline constexpr double quasiperiodic_origin_weight = 0.25;

// w_k for k < sites. Quasiperiodic: (1/2) sin^2(k eta); RandomIID: i.i.d.
// (1/2) sin^2(pi u / 2) with u uniform (arcsine law on [0, 1/2));
// UniformQuarter: 1/4.
WalkEnvironment make_environment(EnvironmentKind kind, int sites, double eta = 0.0, std::uint64_t seed = 0);

// Exact forward iteration from p = delta_{k,0}. The active support grows only
// while the outermost entry exceeds support_floor, which bounds the cost by
// the physical spread instead of the step count.
class WalkPropagator {
public:
    explicit WalkPropagator(const WalkEnvironment& env);

    void step();
    void advance(int steps);

    [[nodiscard]] long steps() const { return steps_; }
    [[nodiscard]] std::span<const double> p() const { return {p_.data(), static_cast<std::size_t>(support_)}; }
    [[nodiscard]] double total() const;
    [[nodiscard]] double second_moment() const;

    static constexpr double support_floor = 1e-300;

private:
    const WalkEnvironment* env_;
    std::vector<double> p_;
    std::vector<double> next_;
    int support_ = 1;  // entries [0, support_) may be nonzero
    long steps_ = 0;
};

// p(k, steps) for k < env.w.size(); CapacityError if the walk reaches the end.
std::vector<double> classical_propagate(const WalkEnvironment& env, int steps);

struct MonteCarloResult {
    std::vector<std::uint64_t> counts;  // final-position histogram
    std::vector<double> p;              // counts / n_traj
    std::vector<double> std_error;      // sqrt(p (1 - p) / n_traj)
    std::uint64_t n_traj = 0;
    std::uint64_t seed = 0;
};

// Trajectory t draws from mt19937_64 seeded with seed_seq{seed, t}; results
// do not depend on the thread count.
MonteCarloResult monte_carlo_walk(const WalkEnvironment& env, int steps, std::uint64_t n_traj, std::uint64_t seed,
                                  int threads = 1);

struct GofReport {
    double chi2 = 0.0;
    int bins = 0;           // bins with expected count >= min_expected
    double max_abs_z = 0.0;  // worst per-bin deviation in binomial sigmas
};

GofReport compare_to_exact(const MonteCarloResult& mc, std::span<const double> exact, double min_expected = 5.0);

// Probability-conserving diagonal gauge: with 1/C^2 = 1 + sup|a|^2 + sup|b|^2
// and r_k = |v_{k+1}/v_k|^2 from
//   r_k |c_k|^2 = 1/C^2 - |a_k|^2 - |b_{k-1}|^2 / r_{k-1},
// the weights C^2 |a_k|^2, C^2 |b_k|^2 / r_k, C^2 |c_k|^2 r_k leave every row
// summing to one. Post weights become |alpha_k|^2 / |v_k|^2.
struct StochasticGauge {
    TransferChain chain;
    std::vector<double> log_v2;  // log |v_k|^2, v_0 = 1
    double log_c2 = 0.0;         // log C^2
};

StochasticGauge stochastic_gauge(const MpsCoefficients& m);
// Same on an explicit chain; inv_c2 overrides 1/C^2. A chain whose rows
// already sum to one is left unchanged by inv_c2 = 1.
StochasticGauge stochastic_gauge(const TransferChain& chain, std::optional<double> inv_c2 = std::nullopt);

// Largest |row sum - 1| over k = 0..N-1.
double row_sum_error(const TransferChain& chain);

// Profile over xi_k = k/N: e^{-N F_k} is the weight of configuration k.
struct FreeEnergyProfile {
    int N = 0;
    std::vector<double> xi, g, h, F;
    double xi_star = 0.0;  // argmin F on the grid
};

// g_k = -(1/N) log <0|T^N|k>, h_k = -(1/N) log |alpha_k|^2 in the gauge of m.
// The split is gauge dependent; the weak-dissipation gauge has the gamma -> 0
// limits of h.
FreeEnergyProfile free_energy(const MpsCoefficients& m);

// -sum xi e^{-NF} / sum e^{-NF}.
double profile_magnetization(const FreeEnergyProfile& f);

// g from classical propagation of env for N steps, h = 0.
FreeEnergyProfile walk_free_energy(const WalkEnvironment& env, int N);

// Gamma-free weights of configurations k >= 1 that leave the origin once: the
// walk w_k = (1/2) sin^2(k eta) with an absorbing origin, started at site 1
// and summed over departure times, times 1/(2 sin^2 eta) from |c_0|^2 / gamma^2.
// h uses the Chebyshev right vector. Entry k = 0 is the condensate, F_0 = 0.
FreeEnergyProfile condensate_profile(double delta_over_j, double omega_over_j, int N);

// gamma^2 sum_{k >= 1} e^{-N F_k}.
double condensation_strength(const FreeEnergyProfile& f, double gamma);

// -gamma^2 sum_{k>=1} xi e^{-NF} / (1 + gamma^2 sum_{k>=1} e^{-NF}).
double condensation_magnetization(const FreeEnergyProfile& f, double gamma);

}  // namespace xxz
