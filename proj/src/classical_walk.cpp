#include "xxz/classical_walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

namespace xxz {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// 53 random bits -> [0, 1); fixed across standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

double log_sum_exp(std::span<const double> x) {
    double top = neg_inf;
    for (double v : x) top = std::max(top, v);
    if (top == neg_inf) return neg_inf;
    double s = 0.0;
    for (double v : x) s += std::exp(v - top);
    return top + std::log(s);
}

void finish_profile(FreeEnergyProfile& f) {
    const int N = f.N;
    f.F.resize(N + 1);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= N; ++k) {
        f.F[k] = f.g[k] + f.h[k];
        if (f.F[k] < best) {
            best = f.F[k];
            f.xi_star = f.xi[k];
        }
    }
}

std::vector<double> xi_grid(int N) {
    std::vector<double> xi(N + 1);
    for (int k = 0; k <= N; ++k) xi[k] = static_cast<double>(k) / N;
    return xi;
}

// log T_k(x)^2 with x = omega_c / omega; cosh branch kept in log form.
std::vector<double> log_weak_alpha(double omega, double omega_c, int N) {
    std::vector<double> out(N + 1);
    const double x = omega_c / omega;
    if (x <= 1.0) {
        const double th = std::acos(x);
        for (int k = 0; k <= N; ++k) out[k] = 2.0 * std::log(std::abs(std::cos(k * th)));
    } else {
        const double th = std::acosh(x);
        for (int k = 0; k <= N; ++k) {
            const double u = k * th;
            out[k] = 2.0 * (u + std::log1p(std::exp(-2.0 * u)) - std::numbers::ln2);
        }
    }
    return out;
}

}  // namespace

std::string to_string(EnvironmentKind k) {
    switch (k) {
        case EnvironmentKind::Quasiperiodic: return "quasiperiodic";
        case EnvironmentKind::RandomIID: return "random";
        case EnvironmentKind::UniformQuarter: return "uniform";
    }
    return "unknown";
}

EnvironmentKind parse_environment(const std::string& s) {
    for (auto k : {EnvironmentKind::Quasiperiodic, EnvironmentKind::RandomIID, EnvironmentKind::UniformQuarter}) {
        if (s == to_string(k)) return k;
    }
    throw ValidationError("environment: unknown value '" + s + "'");
}

WalkEnvironment make_environment(EnvironmentKind kind, int sites, double eta, std::uint64_t seed) {
    if (sites < 2) throw ValidationError("sites: must be >= 2");
    WalkEnvironment env;
    env.kind = kind;
    env.eta = eta;
    env.seed = seed;
    env.w.resize(sites);
    switch (kind) {
        case EnvironmentKind::Quasiperiodic:
            if (!std::isfinite(eta)) throw ValidationError("eta: must be finite");
            for (int k = 0; k < sites; ++k) env.w[k] = 0.5 * std::pow(std::sin(k * eta), 2);
            env.w[0] = quasiperiodic_origin_weight;
            break;
        case EnvironmentKind::RandomIID: {
            std::mt19937_64 rng = trajectory_rng(seed, ~std::uint64_t{0});
            for (int k = 0; k < sites; ++k) env.w[k] = 0.5 * std::pow(std::sin(0.5 * std::numbers::pi * uniform01(rng)), 2);
            break;
        }
        case EnvironmentKind::UniformQuarter:
            std::fill(env.w.begin(), env.w.end(), 0.25);
            break;
    }
    env.stay.resize(sites);
    env.stay[0] = 1.0 - env.w[0];
    for (int k = 1; k < sites; ++k) env.stay[k] = 1.0 - 2.0 * env.w[k];
    return env;
}

WalkPropagator::WalkPropagator(const WalkEnvironment& env)
    : env_(&env), p_(env.w.size(), 0.0), next_(env.w.size(), 0.0) {
    p_[0] = 1.0;
}

void WalkPropagator::step() {
    const auto& w = env_->w;
    const auto& stay = env_->stay;
    const int sites = static_cast<int>(w.size());
    int hi = support_;
    if (p_[support_ - 1] > support_floor) {
        if (support_ == sites) throw CapacityError("walk: support reached the end of the environment");
        hi = support_ + 1;
    }
    for (int k = 0; k < hi; ++k) {
        double v = stay[k] * p_[k];
        if (k > 0) v += w[k - 1] * p_[k - 1];
        if (k + 1 < support_) v += w[k + 1] * p_[k + 1];
        next_[k] = v;
    }
    std::swap(p_, next_);
    support_ = hi;
    ++steps_;
}

void WalkPropagator::advance(int steps) {
    for (int s = 0; s < steps; ++s) step();
}

double WalkPropagator::total() const {
    double s = 0.0;
    for (int k = 0; k < support_; ++k) s += p_[k];
    return s;
}

double WalkPropagator::second_moment() const {
    double s = 0.0;
    for (int k = 0; k < support_; ++k) s += static_cast<double>(k) * k * p_[k];
    return s;
}

std::vector<double> classical_propagate(const WalkEnvironment& env, int steps) {
    if (steps < 0) throw ValidationError("steps: must be >= 0");
    WalkPropagator prop(env);
    prop.advance(steps);
    std::vector<double> out(env.w.size(), 0.0);
    std::copy(prop.p().begin(), prop.p().end(), out.begin());
    return out;
}

MonteCarloResult monte_carlo_walk(const WalkEnvironment& env, int steps, std::uint64_t n_traj, std::uint64_t seed,
                                  int threads) {
    if (n_traj < 1) throw ValidationError("n_traj: must be >= 1");
    if (steps < 0) throw ValidationError("steps: must be >= 0");
    const int sites = static_cast<int>(env.w.size());
    if (steps >= sites) throw CapacityError("walk: environment shorter than the step count");
    threads = std::max(1, threads);

    std::vector<std::vector<std::uint64_t>> partial(threads, std::vector<std::uint64_t>(sites, 0));
    auto run = [&](int tid) {
        auto& counts = partial[tid];
        for (std::uint64_t t = tid; t < n_traj; t += threads) {
            std::mt19937_64 rng = trajectory_rng(seed, t);
            int k = 0;
            for (int s = 0; s < steps; ++s) {
                const double u = uniform01(rng);
                const double wk = env.w[k];
                if (k == 0) {
                    if (u < wk) k = 1;
                } else if (u < wk) {
                    --k;
                } else if (u < 2.0 * wk) {
                    ++k;
                }
            }
            ++counts[k];
        }
    };
    if (threads == 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        for (int tid = 0; tid < threads; ++tid) pool.emplace_back(run, tid);
    }

    MonteCarloResult r;
    r.n_traj = n_traj;
    r.seed = seed;
    r.counts.assign(sites, 0);
    for (const auto& c : partial)
        for (int k = 0; k < sites; ++k) r.counts[k] += c[k];
    r.p.resize(sites);
    r.std_error.resize(sites);
    const double n = static_cast<double>(n_traj);
    for (int k = 0; k < sites; ++k) {
        r.p[k] = static_cast<double>(r.counts[k]) / n;
        r.std_error[k] = std::sqrt(r.p[k] * (1.0 - r.p[k]) / n);
    }
    return r;
}

GofReport compare_to_exact(const MonteCarloResult& mc, std::span<const double> exact, double min_expected) {
    GofReport rep;
    const double n = static_cast<double>(mc.n_traj);
    const std::size_t m = std::min(exact.size(), mc.counts.size());
    for (std::size_t k = 0; k < m; ++k) {
        const double expect = n * exact[k];
        if (expect < min_expected) continue;
        const double sigma = std::sqrt(expect * (1.0 - exact[k]));
        const double z = (static_cast<double>(mc.counts[k]) - expect) / sigma;
        rep.chi2 += z * z;
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
        ++rep.bins;
    }
    return rep;
}

StochasticGauge stochastic_gauge(const MpsCoefficients& m) { return stochastic_gauge(transfer_chain(m)); }

StochasticGauge stochastic_gauge(const TransferChain& base, std::optional<double> inv_c2_override) {
    const int N = base.N;
    double inv_c2 = 0.0;
    if (inv_c2_override) {
        inv_c2 = *inv_c2_override;
        if (!(inv_c2 > 0.0)) throw ValidationError("inv_c2: must be > 0");
    } else {
        double sup_a = 0.0;
        double sup_b = 0.0;
        for (double x : base.log_diag) sup_a = std::max(sup_a, std::exp(x));
        for (double x : base.log_down) sup_b = std::max(sup_b, std::exp(x));
        if (!std::isfinite(sup_a) || !std::isfinite(sup_b)) {
            throw NumericalError("stochastic gauge: coefficients are not bounded in double range");
        }
        inv_c2 = 1.0 + sup_a + sup_b;
    }

    StochasticGauge out;
    out.log_c2 = -std::log(inv_c2);
    TransferChain& t = out.chain;
    t.N = N;
    t.log_diag.resize(N + 1);
    t.log_down.resize(N);
    t.log_up.resize(N);
    t.log_post.resize(N + 1);
    out.log_v2.assign(N + 1, 0.0);

    double prev_r = 1.0;
    for (int k = 0; k < N; ++k) {
        const double a2 = std::exp(base.log_diag[k]);
        const double c2 = std::exp(base.log_up[k]);
        const double from_below = k > 0 ? std::exp(base.log_down[k - 1]) / prev_r : 0.0;
        const double r = (inv_c2 - a2 - from_below) / c2;
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw NumericalError("stochastic gauge: non-positive ratio at k = " + std::to_string(k) +
                                 "; the bound C is too small");
        }
        t.log_diag[k] = base.log_diag[k] + out.log_c2;
        t.log_up[k] = base.log_up[k] + std::log(r) + out.log_c2;
        t.log_down[k] = base.log_down[k] - std::log(r) + out.log_c2;
        out.log_v2[k + 1] = out.log_v2[k] + std::log(r);
        prev_r = r;
    }
    t.log_diag[N] = base.log_diag[N] + out.log_c2;
    for (int k = 0; k <= N; ++k) t.log_post[k] = base.log_post[k] - out.log_v2[k];
    return out;
}

double row_sum_error(const TransferChain& t) {
    double worst = 0.0;
    for (int k = 0; k < t.N; ++k) {
        double s = std::exp(t.log_diag[k]) + std::exp(t.log_up[k]);
        if (k > 0) s += std::exp(t.log_down[k - 1]);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

FreeEnergyProfile free_energy(const MpsCoefficients& m) {
    const int N = m.N;
    const TransferChain t = transfer_chain(m);
    const std::vector<double> f = transfer_propagate(t, N);
    FreeEnergyProfile out;
    out.N = N;
    out.xi = xi_grid(N);
    out.g.resize(N + 1);
    out.h.resize(N + 1);
    for (int k = 0; k <= N; ++k) {
        out.g[k] = -f[k] / N;
        out.h[k] = -t.log_post[k] / N;
    }
    finish_profile(out);
    return out;
}

double profile_magnetization(const FreeEnergyProfile& f) {
    const int N = f.N;
    std::vector<double> lw(N + 1), lxw;
    for (int k = 0; k <= N; ++k) {
        lw[k] = -N * f.F[k];
        if (k > 0) lxw.push_back(lw[k] + std::log(f.xi[k]));
    }
    const double lz = log_sum_exp(lw);
    if (!std::isfinite(lz)) throw NumericalError("free energy: all weights vanish");
    return -std::exp(log_sum_exp(lxw) - lz);
}

FreeEnergyProfile walk_free_energy(const WalkEnvironment& env, int N) {
    if (N < 1) throw ValidationError("n: must be >= 1");
    if (static_cast<int>(env.w.size()) <= N) throw CapacityError("walk: environment shorter than N + 1 sites");
    // Log-domain propagation; p(k, N) falls far below the double range for k ~ N.
    std::vector<double> diag(env.stay.begin(), env.stay.begin() + N + 1);
    std::vector<double> up(env.w.begin(), env.w.begin() + N);
    std::vector<double> down(env.w.begin() + 1, env.w.begin() + N + 1);
    const TransferChain chain = transfer_chain(std::move(diag), std::move(down), std::move(up),
                                               std::vector<double>(N + 1, 1.0));
    const std::vector<double> log_p = transfer_propagate(chain, N);
    FreeEnergyProfile out;
    out.N = N;
    out.xi = xi_grid(N);
    out.g.resize(N + 1);
    out.h.assign(N + 1, 0.0);
    for (int k = 0; k <= N; ++k) out.g[k] = -log_p[k] / N;
    finish_profile(out);
    return out;
}

FreeEnergyProfile condensate_profile(double delta_over_j, double omega_over_j, int N) {
    if (!(std::abs(delta_over_j) < 1.0)) throw ValidationError("delta: condensate profile needs |Delta| < J");
    if (!(omega_over_j > 0.0)) throw ValidationError("omega: must be > 0");
    if (N < 2) throw ValidationError("n: must be >= 2");
    const double eta = std::acos(delta_over_j);
    const double s2 = std::pow(std::sin(eta), 2);

    // Single-departure sum W_k = sum_{s=0}^{N-1} Q_s(1 -> k) over k = 1..N with
    // the origin absorbing; chain index j = k - 1.
    std::vector<double> diag(N), up(N - 1), down(N - 1);
    for (int j = 0; j < N; ++j) diag[j] = std::pow(std::cos((j + 1) * eta), 2);
    for (int j = 0; j + 1 < N; ++j) {
        up[j] = 0.5 * std::pow(std::sin((j + 1) * eta), 2);
        down[j] = 0.5 * std::pow(std::sin((j + 2) * eta), 2);
    }
    const TransferChain chain = transfer_chain(std::move(diag), std::move(down), std::move(up),
                                               std::vector<double>(N, 1.0));
    std::vector<double> log_q(N, neg_inf);
    log_q[0] = 0.0;
    std::vector<double> log_acc = log_q;
    for (int s = 1; s < N; ++s) {
        transfer_step(chain, log_q);
        for (int j = 0; j < N; ++j) {
            const double hi = std::max(log_acc[j], log_q[j]);
            if (hi == neg_inf) continue;
            log_acc[j] = hi + std::log(std::exp(log_acc[j] - hi) + std::exp(log_q[j] - hi));
        }
    }

    const double wc = std::sqrt(1.0 - delta_over_j * delta_over_j);
    const std::vector<double> log_alpha2 = log_weak_alpha(omega_over_j, wc, N);
    FreeEnergyProfile out;
    out.N = N;
    out.xi = xi_grid(N);
    out.g.assign(N + 1, 0.0);
    out.h.assign(N + 1, 0.0);
    for (int k = 1; k <= N; ++k) {
        out.g[k] = -(log_acc[k - 1] - std::log(2.0 * s2)) / N;
        out.h[k] = -log_alpha2[k] / N;
    }
    finish_profile(out);
    return out;
}

double condensation_strength(const FreeEnergyProfile& f, double gamma) {
    std::vector<double> lw;
    for (int k = 1; k <= f.N; ++k) lw.push_back(-f.N * f.F[k]);
    return gamma * gamma * std::exp(log_sum_exp(lw));
}

double condensation_magnetization(const FreeEnergyProfile& f, double gamma) {
    if (!(gamma > 0.0)) throw ValidationError("gamma: must be > 0");
    std::vector<double> lw, lxw;
    for (int k = 1; k <= f.N; ++k) {
        lw.push_back(-f.N * f.F[k]);
        lxw.push_back(lw.back() + std::log(f.xi[k]));
    }
    const double l0 = log_sum_exp(lw);
    if (l0 == neg_inf) return 0.0;
    const double l1 = log_sum_exp(lxw);
    // gamma^2 S1 / (1 + gamma^2 S0) = (S1/S0) * sigmoid(log(gamma^2 S0))
    const double x = 2.0 * std::log(gamma) + l0;
    return -std::exp(l1 - l0) / (1.0 + std::exp(-x));
}

}  // namespace xxz
