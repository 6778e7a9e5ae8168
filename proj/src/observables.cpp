#include "xxz/observables.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace xxz {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double lse2(double x, double y) {
    if (x < y) std::swap(x, y);
    if (y == neg_inf) return x;
    return x + std::log1p(std::exp(y - x));
}

inline double lse3(double x, double y, double z) {
    const double m = std::max({x, y, z});
    if (m == neg_inf) return neg_inf;
    return m + std::log(std::exp(x - m) + std::exp(y - m) + std::exp(z - m));
}

std::vector<double> log_norm2(const std::vector<LogComplex>& v, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = v[i].log_norm2();
    return out;
}

std::vector<double> logs_of(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0)) throw ValidationError("transfer weights must be >= 0");
        out[i] = v[i] > 0.0 ? std::log(v[i]) : neg_inf;
    }
    return out;
}

// Signed vector as two nonnegative log parts: value = exp(pos) - exp(neg).
struct SignedLog {
    std::vector<double> pos, neg;
};

// v -> v Z with Z = sum_k |b_k|^2 |k+1><k| - |c_k|^2 |k><k+1|:
// (vZ)(i) = v(i+1)|b_i|^2 - v(i-1)|c_{i-1}|^2.
SignedLog apply_z(const TransferChain& t, const SignedLog& v) {
    const int N = t.N;
    SignedLog out{std::vector<double>(N + 1, neg_inf), std::vector<double>(N + 1, neg_inf)};
    for (int i = 0; i <= N; ++i) {
        double p = neg_inf;
        double n = neg_inf;
        if (i < N) {
            p = v.pos[i + 1] + t.log_down[i];
            n = v.neg[i + 1] + t.log_down[i];
        }
        if (i > 0) {
            p = lse2(p, v.neg[i - 1] + t.log_up[i - 1]);
            n = lse2(n, v.pos[i - 1] + t.log_up[i - 1]);
        }
        out.pos[i] = p;
        out.neg[i] = n;
    }
    return out;
}

void propagate_signed(const TransferChain& t, SignedLog& v, int steps) {
    for (int s = 0; s < steps; ++s) {
        transfer_step(t, v.pos);
        transfer_step(t, v.neg);
    }
}

// log sum_k exp(f_k + post_k)
double contract(const TransferChain& t, const std::vector<double>& log_f) {
    double acc = neg_inf;
    for (int k = 0; k <= t.N; ++k) acc = lse2(acc, log_f[k] + t.log_post[k]);
    return acc;
}

double signed_contract(const TransferChain& t, const SignedLog& v, double log_z) {
    double sum = 0.0;
    for (int k = 0; k <= t.N; ++k) {
        sum += std::exp(v.pos[k] + t.log_post[k] - log_z) - std::exp(v.neg[k] + t.log_post[k] - log_z);
    }
    return sum;
}

SignedLog unit_start(int N) {
    SignedLog v{std::vector<double>(N + 1, neg_inf), std::vector<double>(N + 1, neg_inf)};
    v.pos[0] = 0.0;
    return v;
}

}  // namespace

TransferChain transfer_chain(const MpsCoefficients& m) {
    TransferChain t;
    t.N = m.N;
    t.log_diag = log_norm2(m.a, m.N + 1);
    t.log_down = log_norm2(m.b, m.N);
    t.log_up = log_norm2(m.c, m.N);
    t.log_post = log_norm2(m.alpha, m.N + 1);
    return t;
}

TransferChain transfer_chain(std::vector<double> diag, std::vector<double> down, std::vector<double> up,
                             std::vector<double> post) {
    const std::size_t n1 = diag.size();
    if (n1 < 2 || down.size() != n1 - 1 || up.size() != n1 - 1 || post.size() != n1) {
        throw ValidationError("transfer chain: inconsistent lengths");
    }
    TransferChain t;
    t.N = static_cast<int>(n1) - 1;
    t.log_diag = logs_of(diag);
    t.log_down = logs_of(down);
    t.log_up = logs_of(up);
    t.log_post = logs_of(post);
    return t;
}

void transfer_step(const TransferChain& t, std::vector<double>& f) {
    const int N = t.N;
    double prev = neg_inf;  // old f(k-1)
    for (int k = 0; k <= N; ++k) {
        const double stay = f[k] + t.log_diag[k];
        const double from_right = k < N ? f[k + 1] + t.log_down[k] : neg_inf;
        const double from_left = k > 0 ? prev + t.log_up[k - 1] : neg_inf;
        prev = f[k];
        f[k] = lse3(stay, from_right, from_left);
    }
}

std::vector<double> transfer_propagate(const TransferChain& t, int steps) {
    if (steps < 0) throw ValidationError("steps must be >= 0");
    std::vector<double> f(t.N + 1, neg_inf);
    f[0] = 0.0;
    for (int s = 0; s < steps; ++s) transfer_step(t, f);
    return f;
}

NessObservables chain_observables(const TransferChain& t, double gamma) {
    const int N = t.N;
    std::vector<double> f = transfer_propagate(t, N - 1);
    NessObservables out;
    out.log_Z_prev = contract(t, f);
    transfer_step(t, f);
    // Weights are shifted by their maximum and summed directly, so sum p = 1
    // to rounding even when log Z is of order 1e5.
    std::vector<double> x(N + 1);
    for (int k = 0; k <= N; ++k) x[k] = f[k] + t.log_post[k];
    const double top = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(top)) throw NumericalError("partition function is zero or not finite");
    out.p.resize(N + 1);
    double total = 0.0;
    for (int k = 0; k <= N; ++k) total += out.p[k] = std::exp(x[k] - top);
    out.log_Z = top + std::log(total);
    double mag = 0.0;
    for (int k = 0; k <= N; ++k) {
        out.p[k] /= total;
        mag -= (static_cast<double>(k) / N) * out.p[k];
    }
    out.magnetization = mag;
    out.z_ratio = std::exp(out.log_Z_prev - out.log_Z);
    out.current = gamma * out.z_ratio;
    return out;
}

NessObservables magnetization(const MpsCoefficients& m) { return chain_observables(transfer_chain(m), m.gamma); }

double current(const MpsCoefficients& m) { return magnetization(m).current; }

double site_magnetization(const MpsCoefficients& m, int site) {
    if (site < 1 || site > m.N) throw ValidationError("site out of range");
    const TransferChain t = transfer_chain(m);
    const double log_z = contract(t, transfer_propagate(t, m.N));
    SignedLog v = unit_start(m.N);
    propagate_signed(t, v, site - 1);
    v = apply_z(t, v);
    propagate_signed(t, v, m.N - site);
    return signed_contract(t, v, log_z);
}

double zz_correlation(const MpsCoefficients& m, int a, int b) {
    if (a < 1 || b > m.N || a >= b) throw ValidationError("need 1 <= a < b <= N");
    const TransferChain t = transfer_chain(m);
    const double log_z = contract(t, transfer_propagate(t, m.N));
    SignedLog v = unit_start(m.N);
    propagate_signed(t, v, a - 1);
    v = apply_z(t, v);
    propagate_signed(t, v, b - a - 1);
    v = apply_z(t, v);
    propagate_signed(t, v, m.N - b);
    return signed_contract(t, v, log_z);
}

double entanglement_entropy(const MpsCoefficients& m, int cut) {
    const int N = m.N;
    if (cut < 1 || cut >= N) throw ValidationError("cut must satisfy 1 <= cut < N");
    const TransferChain t = transfer_chain(m);

    // Left blocks are orthogonal with squared norms D_k = <0|T^cut|k>.
    const std::vector<double> log_d = transfer_propagate(t, cut);

    // Right Gram G(k,k') = <R_k|R_k'> = exp(sig_k + sig_k') Gt(k,k'),
    // unit diagonal in Gt. Start from G = conj(alpha) alpha^T.
    const int dim = N + 1;
    std::vector<double> sig(dim);
    std::vector<cplx> ph(dim);
    for (int k = 0; k < dim; ++k) {
        sig[k] = m.alpha[k].log_abs();
        const cplx z = m.alpha[k].mantissa();
        ph[k] = z == cplx{} ? cplx{} : z / std::abs(z);
    }
    Eigen::MatrixXcd g(dim, dim);
    for (int k = 0; k < dim; ++k)
        for (int q = 0; q < dim; ++q) g(k, q) = std::conj(ph[k]) * ph[q];

    auto unit = [](const LogComplex& x) {
        const cplx z = x.mantissa();
        return z == cplx{} ? cplx{} : z / std::abs(z);
    };
    // Channel x of row k: coefficient (log magnitude, phase) and source row.
    struct Channel {
        double w = 0.0;
        cplx u{};
        int src = -1;
    };
    std::vector<std::array<Channel, 3>> ch(dim);
    std::vector<double> tau(dim);
    Eigen::MatrixXcd next(dim, dim);
    for (int step = 0; step < N - cut; ++step) {
        for (int k = 0; k < dim; ++k) {
            std::array<double, 3> lw{neg_inf, neg_inf, neg_inf};
            auto& c = ch[k];
            c = {};
            lw[0] = m.a[k].log_abs() + sig[k];
            c[0] = {0.0, unit(m.a[k]), k};
            if (k >= 1) {
                lw[1] = m.b[k - 1].log_abs() + sig[k - 1];
                c[1] = {0.0, unit(m.b[k - 1]), k - 1};
            }
            if (k + 1 < dim) {
                lw[2] = m.c[k].log_abs() + sig[k + 1];
                c[2] = {0.0, unit(m.c[k]), k + 1};
            }
            tau[k] = std::max({lw[0], lw[1], lw[2]});
            for (int x = 0; x < 3; ++x) {
                c[x].w = (tau[k] == neg_inf || lw[x] == neg_inf) ? 0.0 : std::exp(lw[x] - tau[k]);
                if (c[x].w == 0.0) c[x].src = -1;
            }
        }
        for (int k = 0; k < dim; ++k) {
            for (int q = 0; q < dim; ++q) {
                cplx acc{};
                for (int x = 0; x < 3; ++x) {
                    const Channel& ck = ch[k][x];
                    const Channel& cq = ch[q][x];
                    if (ck.src < 0 || cq.src < 0) continue;
                    acc += ck.w * cq.w * std::conj(ck.u) * cq.u * g(ck.src, cq.src);
                }
                next(k, q) = acc;
            }
        }
        for (int k = 0; k < dim; ++k) {
            const double dkk = next(k, k).real();
            sig[k] = dkk > 0.0 ? tau[k] + 0.5 * std::log(dkk) : neg_inf;
        }
        for (int k = 0; k < dim; ++k) {
            for (int q = 0; q < dim; ++q) {
                const double dk = next(k, k).real();
                const double dq = next(q, q).real();
                g(k, q) = (dk > 0.0 && dq > 0.0) ? next(k, q) / std::sqrt(dk * dq) : cplx{};
            }
        }
    }

    // rho(k,k') = sqrt(D_k D_k') G(k',k) on the left Schmidt basis.
    const int kmax = std::min(cut, N);
    std::vector<double> s(kmax + 1);
    double smax = neg_inf;
    for (int k = 0; k <= kmax; ++k) {
        s[k] = 0.5 * log_d[k] + sig[k];
        smax = std::max(smax, s[k]);
    }
    if (!std::isfinite(smax)) throw NumericalError("entanglement entropy: state has zero norm");
    Eigen::MatrixXcd rho(kmax + 1, kmax + 1);
    for (int k = 0; k <= kmax; ++k) {
        for (int q = 0; q <= kmax; ++q) {
            const double w = (s[k] == neg_inf || s[q] == neg_inf) ? 0.0 : std::exp(s[k] - smax + s[q] - smax);
            rho(k, q) = w * g(q, k);
        }
    }
    const double tr = rho.trace().real();
    rho /= tr;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    double ent = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()[i];
        if (lam > entropy_eigen_floor) ent -= lam * std::log(lam);
    }
    return ent;
}

}  // namespace xxz
