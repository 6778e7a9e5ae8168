#include "xxz/mps.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "xxz/format.hpp"

namespace xxz {

namespace {

constexpr double sqrt2 = std::numbers::sqrt2;

MpsCoefficients base(const ModelParams& p, Gauge g) {
    validate_exact(p);
    MpsCoefficients m;
    m.N = p.N;
    m.delta = p.Delta / p.J;
    m.gamma = p.gamma / p.J;
    m.omega = p.Omega / p.J;
    m.gauge = g;
    return m;
}

// a_{k+1} = 2 Delta a_k - a_{k-1}, a_0 = 1, a_1 = Delta + i gamma/2.
std::vector<LogComplex> a_recursion(int N, double delta, double gamma) {
    std::vector<LogComplex> a(N + 1);
    a[0] = LogComplex(1.0);
    if (N >= 1) a[1] = LogComplex(cplx(delta, 0.5 * gamma));
    const LogComplex two_delta(2.0 * delta);
    for (int k = 1; k < N; ++k) a[k + 1] = two_delta * a[k] - a[k - 1];
    return a;
}

// bc_k = bc_{k-1} + a_k (Delta a_k - a_{k-1}), bc_0 = i gamma / 2.
std::vector<LogComplex> bc_recursion(const std::vector<LogComplex>& a, int N, double delta, double gamma) {
    std::vector<LogComplex> bc(N);
    if (N == 0) return bc;
    bc[0] = LogComplex(cplx(0.0, 0.5 * gamma));
    const LogComplex d(delta);
    for (int k = 1; k < N; ++k) bc[k] = bc[k - 1] + a[k] * (d * a[k] - a[k - 1]);
    return bc;
}

// c_k alpha_{k+1} = b_{k-1} alpha_{k-1} - (sqrt2/Omega)(Delta a_k - a_{k+1}) alpha_k.
void alpha_recursion(MpsCoefficients& m) {
    const int N = m.N;
    m.alpha.assign(N + 1, LogComplex{});
    m.alpha[0] = LogComplex(1.0);
    const LogComplex d(m.delta);
    const LogComplex s(sqrt2 / m.omega);
    for (int k = 0; k < N; ++k) {
        if (m.c[k].is_zero()) {
            throw NumericalError("alpha recursion: c_" + std::to_string(k) +
                                 " vanishes in this gauge; use a gauge whose c_k carry gamma");
        }
        LogComplex rhs = -(s * (d * m.a[k] - m.a[k + 1]) * m.alpha[k]);
        if (k > 0) rhs = rhs + m.b[k - 1] * m.alpha[k - 1];
        m.alpha[k + 1] = rhs / m.c[k];
    }
}

void finish_alpha(MpsCoefficients& m) {
    if (m.omega == 0.0) {
        m.zero_drive = true;
        m.alpha.assign(m.N + 1, LogComplex{});
        m.alpha[m.N] = LogComplex(1.0);
        return;
    }
    alpha_recursion(m);
}

}  // namespace

std::string to_string(Gauge g) {
    switch (g) {
        case Gauge::CUnit: return "c-unit";
        case Gauge::WeakDissipation: return "weak-dissipation";
        case Gauge::Stochastic: return "stochastic";
        case Gauge::Custom: return "custom";
    }
    return "unknown";
}

MpsCoefficients solve_coefficients(const ModelParams& p) {
    MpsCoefficients m = base(p, Gauge::CUnit);
    m.a = a_recursion(m.N, m.delta, m.gamma);
    m.bc = bc_recursion(m.a, m.N, m.delta, m.gamma);
    m.b = m.bc;
    m.c.assign(m.N, LogComplex(1.0));
    finish_alpha(m);
    return m;
}

MpsCoefficients analytic_coefficients(const ModelParams& p) {
    MpsCoefficients m = base(p, Gauge::WeakDissipation);
    const DerivedParams d = derive(p);
    if (d.regime != Regime::EasyAxis) {
        throw ValidationError("delta: closed-form coefficients need |Delta| < J (regime " + to_string(d.regime) + ")");
    }
    const double eta = d.eta.real();
    const double s = std::sin(eta);
    const double g = m.gamma;
    const auto special = match_special_point(m.delta, m.N + 1, 1e-12);
    const int N = m.N;
    m.a.resize(N + 1);
    for (int k = 0; k <= N; ++k) {
        m.a[k] = LogComplex(cplx(std::cos(k * eta), 0.5 * g * std::sin(k * eta) / s));
    }
    m.b.resize(N);
    m.c.resize(N);
    m.bc.resize(N);
    for (int k = 0; k < N; ++k) {
        const bool cut = special && (k + 1) % special->m == 0;
        m.b[k] = cut ? LogComplex{} : LogComplex(std::sin((k + 1) * eta) / sqrt2);
        m.c[k] = LogComplex(cplx(-(1.0 + g * g / (4.0 * s * s)) * std::sin(k * eta), g / s * std::cos(k * eta)) / sqrt2);
        m.bc[k] = m.b[k] * m.c[k];
    }
    finish_alpha(m);
    return m;
}

MpsCoefficients solve_incoherent(const ModelParams& p) {
    ModelParams q = p;
    q.Omega = 1.0;
    MpsCoefficients m = solve_coefficients(q);
    m.omega = p.Omega / p.J;
    m.incoherent = true;
    m.alpha.assign(m.N + 1, LogComplex{});
    m.alpha[0] = LogComplex(1.0);
    return m;
}

std::vector<double> chebyshev_alpha(double omega, double omega_c, int N) {
    if (!(omega > 0.0)) throw ValidationError("omega: degenerate drive, must be > 0");
    std::vector<double> t(N + 1);
    const double x = omega_c / omega;
    t[0] = 1.0;
    if (N >= 1) t[1] = x;
    for (int k = 1; k < N; ++k) t[k + 1] = 2.0 * x * t[k] - t[k - 1];
    return t;
}

std::vector<double> weak_dissipation_alpha(double omega, double omega_c, int N) {
    if (!(omega > 0.0)) throw ValidationError("omega: degenerate drive, must be > 0");
    std::vector<double> out(N + 1);
    const double x = omega_c / omega;
    if (x <= 1.0) {
        const double th = std::acos(x);
        for (int k = 0; k <= N; ++k) out[k] = std::pow(std::cos(k * th), 2);
    } else {
        const double th = std::acosh(x);
        for (int k = 0; k <= N; ++k) out[k] = std::pow(std::cosh(k * th), 2);
    }
    return out;
}

MpsCoefficients apply_log_gauge(const MpsCoefficients& m, std::span<const double> log_v) {
    if (static_cast<int>(log_v.size()) != m.N + 1) throw ValidationError("gauge: need N+1 entries");
    for (double x : log_v) {
        if (!std::isfinite(x)) throw ValidationError("gauge: entries must be positive and finite");
    }
    // exp(x) as an exact power of two times a mantissa in [1, 2).
    auto factor = [](double x) {
        const double e2 = std::floor(x / std::numbers::ln2);
        return LogComplex::from_parts(cplx(std::exp(x - e2 * std::numbers::ln2), 0.0), static_cast<std::int64_t>(e2));
    };
    MpsCoefficients out = m;
    out.gauge = Gauge::Custom;
    for (int k = 0; k < m.N; ++k) {
        const LogComplex ratio = factor(log_v[k + 1] - log_v[k]);
        out.c[k] = m.c[k] * ratio;
        out.b[k] = m.b[k] / ratio;
    }
    for (int k = 0; k <= m.N; ++k) out.alpha[k] = m.alpha[k] / factor(log_v[k]);
    return out;
}

MpsCoefficients apply_gauge(const MpsCoefficients& m, std::span<const double> v) {
    std::vector<double> lv(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) throw ValidationError("gauge: v_" + std::to_string(i) + " must be > 0");
        lv[i] = std::log(v[i]);
    }
    return apply_log_gauge(m, lv);
}

namespace {

enum class Step { T, One, Zero };

// Depth-first over all triplet-sector configurations with a nonzero path from
// aux index 0. Each configuration fixes the aux index, so the amplitude is a
// product of coefficients times alpha at the final index.
template <class Visit>
void walk_paths(const MpsCoefficients& m, int site, int k, const LogComplex& amp, std::vector<Step>& path,
                Visit&& visit) {
    if (site == m.N) {
        visit(amp * m.alpha[k], std::as_const(path));
        return;
    }
    path[site] = Step::T;
    walk_paths(m, site + 1, k, amp * m.a[k], path, visit);
    if (k >= 1) {
        path[site] = Step::One;
        walk_paths(m, site + 1, k - 1, amp * m.b[k - 1], path, visit);
    }
    if (k + 1 <= m.N) {
        path[site] = Step::Zero;
        walk_paths(m, site + 1, k + 1, amp * m.c[k], path, visit);
    }
}

}  // namespace

DoubledState build_doubled_state(const MpsCoefficients& m) {
    if (m.N > max_doubled_sites) throw CapacityError("doubled state: N exceeds " + std::to_string(max_doubled_sites));
    const int N = m.N;
    const std::int64_t dim = std::int64_t{1} << (2 * N);
    std::vector<std::pair<std::int64_t, LogComplex>> entries;

    // Local dimer index 2*bitA + bitB with bit 0 = up: T -> (0,1),(1,0) with
    // weight 1/sqrt2 each; One -> up up (0); Zero -> down down (3).
    std::vector<Step> path(N, Step::T);
    auto leaf = [&](const LogComplex& amp, const std::vector<Step>& steps) {
        int n_t = 0;
        for (Step st : steps) n_t += (st == Step::T);
        const LogComplex w = amp * LogComplex(std::pow(0.5, 0.5 * n_t));
        for (int mask = 0; mask < (1 << n_t); ++mask) {
            std::int64_t idx = 0;
            int t = 0;
            for (int site = 0; site < N; ++site) {
                int code = steps[site] == Step::One ? 0 : 3;
                if (steps[site] == Step::T) code = ((mask >> t++) & 1) ? 2 : 1;
                idx = (idx << 2) | code;
            }
            entries.emplace_back(idx, w);
        }
    };
    walk_paths(m, 0, 0, LogComplex(1.0), path, leaf);

    double top = -std::numeric_limits<double>::infinity();
    for (const auto& e : entries) top = std::max(top, e.second.log_abs());
    DoubledState st;
    st.N = N;
    st.amplitudes = Eigen::VectorXcd::Zero(dim);
    st.log_scale = std::isfinite(top) ? top : 0.0;
    const auto shift = static_cast<std::int64_t>(std::floor(st.log_scale / std::numbers::ln2));
    st.log_scale = static_cast<double>(shift) * std::numbers::ln2;
    for (const auto& [idx, amp] : entries) {
        st.amplitudes[idx] += LogComplex::from_parts(amp.mantissa(), amp.exponent() - shift).value();
    }
    st.norm = st.amplitudes.norm();
    if (!(st.norm > 0.0)) throw NumericalError("doubled state has zero norm");
    return st;
}

CholeskyFactor build_cholesky(const MpsCoefficients& m) {
    if (m.N > max_cholesky_sites) throw CapacityError("cholesky factor: N exceeds " + std::to_string(max_cholesky_sites));
    const int N = m.N;
    const std::int64_t dim = std::int64_t{1} << N;
    CholeskyFactor f;
    f.N = N;
    f.psi = Eigen::MatrixXcd::Zero(dim, dim);

    // Per site (row bit, col bit): T -> (0,0) and (1,1); Zero -> (1,0); One -> (0,1).
    std::vector<Step> path(N, Step::T);
    auto leaf = [&](const LogComplex& amp, const std::vector<Step>& steps) {
        int n_t = 0;
        for (Step st : steps) n_t += (st == Step::T);
        const cplx v = (amp * LogComplex(std::pow(2.0, 0.5 * (N - n_t)))).value();
        for (int mask = 0; mask < (1 << n_t); ++mask) {
            std::int64_t r = 0;
            std::int64_t c = 0;
            int t = 0;
            for (int site = 0; site < N; ++site) {
                int rb = 0;
                int cb = 0;
                if (steps[site] == Step::T) {
                    rb = cb = (mask >> t++) & 1;
                } else if (steps[site] == Step::One) {
                    cb = 1;
                } else {
                    rb = 1;
                }
                r = (r << 1) | rb;
                c = (c << 1) | cb;
            }
            f.psi(r, c) += v;
        }
    };
    walk_paths(m, 0, 0, LogComplex(1.0), path, leaf);
    return f;
}

Eigen::MatrixXcd density_from_cholesky(const CholeskyFactor& f) {
    Eigen::MatrixXcd rho = f.psi * f.psi.adjoint();
    const cplx tr = rho.trace();
    if (!(std::abs(tr) > 0.0) || !std::isfinite(std::abs(tr))) throw NumericalError("cholesky factor: trace not finite and positive");
    rho /= tr;
    return rho;
}

std::string coefficients_csv(const MpsCoefficients& m) {
    std::ostringstream os;
    os << "k,a_re,a_im,bc_re,bc_im,b_re,b_im,c_re,c_im,alpha_re,alpha_im\n";
    const auto put = [&os](const std::vector<LogComplex>& v, int k) {
        if (k < static_cast<int>(v.size())) {
            const cplx z = v[k].value();
            os << ',' << format_double(z.real()) << ',' << format_double(z.imag());
        } else {
            os << ",nan,nan";
        }
    };
    for (int k = 0; k <= m.N; ++k) {
        os << k;
        put(m.a, k);
        put(m.bc, k);
        put(m.b, k);
        put(m.c, k);
        put(m.alpha, k);
        os << '\n';
    }
    return os.str();
}

}  // namespace xxz
