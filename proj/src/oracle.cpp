#include "xxz/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <boost/numeric/odeint.hpp>

namespace xxz {

namespace {

using cplx = std::complex<double>;
using Triplet = Eigen::Triplet<cplx>;

constexpr cplx I1{0.0, 1.0};

int qa(int site) { return 2 * (site - 1); }
int qb(int site) { return 2 * (site - 1) + 1; }

bool is_doubled(Variant v) { return v == Variant::DoubledCoherent || v == Variant::DoubledIncoherent; }

// Appends (A kron B) * scale to the triplet list; A, B sparse.
void kron_into(const SparseC& a, const SparseC& b, cplx scale, std::vector<Triplet>& out) {
    const Eigen::Index rb = b.rows();
    const Eigen::Index cb = b.cols();
    for (int ka = 0; ka < a.outerSize(); ++ka) {
        for (SparseC::InnerIterator ia(a, ka); ia; ++ia) {
            for (int kb = 0; kb < b.outerSize(); ++kb) {
                for (SparseC::InnerIterator ib(b, kb); ib; ++ib) {
                    out.emplace_back(ia.row() * rb + ib.row(), ia.col() * cb + ib.col(), scale * ia.value() * ib.value());
                }
            }
        }
    }
}

SparseC sparse_identity(Eigen::Index d) {
    SparseC m(d, d);
    m.setIdentity();
    return m;
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::CoherentDrive: return "coherent";
        case Variant::IncoherentPumpLoss: return "incoherent";
        case Variant::DoubledCoherent: return "doubled-coherent";
        case Variant::DoubledIncoherent: return "doubled-incoherent";
        case Variant::ThermalCoherent: return "thermal";
    }
    return "unknown";
}

Variant parse_variant(const std::string& s) {
    for (Variant v : {Variant::CoherentDrive, Variant::IncoherentPumpLoss, Variant::DoubledCoherent,
                      Variant::DoubledIncoherent, Variant::ThermalCoherent}) {
        if (s == to_string(v)) return v;
    }
    throw ValidationError("variant: unknown value '" + s + "'");
}

SpinOperator chain_hamiltonian(const ModelParams& p) {
    std::vector<int> q(p.N);
    for (int i = 0; i < p.N; ++i) q[i] = i;
    return xxz_bonds(p.N, q, p.J, p.Delta);
}

SpinOperator doubled_hamiltonian(const ModelParams& p, bool incoherent) {
    const int n = 2 * p.N;
    std::vector<int> qA(p.N), qB(p.N);
    for (int i = 1; i <= p.N; ++i) {
        qA[i - 1] = qa(i);
        qB[i - 1] = qb(i);
    }
    SpinOperator h = xxz_bonds(n, qA, p.J, p.Delta) - xxz_bonds(n, qB, p.J, p.Delta);
    const cplx g = -I1 * p.gamma / 2.0;
    h.add(g, {{qa(1), Pauli::Plus}, {qb(1), Pauli::Minus}});
    h.add(-g, {{qa(1), Pauli::Minus}, {qb(1), Pauli::Plus}});
    if (incoherent) {
        h.add(g, {{qa(p.N), Pauli::Minus}, {qb(p.N), Pauli::Plus}});
        h.add(-g, {{qa(p.N), Pauli::Plus}, {qb(p.N), Pauli::Minus}});
    } else {
        h.add(p.Omega / 2.0, {{qa(p.N), Pauli::X}});
        h.add(-p.Omega / 2.0, {{qb(p.N), Pauli::X}});
    }
    return h;
}

std::vector<SpinOperator> doubled_jumps(const ModelParams& p, bool incoherent) {
    const int n = 2 * p.N;
    std::vector<SpinOperator> out;
    out.push_back(SpinOperator::single(n, qa(1), Pauli::Minus) - SpinOperator::single(n, qb(1), Pauli::Minus));
    if (incoherent) {
        out.push_back(SpinOperator::single(n, qa(p.N), Pauli::Plus) -
                      SpinOperator::single(n, qb(p.N), Pauli::Plus));
    }
    return out;
}

DenseLindblad liouvillian_from(const Eigen::MatrixXcd& h, std::vector<std::pair<Eigen::MatrixXcd, double>> jumps) {
    const Eigen::Index d = h.rows();
    if (h.cols() != d) throw ValidationError("hamiltonian must be square");
    const SparseC id = sparse_identity(d);
    const SparseC hs = h.sparseView();
    std::vector<Triplet> tr;
    // -i (I kron H - H^T kron I)
    kron_into(id, hs, -I1, tr);
    kron_into(SparseC(hs.transpose()), id, I1, tr);
    for (const auto& [j, rate] : jumps) {
        if (j.rows() != d || j.cols() != d) throw ValidationError("jump operator has wrong dimension");
        const SparseC js = j.sparseView();
        const Eigen::MatrixXcd jdj_dense = j.adjoint() * j;
        const SparseC jdj = jdj_dense.sparseView();
        kron_into(SparseC(js.conjugate()), js, rate, tr);
        kron_into(id, jdj, -0.5 * rate, tr);
        kron_into(SparseC(jdj.transpose()), id, -0.5 * rate, tr);
    }
    DenseLindblad l;
    l.dim = d;
    l.n_qubits = static_cast<int>(std::lround(std::log2(static_cast<double>(d))));
    l.superop.resize(d * d, d * d);
    l.superop.setFromTriplets(tr.begin(), tr.end());
    l.superop.prune(cplx{});
    l.hamiltonian = h;
    l.jumps = std::move(jumps);
    return l;
}

DenseLindblad build_liouvillian(const ModelParams& p, Variant v) {
    validate(p);
    if (p.n_th != 0.0 && v != Variant::ThermalCoherent) {
        throw ValidationError("nth: nonzero thermal occupation requires the thermal variant");
    }
    if (is_doubled(v)) {
        if (p.N > max_doubled_oracle_sites) {
            throw CapacityError("n: doubled oracle supports N <= " + std::to_string(max_doubled_oracle_sites));
        }
    } else if (p.N > max_oracle_sites) {
        throw CapacityError("n: oracle supports N <= " + std::to_string(max_oracle_sites));
    }

    const int n = p.N;
    std::vector<std::pair<Eigen::MatrixXcd, double>> jumps;
    Eigen::MatrixXcd h;
    switch (v) {
        case Variant::CoherentDrive:
        case Variant::ThermalCoherent: {
            SpinOperator hs = chain_hamiltonian(p);
            hs.add(p.Omega / 2.0, {{n - 1, Pauli::X}});
            h = hs.dense();
            jumps.emplace_back(SpinOperator::single(n, 0, Pauli::Minus).dense(), (1.0 + p.n_th) * p.gamma);
            if (p.n_th > 0.0) jumps.emplace_back(SpinOperator::single(n, 0, Pauli::Plus).dense(), p.n_th * p.gamma);
            break;
        }
        case Variant::IncoherentPumpLoss:
            h = chain_hamiltonian(p).dense();
            jumps.emplace_back(SpinOperator::single(n, 0, Pauli::Minus).dense(), p.gamma);
            jumps.emplace_back(SpinOperator::single(n, n - 1, Pauli::Plus).dense(), p.gamma);
            break;
        case Variant::DoubledCoherent:
        case Variant::DoubledIncoherent: {
            const bool inc = v == Variant::DoubledIncoherent;
            h = doubled_hamiltonian(p, inc).dense();
            for (const auto& j : doubled_jumps(p, inc)) jumps.emplace_back(j.dense(), p.gamma);
            break;
        }
    }
    DenseLindblad l = liouvillian_from(h, std::move(jumps));
    l.variant = v;
    return l;
}

Eigen::MatrixXcd apply_liouvillian(const DenseLindblad& l, const Eigen::MatrixXcd& rho) {
    const Eigen::Map<const Eigen::VectorXcd> x(rho.data(), rho.size());
    Eigen::VectorXcd y = l.superop * x;
    return Eigen::Map<Eigen::MatrixXcd>(y.data(), l.dim, l.dim);
}

SteadyState steady_state(const DenseLindblad& l, bool with_gap) {
    const Eigen::Index d = l.dim;
    const Eigen::Index d2 = d * d;
    SteadyState out;

    if (d2 <= dense_kernel_limit) {
        const Eigen::MatrixXcd dense(l.superop);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(dense);
        qr.setThreshold(kernel_tolerance);
        out.kernel_dim = static_cast<int>(d2 - qr.rank());
        if (*out.kernel_dim != 1) {
            throw NumericalError("steady state: kernel dimension " + std::to_string(*out.kernel_dim) + " != 1");
        }
        if (with_gap) {
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense, false);
            std::vector<double> re(d2);
            for (Eigen::Index i = 0; i < d2; ++i) re[i] = std::abs(es.eigenvalues()[i].real());
            std::sort(re.begin(), re.end());
            out.gap = re.size() > 1 ? re[1] : 0.0;
        }
    } else if (with_gap) {
        throw CapacityError("steady state: gap only available for superoperator dimension <= 1024");
    }

    // Row 0 of L (a redundant equation, since the trace is conserved) is
    // replaced by Tr(rho) = 1.
    std::vector<Triplet> tr;
    tr.reserve(l.superop.nonZeros() + d);
    for (int k = 0; k < l.superop.outerSize(); ++k) {
        for (SparseC::InnerIterator it(l.superop, k); it; ++it) {
            if (it.row() != 0) tr.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (Eigen::Index i = 0; i < d; ++i) tr.emplace_back(0, i * (d + 1), 1.0);
    SparseC a(d2, d2);
    a.setFromTriplets(tr.begin(), tr.end());
    a.makeCompressed();
    Eigen::SparseLU<SparseC> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw NumericalError("steady state: constrained system is singular");
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d2);
    rhs[0] = 1.0;
    Eigen::VectorXcd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("steady state: solve failed");

    Eigen::MatrixXcd rho = Eigen::Map<Eigen::MatrixXcd>(x.data(), d, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();
    out.residual = apply_liouvillian(l, rho).cwiseAbs().maxCoeff();
    if (!(out.residual <= kernel_tolerance)) {
        std::ostringstream msg;
        msg << "steady state: residual " << out.residual << " exceeds " << kernel_tolerance;
        throw NumericalError(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    out.rank = static_cast<int>((es.eigenvalues().array() > rank_tolerance).count());
    out.full_rank = out.rank == d;
    out.rho = std::move(rho);
    return out;
}

std::vector<cplx> two_time_correlator(const DenseLindblad& l, const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& x,
                                      const Eigen::MatrixXcd& y, const std::vector<double>& t_grid, double tol) {
    if (t_grid.empty()) return {};
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
            throw ValidationError("t_grid must be non-negative and strictly increasing");
        }
    }
    const Eigen::Index d = l.dim;
    if (rho.rows() != d || x.rows() != d || y.rows() != d) throw ValidationError("operator dimension mismatch");

    using State = std::vector<cplx>;
    const Eigen::MatrixXcd start = y * rho;
    State s(start.data(), start.data() + start.size());
    const Eigen::MatrixXcd xt = x.transpose();
    const Eigen::Map<const Eigen::VectorXcd> xv(xt.data(), xt.size());

    std::vector<cplx> out;
    out.reserve(t_grid.size());
    // Tr(X M) = sum_ij X_ji M_ij = <vec(X^T), vec(M)> without conjugation.
    auto observe = [&](const State& st, double) {
        const Eigen::Map<const Eigen::VectorXcd> m(st.data(), static_cast<Eigen::Index>(st.size()));
        out.push_back((xv.array() * m.array()).sum());
    };
    auto rhs = [&](const State& st, State& ds, double) {
        const Eigen::Map<const Eigen::VectorXcd> m(st.data(), static_cast<Eigen::Index>(st.size()));
        Eigen::Map<Eigen::VectorXcd> dm(ds.data(), static_cast<Eigen::Index>(ds.size()));
        dm.noalias() = l.superop * m;
    };

    namespace ode = boost::numeric::odeint;
    if (t_grid.size() == 1 && t_grid.front() == 0.0) {
        observe(s, 0.0);
        return out;
    }
    auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<State>());
    const double dt0 = std::min(0.01, t_grid.back() > 0 ? t_grid.back() / 10.0 : 0.01);
    try {
        ode::integrate_times(stepper, rhs, s, t_grid.begin(), t_grid.end(), dt0, observe,
                             ode::max_step_checker(100000));
    } catch (const ode::step_adjustment_error& e) {
        throw NumericalError(std::string("correlator: step adjustment failed: ") + e.what());
    } catch (const ode::no_progress_error& e) {
        throw NumericalError(std::string("correlator: integrator stalled after ") + std::to_string(out.size()) +
                             " observations: " + e.what());
    }
    if (out.size() != t_grid.size()) throw NumericalError("correlator: integrator returned too few samples");
    return out;
}

OnsagerPair onsager_operator_pair(const ModelParams& p) {
    validate(p);
    if (p.N > max_oracle_sites + 1) throw CapacityError("n: operator pair check supports N <= 6");
    const int n = p.N;
    SpinOperator heff = chain_hamiltonian(p);
    heff.add(p.Omega / 2.0, {{n - 1, Pauli::X}});
    heff.add(I1 * p.gamma / 2.0, {{0, Pauli::Plus}, {0, Pauli::Minus}});

    OnsagerPair pair{SpinOperator::single(n, 0, Pauli::Minus), SpinOperator(n), 0.0};
    pair.y.add(1.0, {{0, Pauli::Minus}, {1, Pauli::Minus}});

    const Eigen::MatrixXcd h = heff.dense();
    const Eigen::MatrixXcd sm = pair.x.dense();
    const Eigen::MatrixXcd inner = h * sm - sm * h;
    const Eigen::MatrixXcd nested = -0.5 * (inner * sm - sm * inner);
    pair.identity_residual = (nested - p.J * pair.y.dense()).cwiseAbs().maxCoeff();
    if (!(pair.identity_residual <= 1e-12)) {
        throw NumericalError("operator pair: nested commutator identity violated by " +
                             std::to_string(pair.identity_residual));
    }
    return pair;
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("trace distance: shape mismatch");
    const Eigen::MatrixXcd diff = a - b;
    const Eigen::MatrixXcd herm = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Eigen::MatrixXcd trace_absorber(const Eigen::VectorXcd& psi, int n_sites) {
    const Eigen::Index d = Eigen::Index{1} << n_sites;
    if (psi.size() != d * d) throw ValidationError("trace_absorber: state has wrong dimension");
    // amp(a, b) with a, b the A and B configurations.
    Eigen::MatrixXcd amp(d, d);
    for (Eigen::Index idx = 0; idx < d * d; ++idx) {
        Eigen::Index a = 0;
        Eigen::Index b = 0;
        for (int s = 0; s < n_sites; ++s) {
            const int shift_a = 2 * n_sites - 1 - 2 * s;
            a = (a << 1) | ((idx >> shift_a) & 1);
            b = (b << 1) | ((idx >> (shift_a - 1)) & 1);
        }
        amp(a, b) = psi[idx];
    }
    return amp * amp.adjoint();
}

Eigen::MatrixXcd trace_absorber(const Eigen::MatrixXcd& rho, int n_sites) {
    const Eigen::Index d = Eigen::Index{1} << n_sites;
    if (rho.rows() != d * d || rho.cols() != d * d) throw ValidationError("trace_absorber: state has wrong dimension");
    auto split = [n_sites](Eigen::Index idx, Eigen::Index& a, Eigen::Index& b) {
        a = 0;
        b = 0;
        for (int s = 0; s < n_sites; ++s) {
            const int shift_a = 2 * n_sites - 1 - 2 * s;
            a = (a << 1) | ((idx >> shift_a) & 1);
            b = (b << 1) | ((idx >> (shift_a - 1)) & 1);
        }
    };
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index i = 0; i < d * d; ++i) {
        Eigen::Index ai, bi;
        split(i, ai, bi);
        for (Eigen::Index j = 0; j < d * d; ++j) {
            Eigen::Index aj, bj;
            split(j, aj, bj);
            if (bi == bj) out(ai, aj) += rho(i, j);
        }
    }
    return out;
}

double trace_preservation_residual(const DenseLindblad& l) {
    const Eigen::Index d = l.dim;
    Eigen::VectorXcd id = Eigen::VectorXcd::Zero(d * d);
    for (Eigen::Index i = 0; i < d; ++i) id[i * (d + 1)] = 1.0;
    const Eigen::VectorXcd left = l.superop.adjoint() * id;
    return left.cwiseAbs().maxCoeff();
}

}  // namespace xxz
