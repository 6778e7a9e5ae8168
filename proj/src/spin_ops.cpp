#include "xxz/spin_ops.hpp"

#include "xxz/model.hpp"

namespace xxz {

namespace {

using cplx = std::complex<double>;

// Action of op on basis state |bit>: image bit and amplitude (0 if annihilated).
inline std::pair<unsigned, cplx> act(Pauli op, unsigned bit) {
    switch (op) {
        case Pauli::I: return {bit, 1.0};
        case Pauli::X: return {bit ^ 1u, 1.0};
        case Pauli::Y: return {bit ^ 1u, bit == 0 ? cplx(0.0, 1.0) : cplx(0.0, -1.0)};
        case Pauli::Z: return {bit, bit == 0 ? 1.0 : -1.0};
        case Pauli::Plus: return {0u, bit == 1 ? 1.0 : 0.0};
        case Pauli::Minus: return {1u, bit == 0 ? 1.0 : 0.0};
    }
    return {bit, 0.0};
}

inline Pauli dagger(Pauli op) {
    if (op == Pauli::Plus) return Pauli::Minus;
    if (op == Pauli::Minus) return Pauli::Plus;
    return op;
}

// Image of basis state `col` under the term; amplitude 0 if annihilated.
inline std::pair<std::int64_t, cplx> image(const PauliTerm& t, int n, std::int64_t col) {
    cplx amp = t.coeff;
    std::int64_t idx = col;
    for (auto it = t.factors.rbegin(); it != t.factors.rend(); ++it) {
        const int shift = n - 1 - it->qubit;
        const unsigned bit = static_cast<unsigned>((idx >> shift) & 1);
        const auto [nb, a] = act(it->op, bit);
        if (a == cplx{}) return {idx, 0.0};
        amp *= a;
        idx = (idx & ~(std::int64_t{1} << shift)) | (static_cast<std::int64_t>(nb) << shift);
    }
    return {idx, amp};
}

void check_same(const SpinOperator& a, const SpinOperator& b) {
    if (a.n_qubits() != b.n_qubits()) throw ValidationError("operator qubit counts differ");
}

}  // namespace

SpinOperator SpinOperator::single(int n_qubits, int qubit, Pauli op, cplx coeff) {
    SpinOperator s(n_qubits);
    s.add(coeff, {{qubit, op}});
    return s;
}

SpinOperator SpinOperator::identity(int n_qubits) {
    SpinOperator s(n_qubits);
    s.add(1.0, {});
    return s;
}

SpinOperator& SpinOperator::add(cplx coeff, std::vector<Factor> factors) {
    for (const auto& f : factors) {
        if (f.qubit < 0 || f.qubit >= n_qubits_) throw ValidationError("qubit index out of range");
    }
    terms_.push_back({coeff, std::move(factors)});
    return *this;
}

SpinOperator SpinOperator::adjoint() const {
    SpinOperator out(n_qubits_);
    for (const auto& t : terms_) {
        std::vector<Factor> f(t.factors.rbegin(), t.factors.rend());
        for (auto& x : f) x.op = dagger(x.op);
        out.terms_.push_back({std::conj(t.coeff), std::move(f)});
    }
    return out;
}

SpinOperator operator+(SpinOperator a, const SpinOperator& b) {
    check_same(a, b);
    a.terms_.insert(a.terms_.end(), b.terms_.begin(), b.terms_.end());
    return a;
}

SpinOperator operator-(SpinOperator a, const SpinOperator& b) { return std::move(a) + cplx(-1.0) * b; }

SpinOperator operator*(const SpinOperator& a, const SpinOperator& b) {
    check_same(a, b);
    SpinOperator out(a.n_qubits_);
    for (const auto& x : a.terms_) {
        for (const auto& y : b.terms_) {
            std::vector<Factor> f = x.factors;
            f.insert(f.end(), y.factors.begin(), y.factors.end());
            out.terms_.push_back({x.coeff * y.coeff, std::move(f)});
        }
    }
    return out;
}

SpinOperator operator*(cplx s, SpinOperator a) {
    for (auto& t : a.terms_) t.coeff *= s;
    return a;
}

Eigen::VectorXcd SpinOperator::apply(const Eigen::VectorXcd& x) const {
    if (x.size() != dim()) throw ValidationError("state dimension mismatch");
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
    for (std::int64_t col = 0; col < x.size(); ++col) {
        if (x[col] == cplx{}) continue;
        for (const auto& t : terms_) {
            const auto [row, amp] = image(t, n_qubits_, col);
            if (amp != cplx{}) y[row] += amp * x[col];
        }
    }
    return y;
}

Eigen::MatrixXcd SpinOperator::dense() const {
    const auto d = dim();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (std::int64_t col = 0; col < d; ++col) {
        for (const auto& t : terms_) {
            const auto [row, amp] = image(t, n_qubits_, col);
            if (amp != cplx{}) m(row, col) += amp;
        }
    }
    return m;
}

Eigen::SparseMatrix<cplx> SpinOperator::sparse() const {
    const auto d = dim();
    std::vector<Eigen::Triplet<cplx>> trip;
    for (std::int64_t col = 0; col < d; ++col) {
        for (const auto& t : terms_) {
            const auto [row, amp] = image(t, n_qubits_, col);
            if (amp != cplx{}) trip.emplace_back(row, col, amp);
        }
    }
    Eigen::SparseMatrix<cplx> m(d, d);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

SpinOperator xxz_bonds(int n_qubits, const std::vector<int>& qubits, double J, double Delta) {
    SpinOperator h(n_qubits);
    for (std::size_t j = 0; j + 1 < qubits.size(); ++j) {
        const int a = qubits[j];
        const int b = qubits[j + 1];
        h.add(0.5 * J, {{a, Pauli::X}, {b, Pauli::X}});
        h.add(0.5 * J, {{a, Pauli::Y}, {b, Pauli::Y}});
        h.add(0.5 * Delta, {{a, Pauli::Z}, {b, Pauli::Z}});
    }
    return h;
}

}  // namespace xxz
