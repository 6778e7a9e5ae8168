#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace xxz {

// Single-qubit operators with at most one nonzero per column. Basis bit 0 is
// spin up (sigma^z = +1); qubit 0 is the most significant bit of an index.
enum class Pauli : std::uint8_t { I, X, Y, Z, Plus, Minus };

struct Factor {
    int qubit = 0;
    Pauli op = Pauli::I;
};

// coeff * f_0 f_1 ... f_{m-1}; factors may repeat a qubit.
struct PauliTerm {
    std::complex<double> coeff{1.0, 0.0};
    std::vector<Factor> factors;
};

// Sum of Pauli products on a fixed number of qubits, applied matrix-free.
class SpinOperator {
public:
    explicit SpinOperator(int n_qubits) : n_qubits_(n_qubits) {}

    static SpinOperator single(int n_qubits, int qubit, Pauli op, std::complex<double> coeff = 1.0);
    static SpinOperator identity(int n_qubits);

    SpinOperator& add(std::complex<double> coeff, std::vector<Factor> factors);

    [[nodiscard]] int n_qubits() const { return n_qubits_; }
    [[nodiscard]] std::int64_t dim() const { return std::int64_t{1} << n_qubits_; }
    [[nodiscard]] const std::vector<PauliTerm>& terms() const { return terms_; }

    [[nodiscard]] SpinOperator adjoint() const;

    friend SpinOperator operator+(SpinOperator a, const SpinOperator& b);
    friend SpinOperator operator-(SpinOperator a, const SpinOperator& b);
    friend SpinOperator operator*(const SpinOperator& a, const SpinOperator& b);
    friend SpinOperator operator*(std::complex<double> s, SpinOperator a);

    [[nodiscard]] Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
    [[nodiscard]] Eigen::MatrixXcd dense() const;
    [[nodiscard]] Eigen::SparseMatrix<std::complex<double>> sparse() const;

private:
    int n_qubits_;
    std::vector<PauliTerm> terms_;
};

// XXZ bonds 0.5 * sum_j [J (X X + Y Y) + Delta Z Z] over consecutive pairs of
// the listed qubits.
SpinOperator xxz_bonds(int n_qubits, const std::vector<int>& qubits, double J, double Delta);

}  // namespace xxz
