#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xxz {

// Bad input: maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested size exceeds what a dense path can hold.
class CapacityError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Numerical breakdown on valid input: maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One chain instance. Energies share a common unit; only ratios to J matter.
struct ModelParams {
    double J = 1.0;
    double Delta = 0.0;
    double Omega = 0.0;
    double gamma = 1.0;
    int N = 2;
    double n_th = 0.0;
};

// Throws ValidationError naming the first offending field.
void validate(const ModelParams& p);
// Also rejects n_th != 0; exact-solution paths hold only at zero temperature.
void validate_exact(const ModelParams& p);

enum class Regime { EasyAxis, Heisenberg, Insulating };

std::string to_string(Regime r);

struct DerivedParams {
    std::complex<double> eta;       // cos(eta) = Delta/J
    std::optional<double> omega_c;  // present iff |Delta| < J
    Regime regime = Regime::EasyAxis;
};

inline constexpr double heisenberg_tolerance = 1e-12;

DerivedParams derive(const ModelParams& p);

struct SpecialPoint {
    int l = 1;
    int m = 2;
    double delta_over_j = 0.0;  // cos(l pi / m)
    double distance = 0.0;      // |delta_over_j - query|

    friend bool operator==(const SpecialPoint& x, const SpecialPoint& y) { return x.l == y.l && x.m == y.m; }
};

// All reduced l/m in (0, 1) with m <= max_m, sorted by distance to the query.
std::vector<SpecialPoint> nearest_special_points(double delta_over_j, int max_m);

// Returns the special point whose anisotropy equals delta_over_j within tol.
std::optional<SpecialPoint> match_special_point(double delta_over_j, int max_m, double tol);

}  // namespace xxz
