#include "xxz/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace xxz {

namespace {

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw ValidationError(std::string(field) + ": " + what);
}

}  // namespace

void validate(const ModelParams& p) {
    require(std::isfinite(p.J) && p.J > 0.0, "J", "must be finite and > 0");
    require(std::isfinite(p.Delta), "delta", "must be finite");
    require(std::isfinite(p.Omega) && p.Omega >= 0.0, "omega", "must be finite and >= 0");
    require(std::isfinite(p.gamma) && p.gamma > 0.0, "gamma", "must be finite and > 0");
    require(p.N >= 2, "n", "must be >= 2");
    require(std::isfinite(p.n_th) && p.n_th >= 0.0, "nth", "must be finite and >= 0");
}

void validate_exact(const ModelParams& p) {
    validate(p);
    require(p.n_th == 0.0, "nth", "exact solution requires zero thermal occupation");
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::EasyAxis: return "easy-axis";
        case Regime::Heisenberg: return "heisenberg";
        case Regime::Insulating: return "insulating";
    }
    return "unknown";
}

DerivedParams derive(const ModelParams& p) {
    validate(p);
    const double x = p.Delta / p.J;
    DerivedParams d;
    if (std::abs(std::abs(x) - 1.0) < heisenberg_tolerance) {
        d.regime = Regime::Heisenberg;
        d.eta = x > 0 ? 0.0 : std::numbers::pi;
    } else if (std::abs(x) < 1.0) {
        d.regime = Regime::EasyAxis;
        d.eta = std::acos(x);
        d.omega_c = std::sqrt(p.J * p.J - p.Delta * p.Delta);
    } else {
        // cos(i t) = cosh t; negative Delta picks up a shift by pi.
        d.regime = Regime::Insulating;
        const double t = std::acosh(std::abs(x));
        d.eta = x > 0 ? std::complex<double>(0.0, t) : std::complex<double>(std::numbers::pi, t);
    }
    return d;
}

std::vector<SpecialPoint> nearest_special_points(double delta_over_j, int max_m) {
    if (!(std::abs(delta_over_j) < 1.0)) throw ValidationError("delta: |delta/J| must be < 1");
    std::vector<SpecialPoint> out;
    for (int m = 2; m <= max_m; ++m) {
        for (int l = 1; l < m; ++l) {
            if (std::gcd(l, m) != 1) continue;
            const double v = std::cos(std::numbers::pi * l / m);
            out.push_back({l, m, v, std::abs(v - delta_over_j)});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const SpecialPoint& a, const SpecialPoint& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.m != b.m ? a.m < b.m : a.l < b.l;
    });
    return out;
}

std::optional<SpecialPoint> match_special_point(double delta_over_j, int max_m, double tol) {
    if (!(std::abs(delta_over_j) < 1.0)) return std::nullopt;
    const double t = std::acos(delta_over_j) / std::numbers::pi;
    for (int m = 2; m <= max_m; ++m) {
        const int l = static_cast<int>(std::lround(t * m));
        if (l < 1 || l >= m || std::gcd(l, m) != 1) continue;
        const double v = std::cos(std::numbers::pi * l / m);
        if (std::abs(v - delta_over_j) <= tol) return SpecialPoint{l, m, v, std::abs(v - delta_over_j)};
    }
    return std::nullopt;
}

}  // namespace xxz
