#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace xxz {

// <m>(N, Omega) for fixed Delta, gamma.
using MagnetizationFn = std::function<double(int N, double omega)>;

// Central differences d<m>/dOmega at each grid point with the given step.
std::vector<double> susceptibility(const MagnetizationFn& m, int N, std::span<const double> omega, double step);

struct CrossingEstimate {
    double omega_c = 0.0;              // mean over adjacent size pairs
    std::vector<double> pair_estimates;  // one per (sizes[i], sizes[i+1])
    double spread = 0.0;               // max |pair - mean|
};

// For each adjacent pair, the first +/- sign change of chi_large - chi_small
// after the peak of chi_large, linearly interpolated. chi[i] belongs to
// sizes[i] (ascending). Fewer than 3 sizes: ValidationError. No bracketed
// crossing: NumericalError listing the differences at the grid ends.
CrossingEstimate susceptibility_crossing(std::span<const int> sizes, std::span<const double> omega,
                                         const std::vector<std::vector<double>>& chi);

// |<m>| on a shared ascending delta grid per size.
struct CollapseData {
    std::vector<int> sizes;
    std::vector<double> delta;
    std::vector<std::vector<double>> abs_m;  // [size][delta]
};

// Mean squared mismatch between N^a |m| of each size and a monotone cubic
// interpolant through every other size at the same delta N^b, over points
// inside the interpolant's domain, divided by the mean of (N^a |m|)^2.
double collapse_objective(const CollapseData& d, double a, double b);

struct CollapseGrid {
    double a_lo = 0.2, a_hi = 1.0;
    double b_lo = 0.3, b_hi = 1.2;
    double step = 0.01;
    double refine_halfwidth = 0.01;
    double refine_step = 0.0005;
};

struct CollapseFit {
    double a = 0.0, b = 0.0, beta = 0.0;
    double residual = 0.0;
    // Leave-one-delta-out jackknife; zero when not requested.
    double a_err = 0.0, b_err = 0.0, beta_err = 0.0;
};

// Grid search on [lo, hi) then a finer grid around the best point.
CollapseFit fit_collapse(const CollapseData& d, const CollapseGrid& grid = {}, bool jackknife = true);

struct PowerLawFit {
    double exponent = 0.0;
    double log_prefactor = 0.0;
    double r_squared = 0.0;
    double x_lo = 0.0, x_hi = 0.0;
    int points = 0;
};

// Least squares on log y = c0 + exponent * log x over points with x in
// [x_lo, x_hi]; every selected y must be > 0. Needs 3 points.
PowerLawFit power_law_fit(std::span<const double> x, std::span<const double> y, double x_lo, double x_hi);

struct LinearFit {
    double intercept = 0.0, slope = 0.0, r_squared = 0.0;
    double rss = 0.0;  // residual sum of squares
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Full finite-size analysis at fixed Delta, gamma.
struct CriticalFitSettings {
    std::vector<int> sizes;                // ascending, at least 3
    double omega_c_ref = 0.0;              // delta = 1 - Omega / omega_c_ref
    std::vector<double> crossing_grid;     // Omega / omega_c_ref
    double fd_step = 1e-3;                 // times omega_c_ref
    std::vector<double> collapse_delta;    // ascending
    CollapseGrid grid;
    bool jackknife = true;
};

struct ScalingFit {
    double a = 0.0, b = 0.0, beta = 0.0;
    double a_err = 0.0, b_err = 0.0, beta_err = 0.0;
    double omega_c_est = 0.0;
    CrossingEstimate crossing;
    std::pair<double, double> fit_window{0.0, 0.0};  // delta range of the collapse
    double residual = 0.0;
    CollapseData collapse;
};

ScalingFit fit_critical(const MagnetizationFn& m, const CriticalFitSettings& s);

// Strict interior local maxima y[i-1] < y[i] > y[i+1].
std::vector<std::size_t> local_maxima(std::span<const double> y);

struct PeakWidth {
    std::size_t index = 0;  // peak position on the grid
    double center = 0.0;
    double height = 0.0;
    double baseline = 0.0;  // higher of the two flanking minima
    double fwhm = 0.0;      // width at baseline + (height - baseline) / 2
};

// Climbs from the grid point nearest `near` to the local maximum, then
// interpolates the half-height crossings linearly. NumericalError if a flank
// never drops below half height.
PeakWidth peak_fwhm(std::span<const double> x, std::span<const double> y, double near);

std::vector<double> linspace(double lo, double hi, int n);
std::vector<double> geomspace(double lo, double hi, int n);

}  // namespace xxz
