#include "xxz/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

// Boost 1.74 pchip calls unqualified isnan; <math.h> puts it in the global namespace.
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/statistics/linear_regression.hpp>

#include "xxz/model.hpp"

namespace xxz {

namespace {

struct GridPoint {
    double cost = std::numeric_limits<double>::infinity();
    double a = 0.0;
    double b = 0.0;
};

// Axis values lo, lo + step, ... strictly below hi, computed by index so the
// grid is identical on every platform.
std::vector<double> axis(double lo, double hi, double step) {
    std::vector<double> v;
    for (int i = 0;; ++i) {
        const double x = lo + i * step;
        if (x >= hi - 1e-12 * step) break;
        v.push_back(x);
    }
    return v;
}

GridPoint search(const CollapseData& d, std::span<const double> as, std::span<const double> bs) {
    GridPoint best;
    for (double a : as) {
        for (double b : bs) {
            const double c = collapse_objective(d, a, b);
            if (c < best.cost) best = {c, a, b};
        }
    }
    return best;
}

GridPoint refine(const CollapseData& d, const GridPoint& start, const CollapseGrid& g) {
    const double hw = g.refine_halfwidth;
    const auto as = axis(start.a - hw, start.a + hw + 0.5 * g.refine_step, g.refine_step);
    const auto bs = axis(start.b - hw, start.b + hw + 0.5 * g.refine_step, g.refine_step);
    const GridPoint r = search(d, as, bs);
    return r.cost <= start.cost ? r : start;
}

CollapseData drop_delta(const CollapseData& d, std::size_t skip) {
    CollapseData out;
    out.sizes = d.sizes;
    for (std::size_t j = 0; j < d.delta.size(); ++j) {
        if (j != skip) out.delta.push_back(d.delta[j]);
    }
    out.abs_m.resize(d.abs_m.size());
    for (std::size_t i = 0; i < d.abs_m.size(); ++i) {
        for (std::size_t j = 0; j < d.delta.size(); ++j) {
            if (j != skip) out.abs_m[i].push_back(d.abs_m[i][j]);
        }
    }
    return out;
}

double jackknife_error(std::span<const double> samples) {
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s / n;
    double acc = 0.0;
    for (double s : samples) acc += (s - mean) * (s - mean);
    return std::sqrt((n - 1.0) / n * acc);
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 2) throw ValidationError("linspace: need at least 2 points");
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

std::vector<double> geomspace(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > 0.0)) throw ValidationError("geomspace: bounds must be > 0");
    std::vector<double> v = linspace(std::log(lo), std::log(hi), n);
    for (double& x : v) x = std::exp(x);
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::vector<double> susceptibility(const MagnetizationFn& m, int N, std::span<const double> omega, double step) {
    if (!(step > 0.0)) throw ValidationError("step: must be > 0");
    std::vector<double> chi(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) {
        chi[i] = (m(N, omega[i] + step) - m(N, omega[i] - step)) / (2.0 * step);
    }
    return chi;
}

CrossingEstimate susceptibility_crossing(std::span<const int> sizes, std::span<const double> omega,
                                         const std::vector<std::vector<double>>& chi) {
    if (sizes.size() < 3) throw ValidationError("sizes: crossing analysis needs at least 3 system sizes");
    if (chi.size() != sizes.size()) throw ValidationError("chi: one curve per size required");
    for (const auto& c : chi) {
        if (c.size() != omega.size()) throw ValidationError("chi: curve length differs from the omega grid");
    }
    CrossingEstimate out;
    for (std::size_t p = 0; p + 1 < sizes.size(); ++p) {
        const auto& small = chi[p];
        const auto& large = chi[p + 1];
        const std::size_t peak = static_cast<std::size_t>(std::max_element(large.begin(), large.end()) - large.begin());
        bool found = false;
        for (std::size_t i = peak; i + 1 < omega.size(); ++i) {
            const double d0 = large[i] - small[i];
            const double d1 = large[i + 1] - small[i + 1];
            if (d0 > 0.0 && d1 <= 0.0) {
                const double t = d0 / (d0 - d1);
                out.pair_estimates.push_back(omega[i] + t * (omega[i + 1] - omega[i]));
                found = true;
                break;
            }
        }
        if (!found) {
            std::ostringstream msg;
            msg << "crossing: no bracketed sign change for N = " << sizes[p] << ", " << sizes[p + 1]
                << "; chi difference " << large.front() - small.front() << " at Omega = " << omega.front() << ", "
                << large[peak] - small[peak] << " at the peak Omega = " << omega[peak] << ", "
                << large.back() - small.back() << " at Omega = " << omega.back();
            throw NumericalError(msg.str());
        }
    }
    double mean = 0.0;
    for (double x : out.pair_estimates) mean += x;
    mean /= static_cast<double>(out.pair_estimates.size());
    out.omega_c = mean;
    for (double x : out.pair_estimates) out.spread = std::max(out.spread, std::abs(x - mean));
    return out;
}

double collapse_objective(const CollapseData& d, double a, double b) {
    const std::size_t n_sizes = d.sizes.size();
    std::vector<std::vector<double>> xs(n_sizes), ys(n_sizes);
    double scale = 0.0;
    std::size_t n_points = 0;
    for (std::size_t i = 0; i < n_sizes; ++i) {
        const double n = static_cast<double>(d.sizes[i]);
        const double nb = std::pow(n, b);
        const double na = std::pow(n, a);
        for (std::size_t j = 0; j < d.delta.size(); ++j) {
            xs[i].push_back(d.delta[j] * nb);
            ys[i].push_back(na * d.abs_m[i][j]);
            scale += ys[i].back() * ys[i].back();
            ++n_points;
        }
    }
    scale /= static_cast<double>(n_points);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < n_sizes; ++j) {
        const double lo = xs[j].front();
        const double hi = xs[j].back();
        auto xj = xs[j];
        auto yj = ys[j];
        const boost::math::interpolators::pchip<std::vector<double>> interp(std::move(xj), std::move(yj));
        for (std::size_t i = 0; i < n_sizes; ++i) {
            if (i == j) continue;
            for (std::size_t k = 0; k < xs[i].size(); ++k) {
                const double x = xs[i][k];
                if (x < lo || x > hi) continue;
                const double r = ys[i][k] - interp(x);
                total += r * r;
                ++count;
            }
        }
    }
    if (count == 0 || !(scale > 0.0)) return std::numeric_limits<double>::infinity();
    return total / static_cast<double>(count) / scale;
}

CollapseFit fit_collapse(const CollapseData& d, const CollapseGrid& g, bool jackknife) {
    if (d.sizes.size() < 3) throw ValidationError("sizes: collapse needs at least 3 system sizes");
    if (d.abs_m.size() != d.sizes.size()) throw ValidationError("collapse: one curve per size required");
    if (d.delta.size() < 4) throw ValidationError("collapse: need at least 4 delta values");
    for (std::size_t j = 1; j < d.delta.size(); ++j) {
        if (!(d.delta[j] > d.delta[j - 1])) throw ValidationError("collapse: delta grid must be strictly increasing");
    }
    for (const auto& c : d.abs_m) {
        if (c.size() != d.delta.size()) throw ValidationError("collapse: curve length differs from the delta grid");
    }

    const auto as = axis(g.a_lo, g.a_hi, g.step);
    const auto bs = axis(g.b_lo, g.b_hi, g.step);
    const GridPoint best = refine(d, search(d, as, bs), g);

    CollapseFit fit;
    fit.a = best.a;
    fit.b = best.b;
    fit.beta = best.a / best.b;
    fit.residual = best.cost;
    if (!jackknife) return fit;

    // Each leave-one-out fit restarts from a coarse local grid around the full fit.
    CollapseGrid local = g;
    local.refine_halfwidth = 5.0 * g.step;
    local.refine_step = g.step;
    std::vector<double> ja, jb, jbeta;
    for (std::size_t skip = 0; skip < d.delta.size(); ++skip) {
        const CollapseData sub = drop_delta(d, skip);
        GridPoint start{collapse_objective(sub, best.a, best.b), best.a, best.b};
        GridPoint r = refine(sub, refine(sub, start, local), g);
        ja.push_back(r.a);
        jb.push_back(r.b);
        jbeta.push_back(r.a / r.b);
    }
    fit.a_err = jackknife_error(ja);
    fit.b_err = jackknife_error(jb);
    fit.beta_err = jackknife_error(jbeta);
    return fit;
}

PowerLawFit power_law_fit(std::span<const double> x, std::span<const double> y, double x_lo, double x_hi) {
    if (x.size() != y.size()) throw ValidationError("power law: x and y lengths differ");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < x_lo || x[i] > x_hi) continue;
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("power law: selected values must be > 0");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    if (lx.size() < 3) throw ValidationError("power law: fewer than 3 points in the window");
    PowerLawFit out;
    out.points = static_cast<int>(lx.size());
    out.x_lo = x_lo;
    out.x_hi = x_hi;
    const LinearFit f = linear_fit(lx, ly);
    out.log_prefactor = f.intercept;
    out.exponent = f.slope;
    out.r_squared = f.r_squared;
    return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("linear fit: need matching inputs of length >= 2");
    const std::vector<double> vx(x.begin(), x.end());
    const std::vector<double> vy(y.begin(), y.end());
    const auto [c0, c1, r2] = boost::math::statistics::simple_ordinary_least_squares_with_R_squared(vx, vy);
    LinearFit out{c0, c1, r2, 0.0};
    for (std::size_t i = 0; i < vx.size(); ++i) {
        const double r = vy[i] - (c0 + c1 * vx[i]);
        out.rss += r * r;
    }
    return out;
}

std::vector<std::size_t> local_maxima(std::span<const double> y) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (y[i] > y[i - 1] && y[i] > y[i + 1]) out.push_back(i);
    }
    return out;
}

PeakWidth peak_fwhm(std::span<const double> x, std::span<const double> y, double near) {
    if (x.size() != y.size() || x.size() < 3) throw ValidationError("peak: need matching grids of length >= 3");
    const std::size_t last = x.size() - 1;
    std::size_t i = 0;
    for (std::size_t j = 1; j <= last; ++j) {
        if (std::abs(x[j] - near) < std::abs(x[i] - near)) i = j;
    }
    while (i > 0 && i < last && (y[i + 1] > y[i] || y[i - 1] > y[i])) i = y[i + 1] > y[i] ? i + 1 : i - 1;
    std::size_t l = i;
    while (l > 0 && y[l - 1] < y[l]) --l;
    std::size_t r = i;
    while (r < last && y[r + 1] < y[r]) ++r;

    PeakWidth out;
    out.index = i;
    out.center = x[i];
    out.height = y[i];
    out.baseline = std::max(y[l], y[r]);
    const double half = out.baseline + 0.5 * (out.height - out.baseline);
    if (!(out.height > out.baseline)) throw NumericalError("peak: no prominence above the flanking minima");

    std::size_t a = i;
    while (a > 0 && y[a] > half) --a;
    std::size_t b = i;
    while (b < last && y[b] > half) ++b;
    if (y[a] > half || y[b] > half) throw NumericalError("peak: half height not reached inside the grid");
    const double xl = x[a] + (half - y[a]) / (y[a + 1] - y[a]) * (x[a + 1] - x[a]);
    const double xr = x[b - 1] + (half - y[b - 1]) / (y[b] - y[b - 1]) * (x[b] - x[b - 1]);
    out.fwhm = xr - xl;
    return out;
}

ScalingFit fit_critical(const MagnetizationFn& m, const CriticalFitSettings& s) {
    if (s.sizes.size() < 3) throw ValidationError("sizes: critical fit needs at least 3 system sizes");
    if (!std::is_sorted(s.sizes.begin(), s.sizes.end())) throw ValidationError("sizes: must be ascending");
    if (!(s.omega_c_ref > 0.0)) throw ValidationError("omega_c_ref: must be > 0");

    ScalingFit out;
    std::vector<double> omega(s.crossing_grid.size());
    for (std::size_t i = 0; i < omega.size(); ++i) omega[i] = s.crossing_grid[i] * s.omega_c_ref;
    std::vector<std::vector<double>> chi;
    for (int n : s.sizes) chi.push_back(susceptibility(m, n, omega, s.fd_step * s.omega_c_ref));
    out.crossing = susceptibility_crossing(s.sizes, omega, chi);
    out.omega_c_est = out.crossing.omega_c;

    CollapseData& d = out.collapse;
    d.sizes = s.sizes;
    d.delta = s.collapse_delta;
    for (int n : s.sizes) {
        std::vector<double> row;
        for (double dl : s.collapse_delta) row.push_back(std::abs(m(n, s.omega_c_ref * (1.0 - dl))));
        d.abs_m.push_back(std::move(row));
    }
    const CollapseFit c = fit_collapse(d, s.grid, s.jackknife);
    out.a = c.a;
    out.b = c.b;
    out.beta = c.beta;
    out.a_err = c.a_err;
    out.b_err = c.b_err;
    out.beta_err = c.beta_err;
    out.residual = c.residual;
    out.fit_window = {s.collapse_delta.front(), s.collapse_delta.back()};
    return out;
}

}  // namespace xxz
