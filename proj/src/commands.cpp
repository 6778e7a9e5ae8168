#include "xxz/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <ctime>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <thread>

#include "xxz/classical_walk.hpp"
#include "xxz/format.hpp"
#include "xxz/model.hpp"
#include "xxz/mps.hpp"
#include "xxz/observables.hpp"
#include "xxz/oracle.hpp"
#include "xxz/scaling.hpp"

#ifndef XXZ_GIT_HASH
#define XXZ_GIT_HASH "unknown"
#endif

namespace xxz {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double oracle_tolerance = 1e-8;
constexpr double onsager_tolerance = 1e-8;

// ---- parsing helpers ---------------------------------------------------------

double parse_number(std::string_view s, std::string_view what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ValidationError("grid: " + std::string(what) + " '" + std::string(s) + "' is not a finite number");
    }
    return v;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

// ---- option resolution -------------------------------------------------------

// Resolved options echoed into the metadata in resolution order.
class Spec {
public:
    void set(const std::string& key, const std::string& value) { entries_.emplace_back("spec." + key, value); }
    void set(const std::string& key, double value) { set(key, format_double(value)); }
    void set_int(const std::string& key, long long value) { set(key, std::to_string(value)); }
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

struct Axis {
    std::vector<double> values;
    std::string text;
};

class Resolver {
public:
    Resolver(const Options& o, const std::vector<std::string_view>& grid_names) : o_(o) {
        for (const auto& g : o.grid) {
            GridAxis a = parse_grid(g);
            if (std::find(grid_names.begin(), grid_names.end(), a.name) == grid_names.end()) {
                std::string allowed;
                for (auto n : grid_names) allowed += (allowed.empty() ? "" : ", ") + std::string(n);
                throw ValidationError("grid: axis '" + a.name + "' is not used by " + o.command +
                                      (allowed.empty() ? " (it takes no grid)" : " (axes: " + allowed + ")"));
            }
            if (!grids_.emplace(a.name, a).second) throw ValidationError("grid: axis '" + a.name + "' given twice");
        }
        if (o.n && !o.n_list.empty()) throw ValidationError("n: give either --n or --n-list, not both");
        if (!(o.J > 0.0) || !std::isfinite(o.J)) throw ValidationError("J: must be > 0");
        spec.set("J", o.J);
    }

    // Axis from --grid, else the list flag, else the preset.
    Axis axis(const std::string& name, const std::vector<double>& list, const GridAxis& preset) {
        Axis a;
        if (auto it = grids_.find(name); it != grids_.end()) {
            a.values = it->second.values();
            a.text = it->second.text();
        } else if (!list.empty()) {
            a.values = list;
            a.text = join(list);
        } else {
            a.values = preset.values();
            a.text = preset.text();
        }
        spec.set(name, a.text);
        return a;
    }

    // Values from --grid, else the list flag, else the preset list.
    std::vector<double> list(const std::string& name, const std::vector<double>& flag, const std::vector<double>& preset) {
        if (auto it = grids_.find(name); it != grids_.end()) {
            spec.set(name, it->second.text());
            return it->second.values();
        }
        const std::vector<double>& v = flag.empty() ? preset : flag;
        spec.set(name, join(v));
        return v;
    }

    double scalar(const std::string& name, const std::vector<double>& list, double preset) {
        if (list.size() > 1) throw ValidationError(name + ": " + o_.command + " takes a single value");
        const double v = list.empty() ? preset : list.front();
        spec.set(name, v);
        return v;
    }

    double gamma(double preset) {
        const double g = o_.gamma.value_or(preset);
        spec.set("gamma", g);
        return g;
    }

    int size(int preset) {
        if (o_.n_list.size() > 1) throw ValidationError("n: " + o_.command + " takes a single size");
        const int n = o_.n ? *o_.n : (o_.n_list.empty() ? preset : o_.n_list.front());
        spec.set_int("n", n);
        return n;
    }

    // Sizes from --n-list, --n, or an "n" grid, else the preset; ascending
    // and distinct.
    std::vector<int> sizes(const std::vector<int>& preset) {
        std::vector<int> s;
        if (auto it = grids_.find("n"); it != grids_.end()) {
            if (o_.n || !o_.n_list.empty()) throw ValidationError("n: give either --grid n:... or --n/--n-list");
            for (double v : it->second.values()) s.push_back(static_cast<int>(std::lround(v)));
        } else if (!o_.n_list.empty()) {
            s = o_.n_list;
        } else if (o_.n) {
            s = {*o_.n};
        } else {
            s = preset;
        }
        if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end()) {
            throw ValidationError("n: sizes must be strictly ascending");
        }
        spec.set("n", join(s));
        return s;
    }

    const Options& opts() const { return o_; }
    Spec spec;

private:
    const Options& o_;
    std::map<std::string, GridAxis> grids_;
};

ModelParams params(double J, double delta, double omega, double gamma, int N, double nth = 0.0) {
    ModelParams p;
    p.J = J;
    p.Delta = delta;
    p.Omega = omega;
    p.gamma = gamma;
    p.N = N;
    p.n_th = nth;
    validate(p);
    return p;
}

// ---- per-point evaluation ----------------------------------------------------

struct Point {
    std::vector<Cell> cells;
    std::string error;
};

// Runs f for one grid point; a failure keeps the sweep going with NaN
// observables and the message in the error column.
template <class F>
Point guarded(std::size_t n_observables, F&& f) {
    Point pt;
    try {
        pt.cells = f();
    } catch (const std::exception& e) {
        pt.cells.assign(n_observables, Cell{nan});
        pt.error = e.what();
    }
    return pt;
}

std::optional<std::string> row_failures(const SweepResult& r) {
    const std::size_t e = column_index(r, "error");
    std::size_t bad = 0;
    for (const auto& row : r.rows) {
        if (!std::get<std::string>(row[e]).empty()) ++bad;
    }
    if (bad == 0) return std::nullopt;
    return std::to_string(bad) + " of " + std::to_string(r.rows.size()) + " grid points failed";
}

OrderedJson fit_json(const PowerLawFit& f) {
    return {{"exponent", f.exponent}, {"log_prefactor", f.log_prefactor}, {"r_squared", f.r_squared},
            {"points", f.points}};
}

// ---- commands ----------------------------------------------------------------

CommandOutput phase_diagram(Resolver& r) {
    const Options& o = r.opts();
    const Axis delta = r.axis("delta", o.delta, {"delta", 0.0, 1.5, 101});
    const Axis omega = r.axis("omega", o.omega, {"omega", 0.0, 3.0, 101});
    const int N = r.size(200);
    const double gamma = r.gamma(1.0);

    const std::size_t nw = omega.values.size();
    const auto points = parallel_map(delta.values.size() * nw, resolved_threads(o.threads), [&](std::size_t i) {
        const double d = delta.values[i / nw];
        const double w = omega.values[i % nw];
        return guarded(3, [&] {
            const ModelParams p = params(o.J, d, w, gamma, N);
            const NessObservables obs = magnetization(solve_coefficients(p));
            return std::vector<Cell>{obs.magnetization, obs.current, to_string(derive(p).regime)};
        });
    });
    CommandOutput out;
    SweepResult& res = out.result;
    res.columns = {"delta", "omega", "m", "current", "regime", "error"};
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::vector<Cell> row{delta.values[i / nw], omega.values[i % nw]};
        row.insert(row.end(), points[i].cells.begin(), points[i].cells.end());
        row.emplace_back(points[i].error);
        res.rows.push_back(std::move(row));
    }
    res.report["points"] = res.rows.size();
    res.plot = {PlotSpec::Kind::Heatmap, "delta", "omega", "m", {}, "", false, false, "magnetization, N = " + std::to_string(N)};
    out.numerical_failure = row_failures(res);
    return out;
}

CommandOutput linecut(Resolver& r) {
    const Options& o = r.opts();
    const std::vector<double> deltas = r.list("delta", o.delta, {0.2});
    const Axis omega = r.axis("omega", o.omega, {"omega", 0.0, 3.0, 301});
    const int N = r.size(500);
    const double gamma = r.gamma(1.0);

    const std::size_t nw = omega.values.size();
    const auto points = parallel_map(deltas.size() * nw, resolved_threads(o.threads), [&](std::size_t i) {
        return guarded(2, [&] {
            const ModelParams p = params(o.J, deltas[i / nw], omega.values[i % nw], gamma, N);
            const NessObservables obs = magnetization(solve_coefficients(p));
            return std::vector<Cell>{obs.magnetization, obs.current};
        });
    });
    CommandOutput out;
    SweepResult& res = out.result;
    res.columns = {"delta", "omega", "m", "current", "error"};
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::vector<Cell> row{deltas[i / nw], omega.values[i % nw]};
        row.insert(row.end(), points[i].cells.begin(), points[i].cells.end());
        row.emplace_back(points[i].error);
        res.rows.push_back(std::move(row));
    }
    OrderedJson oc = OrderedJson::array();
    for (double d : deltas) {
        const double x = d / o.J;
        oc.push_back({{"delta", d},
                      {"omega_c", std::abs(x) < 1.0 ? OrderedJson(o.J * std::sqrt(1.0 - x * x)) : OrderedJson(nullptr)}});
    }
    res.report["omega_c"] = std::move(oc);
    res.plot = {PlotSpec::Kind::Line, "omega", "m", "", {}, deltas.size() > 1 ? "delta" : "", false, false,
                "magnetization line cut, N = " + std::to_string(N)};
    out.numerical_failure = row_failures(res);
    return out;
}

CommandOutput fractal_scan(Resolver& r) {
    const Options& o = r.opts();
    const Axis delta = r.axis("delta", o.delta, {"delta", -1.0, 1.0, 799, false, true});
    const double omega = r.scalar("omega", o.omega, 0.2);
    const double gamma = r.gamma(0.05);
    const int N = r.size(15);
    if (o.max_m < 1) throw ValidationError("max-m: must be >= 1");
    r.spec.set_int("max_m", o.max_m);
    r.spec.set("peak", o.peak);
    if (!std::is_sorted(delta.values.begin(), delta.values.end())) throw ValidationError("delta: must be ascending");

    const auto points = parallel_map(delta.values.size(), resolved_threads(o.threads), [&](std::size_t i) {
        return guarded(1, [&] {
            const ModelParams p = params(o.J, delta.values[i], omega, gamma, N);
            return std::vector<Cell>{magnetization(solve_coefficients(p)).magnetization};
        });
    });
    std::vector<double> m;
    for (const auto& pt : points) m.push_back(std::get<double>(pt.cells[0]));
    const std::vector<std::size_t> maxima = local_maxima(m);
    const std::set<std::size_t> max_set(maxima.begin(), maxima.end());

    CommandOutput out;
    SweepResult& res = out.result;
    res.columns = {"delta", "m", "local_max", "nearest_special", "special_value", "special_distance", "error"};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double x = delta.values[i] / o.J;
        std::vector<SpecialPoint> near;
        if (std::abs(x) < 1.0) near = nearest_special_points(x, o.max_m);
        std::vector<Cell> row{delta.values[i], m[i], std::int64_t{max_set.count(i) ? 1 : 0}};
        if (near.empty()) {
            row.insert(row.end(), 3, Cell{std::string()});
        } else {
            const SpecialPoint& s = near.front();
            row.insert(row.end(), {Cell{std::to_string(s.l) + "/" + std::to_string(s.m)}, Cell{s.delta_over_j},
                                   Cell{s.distance}});
        }
        row.emplace_back(points[i].error);
        res.rows.push_back(std::move(row));
    }

    // Every special point inside the scanned range is matched to its nearest
    // local maximum; a hit is within one grid step.
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < delta.values.size(); ++i) step = std::min(step, delta.values[i] - delta.values[i - 1]);
    OrderedJson specials = OrderedJson::array();
    int hits = 0, total = 0;
    for (int mm = 2; mm <= o.max_m; ++mm) {
        for (int l = 1; l < mm; ++l) {
            if (std::gcd(l, mm) != 1) continue;
            const double target = o.J * std::cos(std::numbers::pi * l / mm);
            if (target < delta.values.front() || target > delta.values.back()) continue;
            ++total;
            OrderedJson e = {{"l", l}, {"m", mm}, {"delta", target}};
            if (maxima.empty()) {
                e["nearest_max"] = nullptr;
                e["hit"] = false;
            } else {
                const auto best = *std::min_element(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) {
                    return std::abs(delta.values[a] - target) < std::abs(delta.values[b] - target);
                });
                const bool hit = std::abs(delta.values[best] - target) <= step * (1.0 + 1e-9);
                e["nearest_max"] = delta.values[best];
                e["hit"] = hit;
                hits += hit ? 1 : 0;
            }
            specials.push_back(std::move(e));
        }
    }
    res.report["grid_step"] = std::isfinite(step) ? OrderedJson(step) : OrderedJson(nullptr);
    res.report["local_maxima"] = maxima.size();
    res.report["special_points"] = std::move(specials);
    res.report["hits"] = hits;
    res.report["special_total"] = total;
    res.report["all_resolved"] = hits == total;
    try {
        const PeakWidth w = peak_fwhm(delta.values, m, o.peak);
        res.report["peak"] = {{"near", o.peak},     {"center", w.center},     {"height", w.height},
                              {"baseline", w.baseline}, {"fwhm", w.fwhm}};
    } catch (const std::exception& e) {
        res.report["peak"] = {{"near", o.peak}, {"error", e.what()}};
    }
    res.plot = {PlotSpec::Kind::Line, "delta", "m", "", {}, "", false, false, "magnetization vs anisotropy, N = " + std::to_string(N)};
    out.numerical_failure = row_failures(res);
    return out;
}

std::vector<int> range_sizes(int lo, int hi, int step) {
    std::vector<int> s;
    for (int n = lo; n <= hi; n += step) s.push_back(n);
    return s;
}

CommandOutput current_scaling(Resolver& r) {
    const Options& o = r.opts();
    const std::vector<int> sizes = r.sizes(range_sizes(50, 500, 50));
    if (sizes.size() < 5) throw ValidationError("n: current scaling needs at least 5 sizes");
    const std::vector<double> deltas = r.list("delta", o.delta, {0.2, 1.0, 1.2});
    const double omega = r.scalar("omega", o.omega, 2.0);
    const double gamma = r.gamma(1.0);

    const std::size_t ns = sizes.size();
    const auto points = parallel_map(deltas.size() * ns, resolved_threads(o.threads), [&](std::size_t i) {
        return guarded(1, [&] {
            const ModelParams p = params(o.J, deltas[i / ns], omega, gamma, sizes[i % ns]);
            return std::vector<Cell>{magnetization(solve_coefficients(p)).current};
        });
    });
    CommandOutput out;
    SweepResult& res = out.result;
    res.columns = {"delta", "n", "current", "error"};
    for (std::size_t i = 0; i < points.size(); ++i) {
        res.rows.push_back({deltas[i / ns], std::int64_t{sizes[i % ns]}, points[i].cells[0], points[i].error});
    }

    OrderedJson fits = OrderedJson::array();
    bool consistent = true;
    for (std::size_t d = 0; d < deltas.size(); ++d) {
        std::vector<double> n, j;
        for (std::size_t k = 0; k < ns; ++k) {
            const double v = std::get<double>(points[d * ns + k].cells[0]);
            if (std::isfinite(v) && v > 0.0) {
                n.push_back(sizes[k]);
                j.push_back(v);
            }
        }
        const Regime regime = derive(params(o.J, deltas[d], omega, gamma, sizes.front())).regime;
        OrderedJson e = {{"delta", deltas[d]}, {"regime", to_string(regime)}};
        try {
            const PowerLawFit pw = power_law_fit(n, j, n.front(), n.back());
            std::vector<double> logj(j.size());
            std::transform(j.begin(), j.end(), logj.begin(), [](double v) { return std::log(v); });
            const LinearFit ex = linear_fit(n, logj);
            e["power_law"] = fit_json(pw);
            e["exponential"] = {{"rate", -ex.slope}, {"intercept", ex.intercept}, {"r_squared", ex.r_squared}};
            bool ok = false;
            std::string label;
            switch (regime) {
                case Regime::EasyAxis:
                    ok = std::abs(pw.exponent) <= 0.1;
                    label = "ballistic";
                    break;
                case Regime::Heisenberg:
                    ok = std::abs(pw.exponent + 2.0) <= 0.3;
                    label = "subdiffusive";
                    break;
                case Regime::Insulating:
                    ok = ex.r_squared >= 0.99 && ex.slope < 0.0;
                    label = "exponential";
                    break;
            }
            e["expected"] = label;
            e["consistent"] = ok;
            consistent = consistent && ok;
        } catch (const std::exception& ex) {
            e["error"] = ex.what();
            consistent = false;
        }
        fits.push_back(std::move(e));
    }
    res.report["fits"] = std::move(fits);
    res.report["consistent"] = consistent;
    res.plot = {PlotSpec::Kind::Line, "n", "current", "", {}, "delta", true, true, "current vs system size"};
    out.numerical_failure = row_failures(res);
    return out;
}

CommandOutput fss(Resolver& r) {
    const Options& o = r.opts();
    const double delta = r.scalar("delta", o.delta, 0.2);
    const double gamma = r.gamma(1.0);
    const double x = delta / o.J;
    if (!(std::abs(x) < 1.0)) throw ValidationError("delta: finite-size scaling needs |delta| < J");
    const double omega_c = o.J * std::sqrt(1.0 - x * x);
    std::string method = o.method;
    if (method == "auto") method = gamma <= 0.1 ? "power-law" : "collapse";
    if (method != "collapse" && method != "power-law") throw ValidationError("method: expected auto, collapse or power-law");
    r.spec.set("method", method);
    const auto m_fn = [&](int N, double omega) {
        return magnetization(solve_coefficients(params(o.J, delta, omega, gamma, N))).magnetization;
    };

    CommandOutput out;
    SweepResult& res = out.result;
    res.report["omega_c_ref"] = omega_c;
    if (method == "collapse") {
        CriticalFitSettings s;
        s.sizes = r.sizes({100, 200, 400});
        if (s.sizes.size() < 3) throw ValidationError("n: finite-size scaling needs at least 3 sizes");
        s.omega_c_ref = omega_c;
        s.crossing_grid = r.axis("crossing", {}, {"crossing", 0.95, 1.02, 36}).values;
        s.collapse_delta = r.axis("delta", {}, {"delta", 0.0, 0.05, 41}).values;
        s.jackknife = o.jackknife;
        r.spec.set("jackknife", o.jackknife ? "true" : "false");
        const ScalingFit f = fit_critical(m_fn, s);
        res.report["crossing"] = {{"omega_c", f.crossing.omega_c},
                                  {"relative_error", std::abs(f.crossing.omega_c - omega_c) / omega_c},
                                  {"pair_estimates", f.crossing.pair_estimates},
                                  {"spread", f.crossing.spread}};
        res.report["collapse"] = {{"a", f.a},           {"b", f.b},           {"beta", f.beta},
                                  {"a_err", f.a_err},   {"b_err", f.b_err},   {"beta_err", f.beta_err},
                                  {"residual", f.residual}, {"delta_lo", f.fit_window.first},
                                  {"delta_hi", f.fit_window.second}};
        res.columns = {"n", "delta", "abs_m", "scaled_x", "scaled_y"};
        for (std::size_t i = 0; i < f.collapse.sizes.size(); ++i) {
            const double n = f.collapse.sizes[i];
            for (std::size_t k = 0; k < f.collapse.delta.size(); ++k) {
                const double am = f.collapse.abs_m[i][k];
                res.rows.push_back({std::int64_t{f.collapse.sizes[i]}, f.collapse.delta[k], am,
                                    f.collapse.delta[k] * std::pow(n, f.b), std::pow(n, f.a) * am});
            }
        }
        res.plot = {PlotSpec::Kind::Line, "scaled_x", "scaled_y", "", {}, "n", false, false, "scaling collapse"};
        return out;
    }

    // Power law |m| ~ delta^beta at one large size. The default lower window
    // edge is the smallest delta from which the condensate weight p0 obeys
    // (1 - p0) / p0 >= 10 up to the upper edge.
    const int N = r.size(4000);
    const Axis grid = r.axis("delta", {}, {"delta", 1e-2, std::pow(10.0, -0.5), 31, true});
    const auto obs = parallel_map(grid.values.size(), resolved_threads(o.threads), [&](std::size_t i) {
        return magnetization(solve_coefficients(params(o.J, delta, omega_c * (1.0 - grid.values[i]), gamma, N)));
    });
    if (!o.window.empty() && o.window.size() != 2) throw ValidationError("window: expected lo,hi");
    const double hi = o.window.empty() ? 0.3 : o.window[1];
    double lo = o.window.empty() ? 0.0 : o.window[0];
    double safe_lo = nan;
    for (std::size_t i = grid.values.size(); i-- > 0;) {
        if (grid.values[i] > hi) continue;
        const double p0 = obs[i].p.front();
        if (!((1.0 - p0) / p0 >= 10.0)) break;
        safe_lo = grid.values[i];
    }
    if (o.window.empty()) {
        if (!std::isfinite(safe_lo)) throw NumericalError("window: no condensation-safe delta below " + format_double(hi));
        lo = safe_lo;
    }
    r.spec.set("window", format_double(lo) + "," + format_double(hi));
    std::vector<double> abs_m;
    res.columns = {"delta", "omega", "abs_m", "condensate_weight", "in_window"};
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        abs_m.push_back(std::abs(obs[i].magnetization));
        const bool in = grid.values[i] >= lo && grid.values[i] <= hi;
        res.rows.push_back({grid.values[i], omega_c * (1.0 - grid.values[i]), abs_m.back(), obs[i].p.front(),
                            std::int64_t{in ? 1 : 0}});
    }
    const PowerLawFit f = power_law_fit(grid.values, abs_m, lo, hi);
    res.report["power_law"] = {{"beta", f.exponent},     {"log_prefactor", f.log_prefactor}, {"r_squared", f.r_squared},
                               {"points", f.points},     {"delta_lo", lo},                   {"delta_hi", hi},
                               {"condensation_safe_lo", std::isfinite(safe_lo) ? OrderedJson(safe_lo) : OrderedJson(nullptr)}};
    res.plot = {PlotSpec::Kind::Line, "delta", "abs_m", "", {}, "", true, true, "|m| vs distance to the critical drive"};
    return out;
}

CommandOutput entropy_scan(Resolver& r) {
    const Options& o = r.opts();
    const std::vector<int> sizes = r.sizes(range_sizes(20, 400, 20));
    if (sizes.size() < 3) throw ValidationError("n: entropy scaling needs at least 3 sizes");
    if (sizes.front() < 2) throw ValidationError("n: entropy needs N >= 2");
    const std::vector<double> deltas = r.list("delta", o.delta, {0.2, 0.5});
    const double omega = r.scalar("omega", o.omega, 2.0);
    const double gamma = r.gamma(1.0);

    const std::size_t ns = sizes.size();
    const auto points = parallel_map(deltas.size() * ns, resolved_threads(o.threads), [&](std::size_t i) {
        return guarded(1, [&] {
            const int N = sizes[i % ns];
            const ModelParams p = params(o.J, deltas[i / ns], omega, gamma, N);
            return std::vector<Cell>{entanglement_entropy(solve_coefficients(p), N / 2)};
        });
    });
    CommandOutput out;
    SweepResult& res = out.result;
    res.columns = {"delta", "n", "log_n", "entropy", "error"};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int N = sizes[i % ns];
        res.rows.push_back({deltas[i / ns], std::int64_t{N}, std::log(static_cast<double>(N)), points[i].cells[0],
                            points[i].error});
    }
    // The logarithmic model is preferred when it explains at least 98% of the
    // variance about the constant fit; otherwise the constant is preferred.
    OrderedJson fits = OrderedJson::array();
    for (std::size_t d = 0; d < deltas.size(); ++d) {
        std::vector<double> lx, s;
        for (std::size_t k = 0; k < ns; ++k) {
            const double v = std::get<double>(points[d * ns + k].cells[0]);
            if (!std::isfinite(v)) continue;
            lx.push_back(std::log(static_cast<double>(sizes[k])));
            s.push_back(v);
        }
        OrderedJson e = {{"delta", deltas[d]}};
        if (s.size() < 3) {
            e["error"] = "fewer than 3 valid sizes";
        } else {
            const LinearFit f = linear_fit(lx, s);
            const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
            double rss_const = 0.0;
            for (double v : s) rss_const += (v - mean) * (v - mean);
            const bool log_model = f.slope > 0.0 && f.r_squared >= 0.98;
            e["slope"] = f.slope;
            e["intercept"] = f.intercept;
            e["r_squared"] = f.r_squared;
            e["rss_log"] = f.rss;
            e["rss_const"] = rss_const;
            e["preferred"] = log_model ? "log" : "constant";
        }
        fits.push_back(std::move(e));
    }
    res.report["fits"] = std::move(fits);
    res.plot = {PlotSpec::Kind::Line, "n", "entropy", "", {}, "delta", true, false, "half-chain entropy"};
    out.numerical_failure = row_failures(res);
    return out;
}

CommandOutput onsager(Resolver& r) {
    const Options& o = r.opts();
    const int N = r.size(3);
    if (N < 2 || N > 4) throw CapacityError("n: the correlator check supports 2 <= N <= 4");
    const double delta = r.scalar("delta", o.delta, 0.2);
    const double omega = r.scalar("omega", o.omega, 0.4);
    const double gamma = r.gamma(1.0);
    if (!(o.nth >= 0.0)) throw ValidationError("nth: must be >= 0");
    const Variant v = o.variant ? parse_variant(*o.variant) : (o.nth > 0.0 ? Variant::ThermalCoherent : Variant::CoherentDrive);
    if (v != Variant::CoherentDrive && v != Variant::ThermalCoherent) {
        throw ValidationError("variant: onsager takes coherent or thermal");
    }
    if (v == Variant::CoherentDrive && o.nth > 0.0) throw ValidationError("nth: the coherent variant has no thermal bath");
    r.spec.set("nth", o.nth);
    r.spec.set("variant", to_string(v));
    const Axis t = r.axis("t", {}, {"t", 0.0, 10.0, 101});

    const ModelParams p = params(o.J, delta, omega, gamma, N, o.nth);
    const DenseLindblad l = build_liouvillian(p, v);
    const SteadyState ss = steady_state(l);
    const OnsagerPair pair = onsager_operator_pair(p);
    const Eigen::MatrixXcd x = pair.x.dense();
    const Eigen::MatrixXcd y = pair.y.dense();
    const Eigen::MatrixXcd z1 = SpinOperator::single(N, 0, Pauli::Z).dense();
    const Eigen::MatrixXcd z2 = SpinOperator::single(N, 1, Pauli::Z).dense();
    std::vector<double> times(t.values);
    for (double& s : times) s /= o.J;
    const auto tasks = parallel_map(4, resolved_threads(o.threads), [&](std::size_t i) {
        switch (i) {
            case 0: return two_time_correlator(l, ss.rho, x, y, times);
            case 1: return two_time_correlator(l, ss.rho, y, x, times);
            case 2: return two_time_correlator(l, ss.rho, z1, z2, times);
            default: return two_time_correlator(l, ss.rho, z2, z1, times);
        }
    });
    CommandOutput out;
    SweepResult& res = out.result;
    res.columns = {"t", "xy_re", "xy_im", "yx_re", "yx_im", "diff", "zz_diff"};
    double worst = 0.0, worst_zz = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double diff = std::abs(tasks[0][i] - tasks[1][i]);
        const double zz = std::abs(tasks[2][i] - tasks[3][i]);
        worst = std::max(worst, diff);
        worst_zz = std::max(worst_zz, zz);
        res.rows.push_back({t.values[i], tasks[0][i].real(), tasks[0][i].imag(), tasks[1][i].real(), tasks[1][i].imag(),
                            diff, zz});
    }
    res.report["max_diff"] = worst;
    res.report["max_zz_diff"] = worst_zz;
    res.report["symmetric"] = worst <= onsager_tolerance;
    res.report["tolerance"] = onsager_tolerance;
    res.report["identity_residual"] = pair.identity_residual;
    res.report["steady_state_residual"] = ss.residual;
    res.plot = {PlotSpec::Kind::Line, "t", "xy_re", "", {"yx_re"}, "", false, false, "two-time correlators"};
    return out;
}

CommandOutput oracle_check(Resolver& r) {
    const Options& o = r.opts();
    const std::string which = o.variant.value_or("all");
    std::vector<Variant> variants;
    if (which == "all") {
        variants = {Variant::CoherentDrive, Variant::IncoherentPumpLoss};
    } else {
        variants = {parse_variant(which)};
        if (variants[0] == Variant::ThermalCoherent) throw ValidationError("variant: no exact solution at finite temperature");
    }
    r.spec.set("variant", which);
    const std::vector<double> deltas = r.list("delta", o.delta, {0.2, 0.5, 1.2});
    const std::vector<double> omegas = r.list("omega", o.omega, {0.2, 1.0, 3.0});
    const double gamma = r.gamma(1.0);
    const bool explicit_sizes = o.n || !o.n_list.empty();
    std::vector<int> user_sizes;
    if (explicit_sizes) user_sizes = r.sizes({});

    struct Job {
        Variant v;
        int N;
        double delta, omega;
    };
    std::vector<Job> jobs;
    for (Variant v : variants) {
        const bool doubled = v == Variant::DoubledCoherent || v == Variant::DoubledIncoherent;
        const bool incoherent = v == Variant::IncoherentPumpLoss || v == Variant::DoubledIncoherent;
        const int cap = doubled ? max_doubled_oracle_sites : (incoherent ? 4 : max_oracle_sites);
        std::vector<int> sizes = explicit_sizes ? user_sizes : std::vector<int>{};
        if (!explicit_sizes) {
            for (int n = 2; n <= cap; ++n) sizes.push_back(n);
        }
        for (int n : sizes) {
            if (n < 2 || n > cap) {
                throw CapacityError("n: " + to_string(v) + " oracle supports 2 <= N <= " + std::to_string(cap));
            }
        }
        for (int n : sizes) {
            for (double d : deltas) {
                if (incoherent) {
                    jobs.push_back({v, n, d, 0.0});
                    continue;
                }
                for (double w : omegas) jobs.push_back({v, n, d, w});
            }
        }
    }
    if (!explicit_sizes) r.spec.set("n", "2..5 coherent, 2..4 incoherent, 2..3 doubled");

    const auto points = parallel_map(jobs.size(), resolved_threads(o.threads), [&](std::size_t i) {
        const Job& j = jobs[i];
        return guarded(4, [&] {
            const bool incoherent = j.v == Variant::IncoherentPumpLoss || j.v == Variant::DoubledIncoherent;
            const ModelParams p = params(o.J, j.delta, j.omega, gamma, j.N);
            const MpsCoefficients m = incoherent ? solve_incoherent(p) : solve_coefficients(p);
            const SteadyState ss = steady_state(build_liouvillian(p, j.v));
            double dist = 0.0;
            if (j.v == Variant::DoubledCoherent || j.v == Variant::DoubledIncoherent) {
                const DoubledState psi = build_doubled_state(m);
                dist = trace_distance(trace_absorber(ss.rho, j.N),
                                      trace_absorber(Eigen::VectorXcd(psi.amplitudes / psi.norm), j.N));
            } else {
                dist = trace_distance(ss.rho, density_from_cholesky(build_cholesky(m)));
            }
            const Cell kernel = ss.kernel_dim ? Cell{std::int64_t{*ss.kernel_dim}} : Cell{std::string()};
            return std::vector<Cell>{dist, ss.residual, kernel, ss.min_eigenvalue};
        });
    });
    CommandOutput out;
    SweepResult& res = out.result;
    res.columns = {"variant", "n", "delta", "omega", "trace_distance", "residual", "kernel_dim", "min_eigenvalue", "error"};
    double worst = 0.0;
    bool failed = false;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& j = jobs[i];
        std::vector<Cell> row{to_string(j.v), std::int64_t{j.N}, j.delta, j.omega};
        row.insert(row.end(), points[i].cells.begin(), points[i].cells.end());
        row.emplace_back(points[i].error);
        res.rows.push_back(std::move(row));
        const double d = std::get<double>(points[i].cells[0]);
        if (!std::isfinite(d)) {
            failed = true;
        } else {
            worst = std::max(worst, d);
        }
    }
    failed = failed || worst > oracle_tolerance;
    res.report["points"] = jobs.size();
    res.report["max_trace_distance"] = worst;
    res.report["tolerance"] = oracle_tolerance;
    res.report["pass"] = !failed;
    if (failed) out.numerical_failure = "oracle and exact solution disagree (max trace distance " + format_double(worst) + ")";
    return out;
}

CommandOutput coeff_dump(Resolver& r) {
    const Options& o = r.opts();
    const int N = r.size(10);
    const double delta = r.scalar("delta", o.delta, 0.2);
    const double omega = r.scalar("omega", o.omega, 1.0);
    const double gamma = r.gamma(1.0);
    const std::string variant = o.variant.value_or("coherent");
    if (variant != "coherent" && variant != "incoherent") throw ValidationError("variant: coeff-dump takes coherent or incoherent");
    if (o.gauge != "cunit" && o.gauge != "weak") throw ValidationError("gauge: expected cunit or weak");
    if (variant == "incoherent" && o.gauge == "weak") throw ValidationError("gauge: weak is defined for the coherent drive only");
    r.spec.set("variant", variant);
    r.spec.set("gauge", o.gauge);
    const ModelParams p = params(o.J, delta, omega, gamma, N);
    const MpsCoefficients m = variant == "incoherent" ? solve_incoherent(p)
                              : o.gauge == "weak"     ? analytic_coefficients(p)
                                                      : solve_coefficients(p);

    CommandOutput out;
    SweepResult& res = out.result;
    res.columns = {"k", "a_re", "a_im", "bc_re", "bc_im", "b_re", "b_im", "c_re", "c_im", "alpha_re", "alpha_im", "log_abs_alpha"};
    for (int k = 0; k <= N; ++k) {
        std::vector<Cell> row{std::int64_t{k}};
        for (const auto* v : {&m.a, &m.bc, &m.b, &m.c, &m.alpha}) {
            if (k < static_cast<int>(v->size())) {
                const std::complex<double> z = (*v)[k].value();
                row.insert(row.end(), {z.real(), z.imag()});
            } else {
                row.insert(row.end(), {nan, nan});
            }
        }
        row.emplace_back(k < static_cast<int>(m.alpha.size()) ? m.alpha[k].log_abs() : nan);
        res.rows.push_back(std::move(row));
    }
    res.report["gauge"] = to_string(m.gauge);
    res.report["incoherent"] = m.incoherent;
    res.report["zero_drive"] = m.zero_drive;
    res.plot = {PlotSpec::Kind::Line, "k", "log_abs_alpha", "", {}, "", false, false, "log |alpha_k|"};
    return out;
}

CommandOutput walk_sim(Resolver& r) {
    const Options& o = r.opts();
    CommandOutput out;
    SweepResult& res = out.result;
    if (o.free_energy) {
        const int N = r.size(200);
        const double delta = r.scalar("delta", o.delta, 0.2);
        const double omega = r.scalar("omega", o.omega, 0.5);
        const double gamma = r.gamma(1.0);
        r.spec.set("free_energy", "true");
        const MpsCoefficients m = analytic_coefficients(params(o.J, delta, omega, gamma, N));
        const FreeEnergyProfile f = free_energy(m);
        res.columns = {"xi", "g", "h", "F"};
        for (std::size_t k = 0; k < f.xi.size(); ++k) res.rows.push_back({f.xi[k], f.g[k], f.h[k], f.F[k]});
        res.report["xi_star"] = f.xi_star;
        res.report["profile_magnetization"] = profile_magnetization(f);
        res.report["magnetization"] = magnetization(m).magnetization;
        res.plot = {PlotSpec::Kind::Line, "xi", "F", "", {"g", "h"}, "", false, false, "free-energy profile"};
        return out;
    }
    const int steps = r.size(1000);
    if (steps < 1) throw ValidationError("n: walk steps must be >= 1");
    const EnvironmentKind kind = parse_environment(o.env);
    r.spec.set("env", to_string(kind));
    double eta = 0.0;
    if (kind == EnvironmentKind::Quasiperiodic) {
        const double delta = r.scalar("delta", o.delta, 0.2);
        if (!(std::abs(delta / o.J) < 1.0)) throw ValidationError("delta: the quasiperiodic walk needs |delta| < J");
        eta = std::acos(delta / o.J);
    }
    if (o.trajectories < 1) throw ValidationError("trajectories: must be >= 1");
    r.spec.set("trajectories", std::to_string(o.trajectories));
    r.spec.set("seed", std::to_string(o.seed));

    const WalkEnvironment env = make_environment(kind, steps + 2, eta, o.seed);
    const std::vector<double> exact = classical_propagate(env, steps);
    const MonteCarloResult mc = monte_carlo_walk(env, steps, o.trajectories, o.seed, resolved_threads(o.threads));
    const GofReport gof = compare_to_exact(mc, exact);

    std::size_t last = 0;
    for (std::size_t k = 0; k < exact.size(); ++k) {
        if (exact[k] > 0.0 || (k < mc.counts.size() && mc.counts[k] > 0)) last = k;
    }
    res.columns = {"k", "p_exact", "p_mc", "std_error", "z"};
    double m1 = 0.0, m2 = 0.0, mc2 = 0.0;
    const double n_traj = static_cast<double>(mc.n_traj);
    for (std::size_t k = 0; k <= last; ++k) {
        const double pe = exact[k];
        const double pm = k < mc.p.size() ? mc.p[k] : 0.0;
        const double sigma = std::sqrt(pe * (1.0 - pe) / n_traj);
        const double z = sigma > 0.0 ? (pm - pe) / sigma : (pm == pe ? 0.0 : nan);
        const double kk = static_cast<double>(k);
        m1 += kk * pe;
        m2 += kk * kk * pe;
        mc2 += kk * kk * pm;
        res.rows.push_back({std::int64_t(k), pe, pm, k < mc.std_error.size() ? mc.std_error[k] : 0.0, z});
    }
    res.report["steps"] = steps;
    res.report["mean_k"] = m1;
    res.report["second_moment"] = m2;
    res.report["second_moment_mc"] = mc2;
    res.report["chi2"] = gof.chi2;
    res.report["bins"] = gof.bins;
    res.report["max_abs_z"] = gof.max_abs_z;
    res.report["within_4_sigma"] = gof.max_abs_z <= 4.0;
    res.plot = {PlotSpec::Kind::Line, "k", "p_exact", "", {"p_mc"}, "", false, false, "walker distribution after " + std::to_string(steps) + " steps"};
    return out;
}

struct CommandEntry {
    std::string_view name;
    std::vector<std::string_view> grid_axes;
    CommandOutput (*run)(Resolver&);
    std::string_view help;
};

const std::vector<CommandEntry>& registry() {
    static const std::vector<CommandEntry> r = {
        {"phase-diagram", {"delta", "omega"}, phase_diagram,
         "Magnetization and current over a (delta, omega) grid. Presets: delta 0:1.5:101, omega 0:3:101, "
         "N = 200, gamma = 1. SVG: heatmap of m."},
        {"linecut", {"delta", "omega"}, linecut,
         "Magnetization and current along omega at fixed delta. Presets: delta 0.2, omega 0:3:301, N = 500, "
         "gamma = 1."},
        {"fractal-scan", {"delta"}, fractal_scan,
         "Magnetization vs delta with nearest special-point annotations cos(l pi / m), m <= --max-m, and "
         "the FWHM of the resonance nearest --peak. Presets: delta -1:1:799:open, omega 0.2, gamma 0.05, "
         "N = 15, max-m 7, peak 0.5."},
        {"current-scaling", {"n"}, current_scaling,
         "Current vs N with power-law and exponential fits per delta. Presets: N 50..500 step 50 (at least "
         "5 sizes), delta 0.2,1,1.2, omega 2, gamma 1."},
        {"fss", {"crossing", "delta"}, fss,
         "Finite-size scaling at fixed delta < J. collapse: susceptibility crossing on omega/omega_c grid "
         "'crossing' (preset 0.95:1.02:36) and collapse on 'delta' (preset 0:0.05:41) for sizes 100,200,400 "
         "with jackknife errors. power-law (auto for gamma <= 0.1): |m| vs delta at N = 4000 on "
         "delta 0.01:0.3162:31:log, window --window lo,hi or condensation-safe default up to 0.3."},
        {"entropy-scan", {"n"}, entropy_scan,
         "Half-chain entropy vs N and the log-vs-constant model choice per delta. Presets: N 20..400 step 20, "
         "delta 0.2,0.5, omega 2, gamma 1."},
        {"onsager", {"t"}, onsager,
         "Two-time correlators of the certified operator pair and of (sz_1, sz_2) on the dense generator. "
         "Presets: N = 3 (at most 4), delta 0.2, omega 0.4, gamma 1, t 0:10:101 in units of 1/J; nth > 0 "
         "selects the thermal variant."},
        {"oracle-check", {}, oracle_check,
         "Trace distance between the exact steady state and the dense generator kernel. Presets: variants "
         "coherent (N 2..5) and incoherent (N 2..4), delta 0.2,0.5,1.2, omega 0.2,1,3, gamma 1. Exit 2 if "
         "any distance exceeds 1e-8."},
        {"coeff-dump", {}, coeff_dump,
         "MPS coefficient table. Presets: N = 10, delta 0.2, omega 1, gamma 1, --gauge cunit, variant "
         "coherent."},
        {"walk-sim", {}, walk_sim,
         "Classical walk: exact propagation vs Monte Carlo after --n steps (preset 1000) in --env "
         "quasiperiodic (eta = acos(delta/J), delta 0.2), random or uniform; --trajectories 100000, "
         "--seed 2024. --free-energy instead emits the model's xi, g, h, F profile (N 200, delta 0.2, "
         "omega 0.5, gamma 1)."},
    };
    return r;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::vector<double> GridAxis::values() const {
    if (count < 1) throw ValidationError("grid: count must be >= 1");
    if (log && !(lo > 0.0 && hi > 0.0)) throw ValidationError("grid: log axes need positive bounds");
    if (count == 1) {
        if (open) throw ValidationError("grid: an open axis needs count >= 1 interior points of a wider grid");
        return {lo};
    }
    const int n = open ? count + 2 : count;
    std::vector<double> v = log ? geomspace(lo, hi, n) : linspace(lo, hi, n);
    if (open) v = std::vector<double>(v.begin() + 1, v.end() - 1);
    return v;
}

std::string GridAxis::text() const {
    std::string s = name + ":" + format_double(lo) + ":" + format_double(hi) + ":" + std::to_string(count);
    if (log) s += ":log";
    if (open) s += ":open";
    return s;
}

GridAxis parse_grid(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t c = text.find(':', start);
        parts.push_back(text.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start));
        if (c == std::string_view::npos) break;
        start = c + 1;
    }
    if (parts.size() < 4 || parts.size() > 6 || parts[0].empty()) {
        throw ValidationError("grid: expected name:lo:hi:count[:log][:open], got '" + std::string(text) + "'");
    }
    GridAxis a;
    a.name = std::string(parts[0]);
    a.lo = parse_number(parts[1], "lower bound");
    a.hi = parse_number(parts[2], "upper bound");
    const auto [ptr, ec] = std::from_chars(parts[3].data(), parts[3].data() + parts[3].size(), a.count);
    if (ec != std::errc() || ptr != parts[3].data() + parts[3].size() || a.count < 1) {
        throw ValidationError("grid: count '" + std::string(parts[3]) + "' must be an integer >= 1");
    }
    for (std::size_t i = 4; i < parts.size(); ++i) {
        if (parts[i] == "log" && !a.log) {
            a.log = true;
        } else if (parts[i] == "open" && !a.open) {
            a.open = true;
        } else {
            throw ValidationError("grid: unknown or repeated modifier '" + std::string(parts[i]) + "'");
        }
    }
    if (a.count > 1 && !(a.hi > a.lo)) throw ValidationError("grid: need hi > lo for count > 1");
    (void)a.values();
    return a;
}

int resolved_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<std::string> command_names() {
    std::vector<std::string> n;
    for (const auto& e : registry()) n.emplace_back(e.name);
    return n;
}

std::string command_help(std::string_view command) {
    for (const auto& e : registry()) {
        if (e.name == command) return std::string(e.help);
    }
    throw ValidationError("unknown command '" + std::string(command) + "'");
}

CommandOutput run_command(const Options& opts) {
    const auto& reg = registry();
    const auto it = std::find_if(reg.begin(), reg.end(), [&](const CommandEntry& e) { return e.name == opts.command; });
    if (it == reg.end()) throw ValidationError("unknown command '" + opts.command + "'");
    if (opts.threads < 0) throw ValidationError("threads: must be >= 0");
    if (opts.format != "csv" && opts.format != "json" && opts.format != "svg") {
        throw ValidationError("format: expected csv, json or svg");
    }
    Resolver r(opts, it->grid_axes);
    CommandOutput out = it->run(r);
    std::vector<std::pair<std::string, std::string>> meta = {
        {"tool", std::string(tool_name)},
        {"version", std::string(tool_version)},
        {"git_hash", XXZ_GIT_HASH},
        {"command", opts.command},
    };
    if (opts.timestamp) meta.emplace_back("timestamp", utc_timestamp());
    meta.insert(meta.end(), r.spec.entries().begin(), r.spec.entries().end());
    out.result.meta = std::move(meta);
    return out;
}

}  // namespace xxz
