#include "xxz/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "xxz/format.hpp"
#include "xxz/model.hpp"

namespace xxz {

namespace {

bool needs_quotes(std::string_view s) { return s.find_first_of(",\"\n\r") != std::string_view::npos; }

std::string csv_field(const std::string& s) {
    if (!needs_quotes(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// Splits one logical CSV record starting at pos; advances pos past the LF.
std::vector<std::string> read_record(std::string_view text, std::size_t& pos) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    cur += '"';
                    ++pos;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c == '\n') {
            ++pos;
            break;
        } else {
            cur += c;
        }
    }
    if (quoted) throw ValidationError("csv: unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

void flatten(const OrderedJson& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix + "." + k, out);
    } else {
        out.emplace_back(prefix, j.dump());
    }
}

OrderedJson cell_json(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
    if (const auto* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d)) return nullptr;
        return *d;
    }
    return std::get<std::string>(c);
}

Cell json_cell(const OrderedJson& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw ValidationError("json: unsupported cell type");
}

double cell_number(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&c)) return *d;
    const auto& s = std::get<std::string>(c);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    return (end != s.c_str() && *end == '\0') ? v : std::numeric_limits<double>::quiet_NaN();
}

// ---- SVG -----------------------------------------------------------------

constexpr double svg_w = 720.0;
constexpr double svg_h = 480.0;
constexpr double pad_l = 80.0, pad_r = 150.0, pad_t = 40.0, pad_b = 60.0;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

// Linear ticks snap accumulated rounding like 1e-17 to zero.
std::string tick_label(double x, bool log = false) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", !log && std::abs(x) < 1e-12 ? 0.0 : x);
    return buf;
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;
    double pixel_lo = 0.0, pixel_hi = 1.0;

    [[nodiscard]] double map(double v) const {
        const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
        return pixel_lo + t * (pixel_hi - pixel_lo);
    }

    [[nodiscard]] std::vector<double> ticks() const {
        std::vector<double> t;
        if (log) {
            // Decades, thinned to at most ~8 labels; 1-2-5 steps inside a
            // range narrower than two decades.
            const double e0 = std::floor(std::log10(lo));
            const double e1 = std::ceil(std::log10(hi));
            const double stride = std::max(1.0, std::ceil((e1 - e0) / 8.0));
            const bool fine = e1 - e0 <= 2.0;
            for (double e = e0; e <= e1; e += fine ? 1.0 : stride) {
                for (double m : {1.0, 2.0, 5.0}) {
                    if (m > 1.0 && !fine) break;
                    const double v = m * std::pow(10.0, e);
                    if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) t.push_back(v);
                }
            }
            return t;
        }
        const double raw = (hi - lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            step = m * mag;
            if (raw <= step) break;
        }
        for (long i = static_cast<long>(std::ceil(lo / step - 1e-9)); i * step <= hi + 1e-9 * step; ++i) t.push_back(i * step);
        return t;
    }
};

Axis make_axis(std::vector<double> values, bool log, double p0, double p1) {
    Axis a;
    a.log = log;
    a.pixel_lo = p0;
    a.pixel_hi = p1;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        if (!std::isfinite(v) || (log && v <= 0.0)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) {
        lo = log ? 1.0 : 0.0;
        hi = log ? 10.0 : 1.0;
    }
    if (hi <= lo) {
        const double d = log ? 0.0 : std::max(1.0, std::abs(lo)) * 0.5;
        lo = log ? lo / 2.0 : lo - d;
        hi = log ? hi * 2.0 : hi + d;
    }
    a.lo = lo;
    a.hi = hi;
    return a;
}

std::vector<double> column_values(const SweepResult& r, const std::string& name) {
    const std::size_t c = column_index(r, name);
    std::vector<double> v;
    v.reserve(r.rows.size());
    for (const auto& row : r.rows) v.push_back(cell_number(row[c]));
    return v;
}

void draw_axes(std::ostringstream& s, const Axis& x, const Axis& y, const std::string& xl, const std::string& yl) {
    const double x0 = pad_l, x1 = svg_w - pad_r, y0 = svg_h - pad_b, y1 = pad_t;
    s << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
      << num(y0 - y1) << "\" fill=\"none\" stroke=\"#000\"/>\n";
    for (double t : x.ticks()) {
        const double px = x.map(t);
        s << "<line x1=\"" << num(px) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(px) << "\" y2=\"" << num(y0 + 5)
          << "\" stroke=\"#000\"/>\n";
        s << "<text x=\"" << num(px) << "\" y=\"" << num(y0 + 20) << "\" text-anchor=\"middle\">" << tick_label(t, x.log)
          << "</text>\n";
    }
    for (double t : y.ticks()) {
        const double py = y.map(t);
        s << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(py)
          << "\" stroke=\"#000\"/>\n";
        s << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">" << tick_label(t, y.log)
          << "</text>\n";
    }
    s << "<text x=\"" << num(0.5 * (x0 + x1)) << "\" y=\"" << num(svg_h - 15) << "\" text-anchor=\"middle\">"
      << escape_xml(xl) << (x.log ? " (log)" : "") << "</text>\n";
    s << "<text x=\"20\" y=\"" << num(0.5 * (y0 + y1)) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << num(0.5 * (y0 + y1)) << ")\">" << escape_xml(yl) << (y.log ? " (log)" : "") << "</text>\n";
}

constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

// Piecewise-linear blue-green-yellow ramp on t in [0, 1].
std::string ramp(double t) {
    static constexpr double stops[5][3] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int i = std::min(3, static_cast<int>(t));
    const double f = t - i;
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::string render_line(const SweepResult& r) {
    const PlotSpec& p = r.plot;
    const std::vector<double> xs = column_values(r, p.x);
    std::vector<std::string> ys{p.y};
    ys.insert(ys.end(), p.series.begin(), p.series.end());

    // Curves: (label, points) in first-appearance order.
    std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> curves;
    std::vector<double> all_y;
    if (!p.group.empty()) {
        const std::size_t g = column_index(r, p.group);
        const std::vector<double> yv = column_values(r, p.y);
        std::map<std::string, std::size_t> slot;
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            const std::string key = p.group + "=" + cell_text(r.rows[i][g]);
            auto [it, fresh] = slot.emplace(key, curves.size());
            if (fresh) curves.push_back({key, {}});
            curves[it->second].second.emplace_back(xs[i], yv[i]);
            all_y.push_back(yv[i]);
        }
    } else {
        for (const auto& name : ys) {
            const std::vector<double> yv = column_values(r, name);
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < xs.size(); ++i) pts.emplace_back(xs[i], yv[i]);
            curves.push_back({name, std::move(pts)});
            all_y.insert(all_y.end(), yv.begin(), yv.end());
        }
    }
    const Axis ax = make_axis(xs, p.log_x, pad_l, svg_w - pad_r);
    const Axis ay = make_axis(all_y, p.log_y, svg_h - pad_b, pad_t);

    std::ostringstream s;
    draw_axes(s, ax, ay, p.x, p.y);
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = palette[c % std::size(palette)];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& [x, y] : curves[c].second) {
            if (!std::isfinite(x) || !std::isfinite(y) || (p.log_x && x <= 0) || (p.log_y && y <= 0)) continue;
            s << (first ? "" : " ") << num(ax.map(x)) << "," << num(ay.map(y));
            first = false;
        }
        s << "\"/>\n";
        const double ly = pad_t + 15.0 + 18.0 * static_cast<double>(c);
        s << "<line x1=\"" << num(svg_w - pad_r + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(svg_w - pad_r + 30)
          << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << num(svg_w - pad_r + 35) << "\" y=\"" << num(ly + 4) << "\">"
          << escape_xml(curves[c].first) << "</text>\n";
    }
    return s.str();
}

std::string render_heatmap(const SweepResult& r) {
    const PlotSpec& p = r.plot;
    const std::vector<double> xs = column_values(r, p.x);
    const std::vector<double> ys = column_values(r, p.y);
    const std::vector<double> zs = column_values(r, p.z);
    std::vector<double> ux = xs, uy = ys;
    std::sort(ux.begin(), ux.end());
    ux.erase(std::unique(ux.begin(), ux.end()), ux.end());
    std::sort(uy.begin(), uy.end());
    uy.erase(std::unique(uy.begin(), uy.end()), uy.end());
    double zlo = std::numeric_limits<double>::infinity(), zhi = -zlo;
    for (double z : zs) {
        if (!std::isfinite(z)) continue;
        zlo = std::min(zlo, z);
        zhi = std::max(zhi, z);
    }
    if (!(zhi > zlo)) zhi = zlo + 1.0;

    const double x0 = pad_l, x1 = svg_w - pad_r, y0 = svg_h - pad_b, y1 = pad_t;
    const double cw = (x1 - x0) / static_cast<double>(ux.size());
    const double ch = (y0 - y1) / static_cast<double>(uy.size());
    std::ostringstream s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto ix = std::lower_bound(ux.begin(), ux.end(), xs[i]) - ux.begin();
        const auto iy = std::lower_bound(uy.begin(), uy.end(), ys[i]) - uy.begin();
        const std::string fill = std::isfinite(zs[i]) ? ramp((zs[i] - zlo) / (zhi - zlo)) : std::string("#bbbbbb");
        // Half-pixel overlap hides antialiasing seams between cells.
        s << "<rect x=\"" << num(x0 + ix * cw) << "\" y=\"" << num(y0 - (iy + 1) * ch) << "\" width=\"" << num(cw + 0.5)
          << "\" height=\"" << num(ch + 0.5) << "\" fill=\"" << fill << "\"/>\n";
    }
    Axis ax{ux.front() - 0.5 * (ux.size() > 1 ? ux[1] - ux[0] : 1.0), ux.back() + 0.5 * (ux.size() > 1 ? ux[1] - ux[0] : 1.0),
            false, x0, x1};
    Axis ay{uy.front() - 0.5 * (uy.size() > 1 ? uy[1] - uy[0] : 1.0), uy.back() + 0.5 * (uy.size() > 1 ? uy[1] - uy[0] : 1.0),
            false, y0, y1};
    draw_axes(s, ax, ay, p.x, p.y);
    // Color bar.
    const double bx = svg_w - pad_r + 30;
    for (int i = 0; i < 50; ++i) {
        const double t = (i + 0.5) / 50.0;
        s << "<rect x=\"" << num(bx) << "\" y=\"" << num(y0 - (i + 1) * (y0 - y1) / 50.0) << "\" width=\"20\" height=\""
          << num((y0 - y1) / 50.0 + 0.5) << "\" fill=\"" << ramp(t) << "\"/>\n";
    }
    s << "<text x=\"" << num(bx + 25) << "\" y=\"" << num(y0) << "\">" << tick_label(zlo) << "</text>\n";
    s << "<text x=\"" << num(bx + 25) << "\" y=\"" << num(y1 + 10) << "\">" << tick_label(zhi) << "</text>\n";
    s << "<text x=\"" << num(bx) << "\" y=\"" << num(y1 - 10) << "\">" << escape_xml(p.z) << "</text>\n";
    return s.str();
}

}  // namespace

std::string cell_text(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    return std::get<std::string>(c);
}

std::size_t column_index(const SweepResult& r, std::string_view name) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
        if (r.columns[i] == name) return i;
    }
    throw ValidationError("column '" + std::string(name) + "' not present");
}

std::string to_csv(const SweepResult& r) {
    std::string out;
    auto comment = [&](const std::string& k, const std::string& v) {
        std::string line = "# " + k + ": " + v;
        for (char& c : line) {
            if (c == '\n') c = ' ';
        }
        out += line + "\n";
    };
    for (const auto& [k, v] : r.meta) comment(k, v);
    std::vector<std::pair<std::string, std::string>> flat;
    for (const auto& [k, v] : r.report.items()) flatten(v, "report." + k, flat);
    for (const auto& [k, v] : flat) comment(k, v);
    for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? "," : "") + csv_field(r.columns[i]);
    out += "\n";
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(cell_text(row[i]));
        out += "\n";
    }
    return out;
}

SweepResult parse_csv(std::string_view text) {
    SweepResult r;
    std::size_t pos = 0;
    while (pos < text.size() && text[pos] == '#') {
        const std::size_t eol = text.find('\n', pos);
        const std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        const std::size_t sep = line.find(": ");
        if (line.size() < 2 || line[1] != ' ' || sep == std::string_view::npos) {
            throw ValidationError("csv: malformed comment line");
        }
        r.meta.emplace_back(std::string(line.substr(2, sep - 2)), std::string(line.substr(sep + 2)));
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
    }
    if (pos >= text.size()) throw ValidationError("csv: missing header row");
    r.columns = read_record(text, pos);
    while (pos < text.size()) {
        std::vector<std::string> f = read_record(text, pos);
        if (f.size() != r.columns.size()) throw ValidationError("csv: row width differs from the header");
        std::vector<Cell> row(f.begin(), f.end());
        r.rows.push_back(std::move(row));
    }
    return r;
}

std::string to_json(const SweepResult& r) {
    OrderedJson j;
    OrderedJson meta = OrderedJson::object();
    for (const auto& [k, v] : r.meta) meta[k] = v;
    j["meta"] = std::move(meta);
    j["report"] = r.report;
    j["columns"] = r.columns;
    OrderedJson rows = OrderedJson::array();
    for (const auto& row : r.rows) {
        OrderedJson jr = OrderedJson::array();
        for (const auto& c : row) jr.push_back(cell_json(c));
        rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

SweepResult parse_json(std::string_view text) {
    OrderedJson j;
    try {
        j = OrderedJson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("json: ") + e.what());
    }
    SweepResult r;
    for (const auto& [k, v] : j.at("meta").items()) r.meta.emplace_back(k, v.get<std::string>());
    r.report = j.at("report");
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& jr : j.at("rows")) {
        std::vector<Cell> row;
        for (const auto& c : jr) row.push_back(json_cell(c));
        if (row.size() != r.columns.size()) throw ValidationError("json: row width differs from the columns");
        r.rows.push_back(std::move(row));
    }
    return r;
}

std::string to_svg(const SweepResult& r) {
    if (r.plot.kind == PlotSpec::Kind::None) throw ValidationError("format: this command has no svg view");
    if (r.rows.empty()) throw ValidationError("format: nothing to plot");
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(svg_w) << "\" height=\"" << num(svg_h)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
    s << "<text x=\"" << num(pad_l) << "\" y=\"24\" font-size=\"14\">" << escape_xml(r.plot.title) << "</text>\n";
    s << (r.plot.kind == PlotSpec::Kind::Heatmap ? render_heatmap(r) : render_line(r));
    s << "</svg>\n";
    return s.str();
}

}  // namespace xxz
