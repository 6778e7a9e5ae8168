#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace xxz {

using Cell = std::variant<std::int64_t, double, std::string>;
using OrderedJson = nlohmann::ordered_json;

// Quick-look plot description; not part of the serialized table.
struct PlotSpec {
    enum class Kind { None, Line, Heatmap } kind = Kind::None;
    std::string x, y, z;           // column names; z for heatmaps
    std::vector<std::string> series;  // extra y columns for line plots
    std::string group;             // line plots: one curve per distinct value
    bool log_x = false, log_y = false;
    std::string title;
};

// Tabular result plus an ordered metadata echo and a free-form report.
// Rows carry every column; failed grid points hold their message in the
// "error" column and NaN observables.
struct SweepResult {
    std::vector<std::pair<std::string, std::string>> meta;
    OrderedJson report = OrderedJson::object();
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    PlotSpec plot;
};

std::string cell_text(const Cell& c);

// CSV: "# key: value" comment lines (meta, then the report flattened under
// "report."), one header row, LF line endings, RFC 4180 quoting.
std::string to_csv(const SweepResult& r);
// Reads the layout written by to_csv; cells and comment values stay text, so
// writing the result again reproduces the input bytes.
SweepResult parse_csv(std::string_view text);

// {"meta": {...}, "report": {...}, "columns": [...], "rows": [[...]]}, two-space
// indent, trailing LF; non-finite numbers become null.
std::string to_json(const SweepResult& r);
SweepResult parse_json(std::string_view text);

// Standalone SVG rendering of r.plot; ValidationError when there is no plot.
std::string to_svg(const SweepResult& r);

// Index of a column; ValidationError if absent.
std::size_t column_index(const SweepResult& r, std::string_view name);

// Calls f(i) for i in [0, n) on up to `threads` workers and returns the
// results in index order. The first exception is rethrown after all workers
// finish.
template <class F>
auto parallel_map(std::size_t n, int threads, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<R> out(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = f(i);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace xxz
