#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scengen/errors.hpp"

namespace scengen {

/// Whole hours since 1970-01-01T00:00Z. All timestamps are UTC.
using HourStamp = std::int64_t;

// ---------------------------------------------------------------------------
// Timestamps

/// Parses `YYYY-MM-DD[T| ]HH[:MM[:SS]][Z|+00:00]`. Minutes and seconds must be
/// zero. Returns nullopt on any deviation.
inline std::optional<HourStamp> parse_iso8601_hour(std::string_view text) {
    auto digits = [&](std::size_t pos, std::size_t n) -> std::optional<int> {
        if (pos + n > text.size()) return std::nullopt;
        int value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + n, value);
        if (ec != std::errc{} || ptr != text.data() + pos + n) return std::nullopt;
        return value;
    };
    if (text.size() < 13 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ')) {
        return std::nullopt;
    }
    const auto y = digits(0, 4), mo = digits(5, 2), d = digits(8, 2), h = digits(11, 2);
    if (!y || !mo || !d || !h || *h > 23) return std::nullopt;
    std::size_t pos = 13;
    for (int part = 0; part < 2 && pos < text.size() && text[pos] == ':'; ++part) {
        const auto v = digits(pos + 1, 2);
        if (!v || *v != 0) return std::nullopt;
        pos += 3;
    }
    const std::string_view tail = text.substr(pos);
    if (!(tail.empty() || tail == "Z" || tail == "+00:00" || tail == "+0000")) return std::nullopt;

    using namespace std::chrono;
    const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
    return static_cast<HourStamp>(days_since_epoch) * 24 + *h;
}

inline std::string format_iso8601_hour(HourStamp stamp) {
    using namespace std::chrono;
    const auto day_index = stamp >= 0 ? stamp / 24 : -((-stamp + 23) / 24);
    const auto hour = static_cast<int>(stamp - day_index * 24);
    const year_month_day ymd{sys_days{days{day_index}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00:00Z", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hour);
    return buf;
}

struct CalendarHour {
    int year;
    unsigned month;
    unsigned day;
    int hour;
    int weekday;  // 0 = Sunday
};

inline CalendarHour calendar_of(HourStamp stamp) {
    using namespace std::chrono;
    const auto day_index = stamp >= 0 ? stamp / 24 : -((-stamp + 23) / 24);
    const sys_days sd{days{day_index}};
    const year_month_day ymd{sd};
    return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
            static_cast<unsigned>(ymd.day()), static_cast<int>(stamp - day_index * 24),
            static_cast<int>(weekday{sd}.c_encoding())};
}

inline HourStamp month_start(int year, unsigned month) {
    using namespace std::chrono;
    const sys_days sd{year_month_day{std::chrono::year{year}, std::chrono::month{month}, day{1}}};
    return static_cast<HourStamp>(sd.time_since_epoch().count()) * 24;
}

// ---------------------------------------------------------------------------
// Panels

namespace detail {
struct SeriesTag {};
struct CovariateTag {};
}  // namespace detail

/// A rows×T matrix of observations on a constant-step time grid. Rows are
/// locations (targets) or covariates. Immutable once constructed.
template <class Tag>
class BasicPanel {
public:
    BasicPanel() = default;

    BasicPanel(std::vector<std::string> ids, std::vector<HourStamp> timestamps, Eigen::MatrixXd values)
        : ids_(std::move(ids)), timestamps_(std::move(timestamps)), values_(std::move(values)) {
        if (static_cast<std::size_t>(values_.rows()) != ids_.size() ||
            static_cast<std::size_t>(values_.cols()) != timestamps_.size()) {
            throw Error(ErrorCode::ShapeMismatch, "panel values are " + std::to_string(values_.rows()) + "x" +
                                                      std::to_string(values_.cols()) + " but there are " +
                                                      std::to_string(ids_.size()) + " ids and " +
                                                      std::to_string(timestamps_.size()) + " timestamps");
        }
        for (std::size_t t = 1; t < timestamps_.size(); ++t) {
            if (timestamps_[t] <= timestamps_[t - 1]) {
                throw Error(ErrorCode::NonMonotonicTimestamps,
                            "timestamp " + format_iso8601_hour(timestamps_[t]) + " at column " + std::to_string(t));
            }
        }
        if (!values_.allFinite()) {
            for (Eigen::Index r = 0; r < values_.rows(); ++r) {
                for (Eigen::Index c = 0; c < values_.cols(); ++c) {
                    if (!std::isfinite(values_(r, c))) {
                        throw Error(ErrorCode::NonNumericCell, "non-finite value in series '" + ids_[r] +
                                                                   "' at " + format_iso8601_hour(timestamps_[c]));
                    }
                }
            }
        }
    }

    std::size_t rows() const noexcept { return ids_.size(); }
    std::size_t length() const noexcept { return timestamps_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<HourStamp>& timestamps() const noexcept { return timestamps_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    double operator()(std::size_t row, std::size_t col) const { return values_(row, col); }

    /// Columns [first, last).
    BasicPanel slice(std::size_t first, std::size_t last) const {
        return BasicPanel(ids_, std::vector<HourStamp>(timestamps_.begin() + first, timestamps_.begin() + last),
                          values_.middleCols(first, last - first));
    }

    /// True when consecutive timestamps are exactly one hour apart.
    bool is_hourly() const noexcept {
        for (std::size_t t = 1; t < timestamps_.size(); ++t) {
            if (timestamps_[t] - timestamps_[t - 1] != 1) return false;
        }
        return true;
    }

private:
    std::vector<std::string> ids_;
    std::vector<HourStamp> timestamps_;
    Eigen::MatrixXd values_;
};

using SeriesPanel = BasicPanel<detail::SeriesTag>;
using CovariatePanel = BasicPanel<detail::CovariateTag>;

/// Stacks the rows of two covariate panels that share a grid.
inline CovariatePanel stack_covariates(const CovariatePanel& a, const CovariatePanel& b) {
    if (a.timestamps() != b.timestamps()) {
        throw Error(ErrorCode::ShapeMismatch, "covariate panels are on different time grids");
    }
    std::vector<std::string> ids = a.ids();
    ids.insert(ids.end(), b.ids().begin(), b.ids().end());
    Eigen::MatrixXd values(a.rows() + b.rows(), a.length());
    values << a.values(), b.values();
    return CovariatePanel(std::move(ids), a.timestamps(), std::move(values));
}

/// Hour-of-day and day-of-week sin/cos pairs for the given grid.
inline CovariatePanel time_encodings(const std::vector<HourStamp>& grid) {
    Eigen::MatrixXd values(4, static_cast<Eigen::Index>(grid.size()));
    for (std::size_t t = 0; t < grid.size(); ++t) {
        const auto cal = calendar_of(grid[t]);
        const double hour_angle = 2.0 * std::numbers::pi * cal.hour / 24.0;
        const double dow_angle = 2.0 * std::numbers::pi * (cal.weekday + cal.hour / 24.0) / 7.0;
        values(0, t) = std::sin(hour_angle);
        values(1, t) = std::cos(hour_angle);
        values(2, t) = std::sin(dow_angle);
        values(3, t) = std::cos(dow_angle);
    }
    return CovariatePanel({"hour_sin", "hour_cos", "dow_sin", "dow_cos"}, grid, std::move(values));
}

// ---------------------------------------------------------------------------
// CSV ingestion

enum class PanelKind {
    Series,           ///< hourly targets
    Covariate,        ///< hourly covariates
    CoarseCovariate,  ///< covariates on any constant whole-hour step (e.g. 6 h)
};

struct CsvOptions {
    /// Fill missing cells from the previous row, at most this many in a row.
    bool forward_fill = false;
    static constexpr int kMaxForwardFill = 3;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

inline bool is_missing_token(std::string_view cell) {
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null";
}

inline std::optional<double> parse_double(std::string_view cell) {
    double value = 0.0;
    const char* first = cell.data();
    if (!cell.empty() && cell.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (lines.empty() && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        lines.push_back(std::move(line));
    }
    return lines;
}

struct RawTable {
    std::vector<std::string> ids;
    std::vector<HourStamp> timestamps;
    Eigen::MatrixXd values;
};

inline RawTable parse_panel_table(const std::string& path, const CsvOptions& options) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw Error(ErrorCode::MissingColumn, path + ": empty file, no header row");
    const auto header = split_csv_line(lines.front());
    if (header.size() < 2 || header.front() != "timestamp") {
        throw Error(ErrorCode::MissingColumn,
                    path + ": header must be 'timestamp,<id1>,...' with at least one data column");
    }
    RawTable table;
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c].empty()) {
            throw Error(ErrorCode::MissingColumn, path + ": header column " + std::to_string(c + 1) + " is unnamed");
        }
        table.ids.emplace_back(header[c]);
    }

    const std::size_t n_cols = table.ids.size();
    struct Row {
        HourStamp stamp;
        std::size_t line;
        std::vector<std::optional<double>> cells;
    };
    std::vector<Row> rows;
    rows.reserve(lines.size() - 1);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cells = split_csv_line(lines[li]);
        const std::string where = path + ": row " + std::to_string(li + 1);
        if (cells.size() != n_cols + 1) {
            throw Error(ErrorCode::MissingColumn, where + " has " + std::to_string(cells.size()) +
                                                      " cells, header has " + std::to_string(n_cols + 1));
        }
        const auto stamp = parse_iso8601_hour(cells[0]);
        if (!stamp) {
            throw Error(ErrorCode::NonNumericCell,
                        where + ", column 'timestamp': '" + std::string(cells[0]) + "' is not an ISO-8601 hour");
        }
        Row row{*stamp, li + 1, {}};
        row.cells.reserve(n_cols);
        for (std::size_t c = 0; c < n_cols; ++c) {
            const auto cell = cells[c + 1];
            if (is_missing_token(cell)) {
                row.cells.emplace_back(std::nullopt);
                continue;
            }
            const auto v = parse_double(cell);
            if (!v) {
                throw Error(ErrorCode::NonNumericCell,
                            where + ", column '" + table.ids[c] + "': '" + std::string(cell) + "' is not a number");
            }
            row.cells.emplace_back(*v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::RangeTooShort, path + ": no data rows");

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.stamp < b.stamp; });
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].stamp == rows[r - 1].stamp) {
            throw Error(ErrorCode::NonMonotonicTimestamps,
                        path + ": row " + std::to_string(rows[r].line) + " repeats timestamp " +
                            format_iso8601_hour(rows[r].stamp) + " (first seen on row " +
                            std::to_string(rows[r - 1].line) + ")");
        }
    }

    table.values.resize(static_cast<Eigen::Index>(n_cols), static_cast<Eigen::Index>(rows.size()));
    table.timestamps.reserve(rows.size());
    for (std::size_t c = 0; c < n_cols; ++c) {
        int run = 0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& cell = rows[r].cells[c];
            if (cell) {
                table.values(c, r) = *cell;
                run = 0;
                continue;
            }
            const std::string where = path + ": row " + std::to_string(rows[r].line) + ", column '" + table.ids[c] + "'";
            if (!options.forward_fill) throw Error(ErrorCode::NonNumericCell, where + ": missing value");
            if (r == 0) throw Error(ErrorCode::NonNumericCell, where + ": missing value with nothing to fill from");
            if (++run > CsvOptions::kMaxForwardFill) {
                throw Error(ErrorCode::NonNumericCell, where + ": more than " +
                                                           std::to_string(CsvOptions::kMaxForwardFill) +
                                                           " consecutive missing values");
            }
            table.values(c, r) = table.values(c, r - 1);
        }
    }
    for (const auto& row : rows) table.timestamps.push_back(row.stamp);
    return table;
}

inline void check_constant_step(const std::string& path, const std::vector<HourStamp>& ts, bool hourly) {
    if (ts.size() < 2) return;
    const HourStamp step = hourly ? 1 : ts[1] - ts[0];
    for (std::size_t t = 1; t < ts.size(); ++t) {
        if (ts[t] - ts[t - 1] != step) {
            throw Error(ErrorCode::GapInHourlyGrid,
                        path + ": " + std::to_string(ts[t] - ts[t - 1]) + "-hour step between " +
                            format_iso8601_hour(ts[t - 1]) + " and " + format_iso8601_hour(ts[t]) +
                            " (expected " + std::to_string(step) + ")");
        }
    }
}

}  // namespace detail

template <PanelKind Kind>
using PanelFor = std::conditional_t<Kind == PanelKind::Series, SeriesPanel, CovariatePanel>;

/// Reads `timestamp,<id1>,<id2>,...`. Rows may appear in any order; they are
/// sorted, duplicates are rejected, and the grid must have no gaps.
template <PanelKind Kind>
PanelFor<Kind> load_panel_csv(const std::string& path, const CsvOptions& options = {}) {
    auto table = detail::parse_panel_table(path, options);
    detail::check_constant_step(path, table.timestamps, Kind != PanelKind::CoarseCovariate);
    return PanelFor<Kind>(std::move(table.ids), std::move(table.timestamps), std::move(table.values));
}

inline SeriesPanel load_series_csv(const std::string& path, const CsvOptions& options = {}) {
    return load_panel_csv<PanelKind::Series>(path, options);
}

inline CovariatePanel load_covariate_csv(const std::string& path, const CsvOptions& options = {}) {
    return load_panel_csv<PanelKind::Covariate>(path, options);
}

template <class Tag>
void write_panel_csv(const std::string& path, const BasicPanel<Tag>& panel) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << "timestamp";
    for (const auto& id : panel.ids()) out << ',' << id;
    out << '\n';
    char buf[64];
    for (std::size_t t = 0; t < panel.length(); ++t) {
        out << format_iso8601_hour(panel.timestamps()[t]);
        for (std::size_t r = 0; r < panel.rows(); ++r) {
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, panel(r, t));
            out << ',' << std::string_view(buf, static_cast<std::size_t>(end - buf));
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Covariate interpolation

/// Linear interpolation of a coarse covariate grid onto `target_grid`. Values
/// are held flat outside the raw coverage, but only for up to one coarse step.
inline CovariatePanel interpolate_covariates(const CovariatePanel& raw, const std::vector<HourStamp>& target_grid) {
    const auto& src = raw.timestamps();
    if (src.empty()) throw Error(ErrorCode::GridNotCovering, "raw covariate panel is empty");
    const HourStamp step = src.size() > 1 ? src[1] - src[0] : 1;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(raw.rows()), static_cast<Eigen::Index>(target_grid.size()));
    for (std::size_t t = 0; t < target_grid.size(); ++t) {
        const HourStamp at = target_grid[t];
        if (at < src.front() - step || at > src.back() + step) {
            throw Error(ErrorCode::GridNotCovering,
                        format_iso8601_hour(at) + " is more than one coarse step outside [" +
                            format_iso8601_hour(src.front()) + ", " + format_iso8601_hour(src.back()) + "]");
        }
        const auto upper = std::lower_bound(src.begin(), src.end(), at);
        if (upper != src.end() && *upper == at) {
            out.col(t) = raw.values().col(upper - src.begin());
        } else if (upper == src.begin()) {
            out.col(t) = raw.values().col(0);
        } else if (upper == src.end()) {
            out.col(t) = raw.values().col(src.size() - 1);
        } else {
            const auto hi = upper - src.begin();
            const auto lo = hi - 1;
            const double w = static_cast<double>(at - src[lo]) / static_cast<double>(src[hi] - src[lo]);
            out.col(t) = raw.values().col(lo) + w * (raw.values().col(hi) - raw.values().col(lo));
        }
    }
    return CovariatePanel(raw.ids(), target_grid, std::move(out));
}

// ---------------------------------------------------------------------------
// Capacities

class CapacityVector {
public:
    CapacityVector() = default;
    explicit CapacityVector(std::vector<double> values) : values_(std::move(values)) {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
                throw Error(ErrorCode::AllZeroSeries,
                            "capacity of location " + std::to_string(i) + " must be positive, got " +
                                std::to_string(values_[i]));
            }
        }
    }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const noexcept { return values_; }
    double total() const noexcept { return std::accumulate(values_.begin(), values_.end(), 0.0); }

private:
    std::vector<double> values_;
};

using CapacityOverrides = std::map<std::string, double>;

/// Reads `location_id,capacity_mw`.
inline CapacityOverrides load_capacities_csv(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw Error(ErrorCode::MissingColumn, path + ": empty capacities file");
    const auto header = detail::split_csv_line(lines.front());
    if (header.size() != 2 || header[0] != "location_id" || header[1] != "capacity_mw") {
        throw Error(ErrorCode::MissingColumn, path + ": header must be 'location_id,capacity_mw'");
    }
    CapacityOverrides out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cells = detail::split_csv_line(lines[li]);
        const std::string where = path + ": row " + std::to_string(li + 1);
        if (cells.size() != 2) throw Error(ErrorCode::MissingColumn, where + " must have 2 cells");
        const auto v = detail::parse_double(cells[1]);
        if (!v || *v <= 0.0) {
            throw Error(ErrorCode::NonNumericCell, where + ", column 'capacity_mw': '" + std::string(cells[1]) +
                                                       "' is not a positive number");
        }
        out[std::string(cells[0])] = *v;
    }
    return out;
}

/// Per-location maximum over columns [0, train_end). Overrides win.
inline CapacityVector derive_capacity(const SeriesPanel& panel, std::size_t train_end,
                                      const CapacityOverrides& overrides = {}) {
    if (train_end == 0 || train_end > panel.length()) {
        throw Error(ErrorCode::RangeTooShort, "train_end " + std::to_string(train_end) + " outside panel of length " +
                                                  std::to_string(panel.length()));
    }
    std::vector<double> caps(panel.rows());
    for (std::size_t i = 0; i < panel.rows(); ++i) {
        if (auto it = overrides.find(panel.ids()[i]); it != overrides.end()) {
            caps[i] = it->second;
            continue;
        }
        const double peak = panel.values().row(i).head(train_end).maxCoeff();
        if (!(peak > 0.0)) {
            throw Error(ErrorCode::AllZeroSeries, "series '" + panel.ids()[i] + "' has no positive training value");
        }
        caps[i] = peak;
    }
    return CapacityVector(std::move(caps));
}

/// Timestamp-bounded variant: training slice is every column strictly before
/// `train_end`.
inline CapacityVector derive_capacity_until(const SeriesPanel& panel, HourStamp train_end,
                                            const CapacityOverrides& overrides = {}) {
    const auto& ts = panel.timestamps();
    const auto n = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), train_end) - ts.begin());
    return derive_capacity(panel, n, overrides);
}

// ---------------------------------------------------------------------------
// Normalization

struct NormalizeResult {
    SeriesPanel panel;
    std::size_t clamped = 0;  ///< cells above capacity that were set to 1
};

inline NormalizeResult normalize(const SeriesPanel& panel, const CapacityVector& cap) {
    if (cap.size() != panel.rows()) {
        throw Error(ErrorCode::ShapeMismatch, "capacity vector has " + std::to_string(cap.size()) +
                                                  " entries for " + std::to_string(panel.rows()) + " series");
    }
    Eigen::MatrixXd v = panel.values();
    std::size_t clamped = 0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index t = 0; t < v.cols(); ++t) {
            double x = v(i, t) / cap[i];
            if (x > 1.0) {
                x = 1.0;
                ++clamped;
            }
            v(i, t) = x;
        }
    }
    return {SeriesPanel(panel.ids(), panel.timestamps(), std::move(v)), clamped};
}

inline SeriesPanel denormalize(const SeriesPanel& panel, const CapacityVector& cap) {
    Eigen::MatrixXd v = panel.values();
    for (Eigen::Index i = 0; i < v.rows(); ++i) v.row(i) *= cap[i];
    return SeriesPanel(panel.ids(), panel.timestamps(), std::move(v));
}

// ---------------------------------------------------------------------------
// Windows

struct WindowSpec {
    std::size_t past = 24;     ///< W
    std::size_t horizon = 48;  ///< H

    void validate() const {
        if (past < 1 || horizon < 1) {
            throw Error(ErrorCode::ConfigError, "window lengths must be >= 1 (past=" + std::to_string(past) +
                                                    ", horizon=" + std::to_string(horizon) + ")");
        }
    }
    friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// One rolling-window sample. `origin` t counts the observations available at
/// forecast time: past = columns [t-W, t), future = columns [t, t+H).
struct ForecastWindow {
    std::size_t origin = 0;
    Eigen::MatrixXd past_targets;       ///< D×W
    Eigen::MatrixXd past_covariates;    ///< D'×W
    Eigen::MatrixXd future_covariates;  ///< D'×H
    std::optional<Eigen::MatrixXd> future_targets;  ///< D×H, absent at inference time
};

/// Inclusive range of forecast origins.
struct OriginRange {
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t size() const noexcept { return last - first + 1; }
};

/// All origins with a full past window and, if `with_targets`, a full future.
inline OriginRange feasible_origins(std::size_t length, const WindowSpec& spec, bool with_targets = true) {
    spec.validate();
    const std::size_t need = spec.past + (with_targets ? spec.horizon : 0);
    if (length < need || (!with_targets && length < spec.past)) {
        throw Error(ErrorCode::RangeTooShort, "series of length " + std::to_string(length) +
                                                  " cannot hold a window with W=" + std::to_string(spec.past) +
                                                  ", H=" + std::to_string(spec.horizon));
    }
    return {spec.past, with_targets ? length - spec.horizon : length};
}

inline std::size_t window_count(const OriginRange& range, std::size_t stride) {
    return (range.last - range.first) / stride + 1;
}

/// Cuts one window per origin in `range` (step `stride`). `covs` may be null
/// for target-only models.
inline std::vector<ForecastWindow> build_windows(const SeriesPanel& panel, const CovariatePanel* covs,
                                                 const WindowSpec& spec, std::optional<OriginRange> range = {},
                                                 std::size_t stride = 1, bool with_targets = true) {
    if (stride == 0) throw Error(ErrorCode::ConfigError, "window stride must be positive");
    const auto feasible = feasible_origins(panel.length(), spec, with_targets);
    const OriginRange r = range.value_or(feasible);
    if (r.first > r.last || r.first < feasible.first || r.last > feasible.last) {
        throw Error(ErrorCode::RangeTooShort, "origin range [" + std::to_string(r.first) + ", " +
                                                  std::to_string(r.last) + "] is outside the feasible [" +
                                                  std::to_string(feasible.first) + ", " +
                                                  std::to_string(feasible.last) + "]");
    }
    if (covs != nullptr && covs->timestamps() != panel.timestamps()) {
        throw Error(ErrorCode::ShapeMismatch, "covariate grid differs from target grid");
    }
    if (covs != nullptr && r.last + spec.horizon > covs->length()) {
        throw Error(ErrorCode::RangeTooShort, "covariates end before the horizon of origin " + std::to_string(r.last));
    }
    const auto W = static_cast<Eigen::Index>(spec.past);
    const auto H = static_cast<Eigen::Index>(spec.horizon);
    std::vector<ForecastWindow> out;
    out.reserve(window_count(r, stride));
    for (std::size_t t = r.first; t <= r.last; t += stride) {
        const auto o = static_cast<Eigen::Index>(t);
        ForecastWindow w;
        w.origin = t;
        w.past_targets = panel.values().middleCols(o - W, W);
        if (covs) {
            w.past_covariates = covs->values().middleCols(o - W, W);
            w.future_covariates = covs->values().middleCols(o, H);
        } else {
            w.past_covariates.resize(0, W);
            w.future_covariates.resize(0, H);
        }
        if (with_targets) w.future_targets = panel.values().middleCols(o, H);
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace scengen
