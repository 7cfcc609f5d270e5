#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "scengen/data_model.hpp"
#include "scengen/errors.hpp"
#include "scengen/pipeline/config.hpp"

namespace scengen {

/// Half-open column range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return end <= begin; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct SplitTriple {
    IndexRange train, validation, test;
    std::optional<HourStamp> month;  ///< first hour of the evaluation month (monthly policy)
};

struct SplitPlan {
    std::vector<SplitTriple> splits;

    /// Disjoint, ordered ranges in every triple.
    void check() const {
        for (std::size_t k = 0; k < splits.size(); ++k) {
            const auto& s = splits[k];
            if (!(s.train.end <= s.validation.begin && s.validation.end <= s.test.begin) || s.train.empty() ||
                s.test.empty()) {
                throw Error(ErrorCode::InsufficientData, "split " + std::to_string(k) + " has overlapping ranges");
            }
        }
    }
};

/// Monthly policy: one triple per calendar month whose start leaves at least
/// `min_train_hours` (and W+H+1 points) of history and whose validation and
/// test weeks fit in the data. Fractional policy: one triple.
inline SplitPlan make_split_plan(const std::vector<HourStamp>& timestamps, const SplitSettings& s,
                                 const WindowSpec& window) {
    const std::size_t T = timestamps.size();
    const std::size_t min_train = window.past + window.horizon + 1;
    SplitPlan plan;
    if (s.policy == SplitPolicy::Fractional) {
        const auto n_train = static_cast<std::size_t>(std::llround(s.train * static_cast<double>(T)));
        const auto n_val = static_cast<std::size_t>(std::llround(s.validation * static_cast<double>(T)));
        const auto n_test_req = static_cast<std::size_t>(std::llround(s.test * static_cast<double>(T)));
        if (n_train + n_val >= T) throw Error(ErrorCode::InsufficientData, "fractional split leaves no test data");
        const std::size_t n_test = std::min(T - n_train - n_val, n_test_req);
        if (n_train < min_train || n_test < window.horizon) {
            throw Error(ErrorCode::InsufficientData, "fractional split gives " + std::to_string(n_train) +
                                                         " training and " + std::to_string(n_test) +
                                                         " test points; need " + std::to_string(min_train) + " and " +
                                                         std::to_string(window.horizon));
        }
        plan.splits.push_back({{0, n_train}, {n_train, n_train + n_val}, {n_train + n_val, n_train + n_val + n_test}, {}});
        plan.check();
        return plan;
    }
    if (T == 0) throw Error(ErrorCode::InsufficientData, "empty panel");
    const std::size_t val_len = s.validation_days * 24, test_len = s.test_days * 24;
    if (test_len < window.horizon) {
        throw Error(ErrorCode::InsufficientData, "test period of " + std::to_string(test_len) +
                                                     " hours is shorter than the horizon");
    }
    auto cal = calendar_of(timestamps.front());
    int year = cal.year;
    unsigned month = cal.month;
    for (;;) {
        if (++month > 12) {
            month = 1;
            ++year;
        }
        const HourStamp start = month_start(year, month);
        if (start > timestamps.back()) break;
        const auto idx = static_cast<std::size_t>(
            std::lower_bound(timestamps.begin(), timestamps.end(), start) - timestamps.begin());
        if (idx < std::max(s.min_train_hours, min_train)) continue;
        if (idx + val_len + test_len > T) break;
        plan.splits.push_back({{0, idx}, {idx, idx + val_len}, {idx + val_len, idx + val_len + test_len}, start});
    }
    if (plan.splits.empty()) {
        throw Error(ErrorCode::InsufficientData, "no month has " + std::to_string(std::max(s.min_train_hours, min_train)) +
                                                     " hours of history followed by " +
                                                     std::to_string(val_len + test_len) + " evaluation hours");
    }
    plan.check();
    return plan;
}

/// Origins whose past and future both lie inside `r`.
inline std::optional<OriginRange> origins_within(const IndexRange& r, const WindowSpec& w) {
    if (r.size() < w.past + w.horizon) return std::nullopt;
    return OriginRange{r.begin + w.past, r.end - w.horizon};
}

/// Test origins: the future must lie inside `r`; the past may reach back
/// before it (those observations are known at forecast time).
inline std::optional<OriginRange> test_origins(const IndexRange& r, const WindowSpec& w) {
    const std::size_t first = std::max(r.begin, w.past);
    if (r.end < w.horizon || first > r.end - w.horizon) return std::nullopt;
    return OriginRange{first, r.end - w.horizon};
}

}  // namespace scengen
