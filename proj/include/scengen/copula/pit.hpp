#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "scengen/copula/normal.hpp"
#include "scengen/errors.hpp"
#include "scengen/marginals/cdf.hpp"
#include "scengen/marginals/linear_model.hpp"
#include "scengen/stats.hpp"

namespace scengen {

inline constexpr double kDefaultPitClamp = 1e-6;

/// D×H marginal CDFs for one forecast origin, stored location-major: cell
/// (i, h) is element i·H + h, the same index used for copula rows.
class MarginalGrid {
public:
    MarginalGrid() = default;
    MarginalGrid(std::size_t series, std::size_t horizon) : series_(series), horizon_(horizon), cells_(series * horizon) {}
    MarginalGrid(std::size_t series, std::size_t horizon, std::vector<MarginalCdf> cells)
        : series_(series), horizon_(horizon), cells_(std::move(cells)) {
        if (cells_.size() != series_ * horizon_) {
            throw Error(ErrorCode::MissingMarginal, std::to_string(cells_.size()) + " marginals for a " +
                                                        std::to_string(series_) + "x" + std::to_string(horizon_) +
                                                        " grid");
        }
    }

    std::size_t series() const noexcept { return series_; }
    std::size_t horizon() const noexcept { return horizon_; }
    std::size_t dim() const noexcept { return cells_.size(); }

    MarginalCdf& at(std::size_t i, std::size_t h) { return cells_[i * horizon_ + h]; }
    const MarginalCdf& at(std::size_t i, std::size_t h) const { return cells_[i * horizon_ + h]; }
    const MarginalCdf& operator[](std::size_t cell) const { return cells_[cell]; }
    const std::vector<MarginalCdf>& cells() const noexcept { return cells_; }

private:
    std::size_t series_ = 0, horizon_ = 0;
    std::vector<MarginalCdf> cells_;
};

/// Interpolated-quantile marginals on [0, capacity_i] for every cell.
/// `scale` multiplies the predicted quantiles first (capacity for models
/// trained on capacity factors, 1 for models in target units).
inline MarginalGrid marginal_grid(const QuantileTensor& q, const QuantileSet& levels, std::span<const double> upper,
                                  std::span<const double> scale, TailRule tails = TailRule::Extrapolate) {
    if (upper.size() != q.series() || scale.size() != q.series()) {
        throw Error(ErrorCode::ShapeMismatch, "support bounds do not match the number of series");
    }
    MarginalGrid grid(q.series(), q.horizon());
    std::vector<double> values(q.quantiles());
    for (std::size_t i = 0; i < q.series(); ++i) {
        for (std::size_t h = 0; h < q.horizon(); ++h) {
            const auto cell = q.cell(i, h);
            for (std::size_t k = 0; k < values.size(); ++k) values[k] = cell[k] * scale[i];
            grid.at(i, h) = quantiles_to_cdf(values, levels, 0.0, upper[i], tails);
        }
    }
    return grid;
}

/// d×N Gaussianized PIT values; column n is window n, row i·H + h is cell (i, h).
struct PitMatrix {
    Eigen::MatrixXd values;
    std::size_t series = 0;
    std::size_t horizon = 0;
    std::size_t clamped = 0;       ///< PIT values pushed to the clamp bounds
    double max_ks = 0.0;           ///< largest per-row KS distance to N(0,1)

    std::size_t dim() const noexcept { return series * horizon; }
    std::size_t samples() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// Per-row KS statistics against N(0,1). Diagnostic only.
inline std::vector<double> pit_row_ks(const PitMatrix& pit) {
    std::vector<double> out(pit.dim());
    std::vector<double> row(pit.samples());
    for (std::size_t r = 0; r < pit.dim(); ++r) {
        for (std::size_t n = 0; n < row.size(); ++n) row[n] = pit.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n));
        out[r] = ks_statistic(row, std_normal_cdf);
    }
    return out;
}

/// v = Φ⁻¹(clamp(F(z), ε, 1−ε)) for every realized cell.
inline PitMatrix pit_transform(std::span<const Eigen::MatrixXd> actuals, std::span<const MarginalGrid> marginals,
                               double clamp = kDefaultPitClamp, bool with_ks = true) {
    if (actuals.size() != marginals.size()) {
        throw Error(ErrorCode::MissingMarginal, std::to_string(actuals.size()) + " realized windows but " +
                                                    std::to_string(marginals.size()) + " marginal grids");
    }
    if (actuals.empty()) throw Error(ErrorCode::MissingMarginal, "no windows to transform");
    if (!(clamp > 0.0 && clamp < 0.5)) throw Error(ErrorCode::ConfigError, "PIT clamp must be in (0, 0.5)");
    const std::size_t D = static_cast<std::size_t>(actuals.front().rows());
    const std::size_t H = static_cast<std::size_t>(actuals.front().cols());
    PitMatrix pit;
    pit.series = D;
    pit.horizon = H;
    pit.values.resize(static_cast<Eigen::Index>(D * H), static_cast<Eigen::Index>(actuals.size()));
    for (std::size_t n = 0; n < actuals.size(); ++n) {
        const auto& z = actuals[n];
        const auto& g = marginals[n];
        if (static_cast<std::size_t>(z.rows()) != D || static_cast<std::size_t>(z.cols()) != H) {
            throw Error(ErrorCode::ShapeMismatch, "window " + std::to_string(n) + " has a different D×H shape");
        }
        if (g.series() != D || g.horizon() != H) {
            throw Error(ErrorCode::MissingMarginal, "window " + std::to_string(n) + " has a " +
                                                        std::to_string(g.series()) + "x" + std::to_string(g.horizon()) +
                                                        " marginal grid for a " + std::to_string(D) + "x" +
                                                        std::to_string(H) + " target");
        }
        for (std::size_t i = 0; i < D; ++i) {
            for (std::size_t h = 0; h < H; ++h) {
                const double u = g.at(i, h).cdf(z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)));
                const double uc = std::clamp(u, clamp, 1.0 - clamp);
                if (uc != u) ++pit.clamped;
                pit.values(static_cast<Eigen::Index>(i * H + h), static_cast<Eigen::Index>(n)) = std_normal_inv(uc);
            }
        }
    }
    if (with_ks) {
        const auto ks = pit_row_ks(pit);
        pit.max_ks = ks.empty() ? 0.0 : *std::max_element(ks.begin(), ks.end());
    }
    return pit;
}

/// Convenience overload pulling the realized targets out of windows.
inline PitMatrix pit_transform(std::span<const ForecastWindow> windows, std::span<const MarginalGrid> marginals,
                               double clamp = kDefaultPitClamp, bool with_ks = true) {
    std::vector<Eigen::MatrixXd> actuals;
    actuals.reserve(windows.size());
    for (const auto& w : windows) {
        if (!w.future_targets) {
            throw Error(ErrorCode::MissingMarginal, "window at origin " + std::to_string(w.origin) +
                                                        " has no realized targets");
        }
        actuals.push_back(*w.future_targets);
    }
    return pit_transform(std::span<const Eigen::MatrixXd>(actuals), marginals, clamp, with_ks);
}

}  // namespace scengen
