#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string_view>
#include <string>
#include <vector>

#include "scengen/errors.hpp"
#include "scengen/marginals/beta.hpp"
#include "scengen/marginals/quantile_loss.hpp"

namespace scengen {

/// Predictive CDF of one (location, lead time) cell, in target units.
///
/// Two backings:
///  - QuantileInterp: piecewise linear through (lo,0), (z_q,q)..., (hi,1).
///    Knots are strictly increasing and probabilities non-decreasing; a flat
///    run of probabilities marks a zero-density tail segment.
///    If every predicted quantile coincides the CDF is a step at that value.
///  - Beta: I_{z/capacity}(α, β) on [0, capacity].
///
/// `cdf` is total: it returns 0 below the support and 1 above it.
class MarginalCdf {
public:
    enum class Kind { QuantileInterp, Beta };

    MarginalCdf() = default;

    static MarginalCdf quantile_interp(std::vector<double> knots, std::vector<double> probs) {
        MarginalCdf m;
        m.kind_ = Kind::QuantileInterp;
        m.knots_ = std::move(knots);
        m.probs_ = std::move(probs);
        return m;
    }

    static MarginalCdf point_mass(double value, double lo, double hi) {
        MarginalCdf m;
        m.kind_ = Kind::QuantileInterp;
        m.point_ = true;
        m.knots_ = {lo, value, hi};
        m.probs_ = {0.0, 1.0, 1.0};
        return m;
    }

    static MarginalCdf beta(BetaParams params, double capacity) {
        MarginalCdf m;
        m.kind_ = Kind::Beta;
        m.beta_ = params;
        m.capacity_ = capacity;
        return m;
    }

    Kind kind() const noexcept { return kind_; }
    bool is_point_mass() const noexcept { return point_; }
    double lower() const noexcept { return kind_ == Kind::Beta ? 0.0 : knots_.front(); }
    double upper() const noexcept { return kind_ == Kind::Beta ? capacity_ : knots_.back(); }
    const std::vector<double>& knots() const noexcept { return knots_; }
    const std::vector<double>& probabilities() const noexcept { return probs_; }
    const BetaParams& beta_params() const noexcept { return beta_; }
    double capacity() const noexcept { return capacity_; }

    double cdf(double z) const noexcept {
        if (kind_ == Kind::Beta) return beta_cdf(beta_, std::clamp(z / capacity_, 0.0, 1.0));
        if (point_) return z < knots_[1] ? 0.0 : 1.0;
        if (z <= knots_.front()) return 0.0;
        if (z >= knots_.back()) return 1.0;
        const auto hi = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), z) - knots_.begin());
        const std::size_t lo = hi - 1;
        const double w = (z - knots_[lo]) / (knots_[hi] - knots_[lo]);
        return probs_[lo] + w * (probs_[hi] - probs_[lo]);
    }

    /// Quantile function. `u` is clamped to [0, 1].
    double inverse(double u) const {
        u = std::clamp(u, 0.0, 1.0);
        if (kind_ == Kind::Beta) return capacity_ * beta_inverse(beta_, u);
        if (point_) return knots_[1];
        if (u <= 0.0) return knots_.front();
        if (u >= 1.0) return knots_.back();
        const auto hi = static_cast<std::size_t>(std::upper_bound(probs_.begin(), probs_.end(), u) - probs_.begin());
        const std::size_t lo = hi - 1;
        const double w = (u - probs_[lo]) / (probs_[hi] - probs_[lo]);
        return knots_[lo] + w * (knots_[hi] - knots_[lo]);
    }

private:
    Kind kind_ = Kind::QuantileInterp;
    bool point_ = false;
    std::vector<double> knots_{0.0, 1.0};
    std::vector<double> probs_{0.0, 1.0};
    BetaParams beta_{};
    double capacity_ = 1.0;
};

/// How the CDF continues below the lowest and above the highest quantile.
///  - Bounds: straight to (lo, 0) and (hi, 1).
///  - Extrapolate: the outer segment's density is kept until the CDF reaches 0
///    or 1, stopping early at the bounds. With few levels and a wide support
///    this avoids spreading the outer mass thinly over the whole range.
enum class TailRule { Bounds, Extrapolate };

inline std::string_view to_string(TailRule t) { return t == TailRule::Bounds ? "bounds" : "extrapolate"; }

inline TailRule parse_tail_rule(std::string_view text) {
    if (text == "bounds") return TailRule::Bounds;
    if (text == "extrapolate") return TailRule::Extrapolate;
    throw Error(ErrorCode::ConfigError, "unknown tail rule '" + std::string(text) + "'");
}

/// Builds a piecewise-linear CDF from predicted quantiles with linear tails
/// ending inside [lo, hi]. Values are clamped into [lo, hi] first; ties are
/// spread by ε = 1e-9·(hi − lo) so the map stays strictly monotone.
inline MarginalCdf quantiles_to_cdf(std::span<const double> values, const QuantileSet& levels, double lo, double hi,
                                    TailRule tails = TailRule::Extrapolate) {
    if (values.size() != levels.size()) {
        throw Error(ErrorCode::ShapeMismatch, std::to_string(values.size()) + " quantile values for " +
                                                  std::to_string(levels.size()) + " levels");
    }
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi)) {
        throw Error(ErrorCode::OutOfSupport, "support [" + std::to_string(lo) + ", " + std::to_string(hi) + "] invalid");
    }
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k] < values[k - 1]) {
            throw Error(ErrorCode::UnsortedQuantiles, "quantile " + std::to_string(k) + " (" +
                                                          std::to_string(values[k]) + ") is below its predecessor");
        }
    }
    std::vector<double> z(values.size() + 2);
    z.front() = lo;
    z.back() = hi;
    for (std::size_t k = 0; k < values.size(); ++k) z[k + 1] = std::clamp(values[k], lo, hi);

    if (z[1] == z[values.size()]) return MarginalCdf::point_mass(z[1], lo, hi);

    const std::size_t K = values.size();
    if (tails == TailRule::Extrapolate && K >= 2) {
        const double below = (z[2] - z[1]) / (levels[1] - levels[0]) * levels[0];
        const double above = (z[K] - z[K - 1]) / (levels[K - 1] - levels[K - 2]) * (1.0 - levels[K - 1]);
        z.front() = std::max(lo, z[1] - below);
        z.back() = std::min(hi, z[K] + above);
    }

    const double eps = 1e-9 * (hi - lo);
    for (std::size_t k = 1; k < z.size(); ++k) z[k] = std::max(z[k], z[k - 1] + eps);
    // The forward pass can push the top knots past hi; pull them back.
    if (z.back() > hi) {
        z.back() = hi;
        for (std::size_t k = z.size() - 1; k-- > 0;) z[k] = std::min(z[k], z[k + 1] - eps);
    }
    std::vector<double> p(values.size() + 2);
    p.front() = 0.0;
    p.back() = 1.0;
    for (std::size_t k = 0; k < values.size(); ++k) p[k + 1] = levels[k];
    // Extrapolated tails that stop short of the bounds get flat zero-density
    // segments, so the support is still [lo, hi].
    if (z.front() > lo + eps) {
        z.insert(z.begin(), lo);
        p.insert(p.begin(), 0.0);
    }
    if (z.back() < hi - eps) {
        z.push_back(hi);
        p.push_back(1.0);
    }
    return MarginalCdf::quantile_interp(std::move(z), std::move(p));
}

/// Checked CDF evaluation: throws OutOfSupport outside [lower, upper].
inline double cdf_eval(const MarginalCdf& m, double z) {
    if (!(z >= m.lower() && z <= m.upper())) {
        throw Error(ErrorCode::OutOfSupport, std::to_string(z) + " outside [" + std::to_string(m.lower()) + ", " +
                                                 std::to_string(m.upper()) + "]");
    }
    return m.cdf(z);
}

/// Checked inverse: throws OutOfSupport unless 0 ≤ u ≤ 1.
inline double cdf_inverse(const MarginalCdf& m, double u) {
    if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorCode::OutOfSupport, "probability " + std::to_string(u) + " outside [0,1]");
    return m.inverse(u);
}

}  // namespace scengen
