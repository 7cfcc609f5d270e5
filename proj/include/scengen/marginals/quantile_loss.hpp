#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "scengen/errors.hpp"

namespace scengen {

/// Pinball loss q·(z−ẑ)⁺ + (1−q)·(ẑ−z)⁺.
inline double quantile_loss(double z, double z_hat, double q) noexcept {
    const double diff = z - z_hat;
    return diff > 0.0 ? q * diff : (q - 1.0) * diff;
}

/// Strictly increasing quantile levels inside (0, 1).
class QuantileSet {
public:
    QuantileSet() : levels_{0.1, 0.3, 0.5, 0.7, 0.9} {}

    explicit QuantileSet(std::vector<double> levels) : levels_(std::move(levels)) {
        if (levels_.empty()) throw Error(ErrorCode::ConfigError, "quantile set is empty");
        for (std::size_t k = 0; k < levels_.size(); ++k) {
            if (!(levels_[k] > 0.0 && levels_[k] < 1.0)) {
                throw Error(ErrorCode::ConfigError, "quantile level " + std::to_string(levels_[k]) + " not in (0,1)");
            }
            if (k > 0 && !(levels_[k] > levels_[k - 1])) {
                throw Error(ErrorCode::ConfigError, "quantile levels must be strictly increasing");
            }
        }
    }

    std::size_t size() const noexcept { return levels_.size(); }
    double operator[](std::size_t k) const { return levels_[k]; }
    const std::vector<double>& levels() const noexcept { return levels_; }

    /// Column label for exports, e.g. 0.1 -> "q10", 0.05 -> "q5", 0.125 -> "q12.5".
    static std::string label(double level) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "q%g", level * 100.0);
        return buf;
    }

    friend bool operator==(const QuantileSet&, const QuantileSet&) = default;

private:
    std::vector<double> levels_;
};

}  // namespace scengen
