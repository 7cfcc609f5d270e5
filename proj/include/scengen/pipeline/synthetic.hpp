#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "scengen/copula/normal.hpp"
#include "scengen/data_model.hpp"
#include "scengen/errors.hpp"
#include "scengen/pipeline/config.hpp"
#include "scengen/random.hpp"

namespace scengen {

struct SyntheticSpec {
    std::size_t series = 5;       ///< D
    std::size_t length = 2000;    ///< T
    double phi = 0.8;             ///< AR(1) coefficient, |φ| < 1
    double rho = 0.5;             ///< innovation correlation between locations, in [0, 1]
    double sigma = 0.1;           ///< innovation standard deviation
    double level = 1.0;
    double diurnal = 0.2;         ///< amplitude of the 24 h cycle
    HourStamp start = 0;
    std::uint64_t seed = 0;

    void validate() const {
        if (series < 1 || length < 2) throw Error(ErrorCode::ConfigError, "synthetic panel needs D >= 1 and T >= 2");
        if (!(std::fabs(phi) < 1.0)) throw Error(ErrorCode::ConfigError, "synth.phi must satisfy |phi| < 1");
        if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::ConfigError, "synth.rho must be in [0, 1]");
        if (!(sigma > 0.0)) throw Error(ErrorCode::ConfigError, "synth.sigma must be positive");
    }

    static SyntheticSpec from(const SynthSettings& s, std::uint64_t seed) {
        return {s.series, s.length, s.phi, s.rho, s.sigma, s.level, s.diurnal, s.start, seed};
    }
};

/// Everything needed to compute exact conditional distributions.
struct SyntheticTruth {
    SyntheticSpec spec;
    Eigen::MatrixXd latent;      ///< y, D×T
    Eigen::MatrixXd innovation;  ///< ε, D×T
    Eigen::MatrixXd mean;        ///< level + diurnal, D×T
    std::vector<double> phase;   ///< diurnal phase per location (radians)

    /// q-quantile of z_{i, t+h} given y up to t−1 (no covariate information):
    /// y_{t+h} | y_{t−1} ~ N(φ^{h+1} y_{t−1}, σ²(1 − φ^{2(h+1)})/(1 − φ²)).
    double conditional_quantile(std::size_t i, std::size_t origin, std::size_t h, double q) const {
        const double phi = spec.phi;
        const double k = static_cast<double>(h + 1);
        const double mu = std::pow(phi, k) * latent(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(origin - 1));
        const double var = spec.sigma * spec.sigma * (1.0 - std::pow(phi, 2.0 * k)) / (1.0 - phi * phi);
        const double y = mu + std::sqrt(var) * std_normal_inv(q);
        return std::max(0.0, mean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(origin + h)) + y);
    }
};

struct SyntheticData {
    SeriesPanel targets;
    CovariatePanel covariates;  ///< one row per location: the innovation ε_{i,t}
    SyntheticTruth truth;
};

/// z_{i,t} = max(0, level + A·sin(2πt/24 + φ_i) + y_{i,t}), with
/// y_{i,t} = φ y_{i,t−1} + ε_{i,t} and ε_{i,t} = σ(√ρ c_t + √(1−ρ) e_{i,t}).
/// The covariate of location i at hour t is ε_{i,t}: it drives the step from
/// t−1 to t exactly, so future covariates make the target nearly predictable.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const auto D = static_cast<Eigen::Index>(spec.series);
    const auto T = static_cast<Eigen::Index>(spec.length);
    RngStream rng(spec.seed, fnv1a64("synthetic"));

    SyntheticTruth truth;
    truth.spec = spec;
    truth.latent.resize(D, T);
    truth.innovation.resize(D, T);
    truth.mean.resize(D, T);
    truth.phase.resize(spec.series);
    for (auto& p : truth.phase) p = 2.0 * std::numbers::pi * rng.uniform();

    const double common = std::sqrt(spec.rho), own = std::sqrt(1.0 - spec.rho);
    const double stationary = 1.0 / std::sqrt(1.0 - spec.phi * spec.phi);
    Eigen::VectorXd eps(D);
    for (Eigen::Index t = 0; t < T; ++t) {
        const double c = rng.normal();
        for (Eigen::Index i = 0; i < D; ++i) eps(i) = spec.sigma * (common * c + own * rng.normal());
        for (Eigen::Index i = 0; i < D; ++i) {
            truth.innovation(i, t) = eps(i);
            truth.latent(i, t) = t == 0 ? stationary * eps(i) : spec.phi * truth.latent(i, t - 1) + eps(i);
            truth.mean(i, t) = spec.level + spec.diurnal * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 24.0 +
                                                                    truth.phase[static_cast<std::size_t>(i)]);
        }
    }
    Eigen::MatrixXd z = (truth.mean + truth.latent).cwiseMax(0.0);

    std::vector<HourStamp> grid(spec.length);
    for (std::size_t t = 0; t < grid.size(); ++t) grid[t] = spec.start + static_cast<HourStamp>(t);
    std::vector<std::string> ids, cov_ids;
    for (std::size_t i = 0; i < spec.series; ++i) {
        ids.push_back("loc" + std::to_string(i));
        cov_ids.push_back("driver" + std::to_string(i));
    }
    return {SeriesPanel(ids, grid, std::move(z)), CovariatePanel(cov_ids, grid, truth.innovation), std::move(truth)};
}

}  // namespace scengen
