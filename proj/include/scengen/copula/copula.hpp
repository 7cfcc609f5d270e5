#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "scengen/copula/correlation.hpp"
#include "scengen/copula/normal.hpp"
#include "scengen/copula/pit.hpp"
#include "scengen/errors.hpp"
#include "scengen/parallel.hpp"
#include "scengen/random.hpp"

namespace scengen {

/// Correlation matrix and its Cholesky factor L with L·Lᵀ = R.
class GaussianCopula {
public:
    GaussianCopula(CorrelationMatrix r, Eigen::MatrixXd lower, double jitter)
        : corr_(std::move(r)), lower_(std::move(lower)), jitter_(jitter) {}

    std::size_t dim() const noexcept { return static_cast<std::size_t>(lower_.rows()); }
    const CorrelationMatrix& correlation() const noexcept { return corr_; }
    const Eigen::MatrixXd& cholesky() const noexcept { return lower_; }
    double jitter() const noexcept { return jitter_; }

private:
    CorrelationMatrix corr_;
    Eigen::MatrixXd lower_;
    double jitter_ = 0.0;
};

inline constexpr double kFirstJitter = 1e-10;
inline constexpr double kMaxJitter = 1e-2;

/// Cholesky factorization. On failure retries with (R + δI)/(1 + δ), δ
/// doubling from 1e-10, and gives up beyond 1e-2.
inline GaussianCopula make_copula(CorrelationMatrix r) {
    if (r.values.rows() != r.values.cols() || r.values.rows() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "correlation matrix must be square and non-empty");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(r.values);
    if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd lower = llt.matrixL();
        return GaussianCopula(std::move(r), std::move(lower), 0.0);
    }
    const auto d = r.values.rows();
    for (double delta = kFirstJitter; delta <= kMaxJitter; delta *= 2.0) {
        Eigen::MatrixXd jittered = (r.values + delta * Eigen::MatrixXd::Identity(d, d)) / (1.0 + delta);
        jittered.diagonal().setOnes();
        llt.compute(jittered);
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd lower = llt.matrixL();
            r.values = std::move(jittered);
            return GaussianCopula(std::move(r), std::move(lower), delta);
        }
    }
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky failed even with jitter " + std::to_string(kMaxJitter));
}

namespace detail {

inline constexpr std::uint64_t kMvnStream = fnv1a64("copula/mvn");
inline constexpr std::uint64_t kUniformStream = fnv1a64("copula/uniform");

}  // namespace detail

/// Writes L·g into `out` where g_c = N(0,1) draw keyed by (seed, s, c).
inline void sample_mvn_one(const GaussianCopula& copula, std::uint64_t seed, std::uint64_t s, Eigen::VectorXd& g,
                           Eigen::Ref<Eigen::VectorXd> out) {
    const CounterRng rng(seed, detail::kMvnStream);
    const auto d = static_cast<Eigen::Index>(copula.dim());
    g.resize(d);
    for (Eigen::Index c = 0; c < d; ++c) g(c) = rng.normal(s, static_cast<std::uint64_t>(c));
    out.noalias() = copula.cholesky().triangularView<Eigen::Lower>() * g;
}

/// S draws from MVN(0, R) as the columns of a d×S matrix. Column s depends
/// only on (seed, first + s), so chunking and thread count never change it.
inline Eigen::MatrixXd sample_mvn(const GaussianCopula& copula, std::size_t S, std::uint64_t seed,
                                  unsigned threads = 1, std::uint64_t first = 0) {
    if (S < 1) throw Error(ErrorCode::ConfigError, "scenario count must be >= 1");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(copula.dim()), static_cast<Eigen::Index>(S));
    parallel_for(S, threads, [&](std::size_t s) {
        thread_local Eigen::VectorXd g;
        thread_local Eigen::VectorXd v;
        v.resize(out.rows());
        sample_mvn_one(copula, seed, first + s, g, v);
        out.col(static_cast<Eigen::Index>(s)) = v;
    });
    return out;
}

enum class ScenarioMode { MarginalOnly, Copula };

inline std::string_view to_string(ScenarioMode m) { return m == ScenarioMode::Copula ? "copula" : "marginal"; }

/// S joint samples of a D×H target for one origin.
struct ScenarioSet {
    std::size_t origin = 0;
    ScenarioMode mode = ScenarioMode::Copula;
    std::uint64_t seed = 0;
    std::size_t series = 0;
    std::size_t horizon = 0;
    std::vector<Eigen::MatrixXd> scenarios;  ///< each D×H

    std::size_t size() const noexcept { return scenarios.size(); }
};

/// Copula mode when `copula` is non-null: u = Φ(L·g), z = F⁻¹(u) per cell.
/// Marginal-only mode otherwise: independent uniforms per cell.
inline ScenarioSet generate_scenarios(const GaussianCopula* copula, const MarginalGrid& marginals, std::size_t S,
                                      std::uint64_t seed, std::size_t origin = 0, unsigned threads = 1) {
    if (S < 1) throw Error(ErrorCode::ConfigError, "scenario count must be >= 1");
    const std::size_t D = marginals.series(), H = marginals.horizon();
    if (marginals.dim() != D * H || marginals.dim() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "marginal grid is incomplete");
    }
    if (copula && copula->dim() != marginals.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "copula has dimension " + std::to_string(copula->dim()) +
                                                      " but the marginal grid has " + std::to_string(marginals.dim()));
    }
    ScenarioSet set;
    set.origin = origin;
    set.mode = copula ? ScenarioMode::Copula : ScenarioMode::MarginalOnly;
    set.seed = seed;
    set.series = D;
    set.horizon = H;
    set.scenarios.assign(S, Eigen::MatrixXd(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(H)));
    const CounterRng uniforms(seed, detail::kUniformStream);
    parallel_for(S, threads, [&](std::size_t s) {
        thread_local Eigen::VectorXd g;
        thread_local Eigen::VectorXd v;
        if (copula) {
            v.resize(static_cast<Eigen::Index>(marginals.dim()));
            sample_mvn_one(*copula, seed, s, g, v);
        }
        auto& z = set.scenarios[s];
        for (std::size_t i = 0; i < D; ++i) {
            for (std::size_t h = 0; h < H; ++h) {
                const std::size_t cell = i * H + h;
                const double u = copula ? std_normal_cdf(v(static_cast<Eigen::Index>(cell)))
                                        : uniforms.uniform(s, cell);
                z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)) = marginals[cell].inverse(u);
            }
        }
    });
    return set;
}

struct JointCdfEstimate {
    double probability = 0.0;
    double standard_error = 0.0;
};

/// Monte-Carlo estimate of P(Z ≤ z componentwise) under the copula model.
inline JointCdfEstimate copula_joint_cdf(const GaussianCopula& copula, const MarginalGrid& marginals,
                                         const Eigen::MatrixXd& z, std::size_t mc_samples, std::uint64_t seed,
                                         unsigned threads = 1) {
    if (mc_samples < 1000) throw Error(ErrorCode::ConfigError, "copula_joint_cdf needs at least 1000 samples");
    if (copula.dim() != marginals.dim() || static_cast<std::size_t>(z.rows()) != marginals.series() ||
        static_cast<std::size_t>(z.cols()) != marginals.horizon()) {
        throw Error(ErrorCode::DimensionMismatch, "point, marginals and copula dimensions disagree");
    }
    const std::size_t d = marginals.dim(), H = marginals.horizon();
    Eigen::VectorXd limit(static_cast<Eigen::Index>(d));
    for (std::size_t c = 0; c < d; ++c) {
        const double u = marginals[c].cdf(z(static_cast<Eigen::Index>(c / H), static_cast<Eigen::Index>(c % H)));
        limit(static_cast<Eigen::Index>(c)) = u >= 1.0   ? std::numeric_limits<double>::infinity()
                                              : u <= 0.0 ? -std::numeric_limits<double>::infinity()
                                                         : std_normal_inv(u);
    }
    std::vector<unsigned char> hit(mc_samples, 0);
    parallel_for(mc_samples, threads, [&](std::size_t s) {
        thread_local Eigen::VectorXd g;
        thread_local Eigen::VectorXd v;
        v.resize(static_cast<Eigen::Index>(d));
        sample_mvn_one(copula, seed, s, g, v);
        hit[s] = (v.array() <= limit.array()).all() ? 1 : 0;
    });
    const double n = static_cast<double>(mc_samples);
    const double p = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / n;
    return {p, std::sqrt(p * (1.0 - p) / n)};
}

}  // namespace scengen
