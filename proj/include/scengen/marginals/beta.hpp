#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "scengen/errors.hpp"
#include "scengen/marginals/special.hpp"

namespace scengen {

struct BetaParams {
    double alpha = 1.0;
    double beta = 1.0;
};

struct BetaFitConfig {
    int max_iters = 10000;
    double tolerance = 1e-9;  ///< on the ∞-norm of the (log α, log β) gradient
    double clamp = 1e-6;      ///< samples are clamped to [clamp, 1 − clamp]
};

struct BetaFit {
    BetaParams params;
    bool converged = false;
    int iterations = 0;
    double log_likelihood = 0.0;  ///< mean per sample
};

/// Method-of-moments estimate. Throws DegenerateSamples on zero variance or
/// when the moments admit no Beta distribution.
inline BetaParams beta_method_of_moments(std::span<const double> samples) {
    if (samples.size() < 2) throw Error(ErrorCode::DegenerateSamples, "need at least 2 samples");
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    var /= static_cast<double>(samples.size() - 1);
    if (!(var > 0.0)) throw Error(ErrorCode::DegenerateSamples, "samples have zero variance");
    const double common = mean * (1.0 - mean) / var - 1.0;
    if (!(common > 0.0)) {
        throw Error(ErrorCode::DegenerateSamples, "sample variance too large for a Beta distribution");
    }
    return {mean * common, (1.0 - mean) * common};
}

/// Beta maximum likelihood by Newton's method, started from the
/// method-of-moments estimate. The log-likelihood is concave in (α, β), so the
/// Newton direction always ascends; steps are halved until the likelihood does
/// not decrease and both parameters stay positive. Convergence is judged on the
/// gradient with respect to (log α, log β), which is scale free.
///
/// Returns the best iterate with `converged == false` when the iteration
/// budget runs out; callers that require convergence check the flag.
inline BetaFit fit_beta_mle(std::span<const double> samples, const BetaFitConfig& cfg = {}) {
    std::vector<double> clamped(samples.begin(), samples.end());
    for (double& x : clamped) {
        if (!std::isfinite(x)) throw Error(ErrorCode::DegenerateSamples, "non-finite sample");
        x = std::clamp(x, cfg.clamp, 1.0 - cfg.clamp);
    }
    const BetaParams init = beta_method_of_moments(clamped);

    const double n = static_cast<double>(clamped.size());
    double mean_log = 0.0, mean_log1m = 0.0;
    for (double x : clamped) {
        mean_log += std::log(x);
        mean_log1m += std::log1p(-x);
    }
    mean_log /= n;
    mean_log1m /= n;

    auto loglik = [&](double a, double b) { return (a - 1.0) * mean_log + (b - 1.0) * mean_log1m - log_beta(a, b); };

    double a = init.alpha, b = init.beta;
    double ll = loglik(a, b);
    BetaFit fit;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const double psi_ab = digamma(a + b);
        const double ga = mean_log - digamma(a) + psi_ab;
        const double gb = mean_log1m - digamma(b) + psi_ab;
        fit.iterations = it;
        if (std::max(std::fabs(a * ga), std::fabs(b * gb)) < cfg.tolerance) {
            fit.converged = true;
            break;
        }
        // Hessian [[t_ab − t_a, t_ab], [t_ab, t_ab − t_b]] is negative definite.
        const double t_ab = trigamma(a + b);
        const double haa = t_ab - trigamma(a), hbb = t_ab - trigamma(b), hab = t_ab;
        const double det = haa * hbb - hab * hab;
        double da = -(hbb * ga - hab * gb) / det;
        double db = -(haa * gb - hab * ga) / det;
        if (!(std::isfinite(da) && std::isfinite(db))) break;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            const double na = a + da, nb = b + db;
            if (na > 0.0 && nb > 0.0) {
                const double nll = loglik(na, nb);
                if (std::isfinite(nll) && nll >= ll) {
                    a = na;
                    b = nb;
                    ll = nll;
                    accepted = true;
                    break;
                }
            }
            da *= 0.5;
            db *= 0.5;
        }
        if (!accepted) {
            // No ascent left at double precision: accept as stationary if close.
            fit.converged = std::max(std::fabs(a * ga), std::fabs(b * gb)) < std::sqrt(cfg.tolerance);
            break;
        }
    }
    fit.params = {a, b};
    fit.log_likelihood = ll;
    return fit;
}

/// Like fit_beta_mle but throws DidNotConverge instead of returning a flag.
inline BetaParams fit_beta_mle_strict(std::span<const double> samples, const BetaFitConfig& cfg = {}) {
    const auto fit = fit_beta_mle(samples, cfg);
    if (!fit.converged) {
        throw Error(ErrorCode::DidNotConverge, "Beta MLE stopped after " + std::to_string(fit.iterations) +
                                                   " iterations at alpha=" + std::to_string(fit.params.alpha) +
                                                   ", beta=" + std::to_string(fit.params.beta));
    }
    return fit.params;
}

inline double beta_cdf(const BetaParams& p, double z) noexcept {
    return regularized_incomplete_beta(p.alpha, p.beta, z);
}

/// Inverse of beta_cdf by safeguarded Newton inside a shrinking bracket.
inline double beta_inverse(const BetaParams& p, double u) {
    if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorCode::DomainError, "beta_inverse requires u in [0,1]");
    if (u == 0.0) return 0.0;
    if (u == 1.0) return 1.0;
    const double log_norm = log_beta(p.alpha, p.beta);
    double lo = 0.0, hi = 1.0;
    double x = std::clamp(p.alpha / (p.alpha + p.beta), 1e-6, 1.0 - 1e-6);
    for (int it = 0; it < 200; ++it) {
        const double f = beta_cdf(p, x) - u;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x; else hi = x;
        const double pdf = std::exp((p.alpha - 1.0) * std::log(x) + (p.beta - 1.0) * std::log1p(-x) - log_norm);
        double next = x - f / pdf;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) < 1e-15 || hi - lo < 1e-15) return next;
        x = next;
    }
    return x;
}

}  // namespace scengen
