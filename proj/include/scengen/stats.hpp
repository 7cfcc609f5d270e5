#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace scengen {

/// One-sample Kolmogorov–Smirnov statistic sup |F_n − F|.
template <class Cdf>
double ks_statistic(std::span<const double> samples, Cdf&& cdf) {
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double f = cdf(x[k]);
        d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
    }
    return d;
}

/// Two-sample KS distance between empirical CDFs.
inline double ks_distance(std::span<const double> a, std::span<const double> b) {
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

/// Asymptotic Kolmogorov tail P(K > λ).
inline double kolmogorov_tail(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

/// Approximate p-value of a one-sample KS statistic (Stephens' correction).
inline double ks_pvalue(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

/// Two-sample p-value with effective size nm/(n+m).
inline double ks_pvalue(double d, std::size_t n, std::size_t m) {
    return ks_pvalue(d, static_cast<std::size_t>(static_cast<double>(n) * m / static_cast<double>(n + m)));
}

}  // namespace scengen
