#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "scengen/errors.hpp"

namespace scengen {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/// Standard normal CDF via the complementary error function; accurate in both
/// tails because erfc avoids cancellation.
inline double std_normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * kInvSqrt2);
}

inline double std_normal_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

namespace detail {

// Acklam's rational approximation, relative error ~1.15e-9 before refinement.
inline double acklam_inverse(double u) noexcept {
    constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                            1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                            6.680131188771972e+01,  -1.328068155288572e+01};
    constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                            -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                            3.754408661907416e+00};
    constexpr double kLow = 0.02425;

    if (u < kLow) {
        const double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - kLow) {
        const double q = std::sqrt(-2.0 * std::log1p(-u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = u - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Inverse standard normal CDF. Throws DomainError unless 0 < u < 1.
inline double std_normal_inv(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw Error(ErrorCode::DomainError, "std_normal_inv requires u in (0,1), got " + std::to_string(u));
    }
    double x = detail::acklam_inverse(u);
    // One Halley step against the erfc-based CDF. In the upper tail the residual
    // is formed from the survival function so 1-u does not lose digits.
    const double e = u > 0.5 ? (1.0 - u) - 0.5 * std::erfc(x * kInvSqrt2)
                             : std_normal_cdf(x) - u;
    const double step = e / std_normal_pdf(x);
    x -= step / (1.0 + 0.5 * x * step);
    return x;
}

}  // namespace scengen
