#pragma once

// Scalar smoothing atoms. Each atom approximates a nonsmooth convex function
// by a C^1 convex function of (x, mu) whose error is at most kappa * mu and
// whose derivative is Lipschitz with constant lip_factor / mu.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sapgm/errors.hpp"

namespace sapgm {

struct SmoothingConstants {
    double kappa = 0.0;      // |f~(x, mu) - f(x)| <= kappa * mu
    double lip_factor = 1.0; // grad f~(., mu) is Lipschitz with lip_factor / mu
};

struct ScalarSmooth {
    double value;
    double derivative;
};

struct Max2Smooth {
    double value;
    double grad_a;
    double grad_b;
};

struct MaxListSmooth {
    double value;
    std::vector<double> weights;
};

inline constexpr SmoothingConstants kAbsConstants{1.0, 1.0};
inline constexpr SmoothingConstants kPlusConstants{1.0, 0.5};
inline constexpr SmoothingConstants kMax2Constants{1.0, 0.5};

inline SmoothingConstants max_list_constants(std::size_t count) {
    return {std::log(static_cast<double>(count)), 1.0};
}

namespace detail {

inline void require_positive_mu(double mu, const char* who) {
    if (!(mu > 0.0)) {
        throw InvalidParameter(std::string(who) + ": smoothing parameter mu must be positive, got " +
                               std::to_string(mu));
    }
}

} // namespace detail

/// sqrt(x^2 + mu^2), the smoothing of |x|.
inline ScalarSmooth smooth_abs(double x, double mu) {
    detail::require_positive_mu(mu, "smooth_abs");
    const double s = std::hypot(x, mu);
    return {s, x / s};
}

/// (x + sqrt(x^2 + 4 mu^2)) / 2, the smoothing of max{x, 0}.
inline ScalarSmooth smooth_plus(double x, double mu) {
    detail::require_positive_mu(mu, "smooth_plus");
    const double s = std::hypot(x, 2.0 * mu);
    if (x >= 0.0) {
        return {0.5 * (x + s), 0.5 * (1.0 + x / s)};
    }
    // cancellation-free branch: (x + s) / 2 = 2 mu^2 / (s - x)
    const double d = s - x;
    return {2.0 * mu * mu / d, 2.0 * mu * mu / (s * d)};
}

/// (a + b + sqrt((a - b)^2 + 4 mu^2)) / 2, the smoothing of max{a, b}.
inline Max2Smooth smooth_max2(double a, double b, double mu) {
    detail::require_positive_mu(mu, "smooth_max2");
    const double diff = a - b;
    const double adiff = std::abs(diff);
    const double s = std::hypot(diff, 2.0 * mu);
    const double excess = 2.0 * mu * mu / (s + adiff); // (s - |a - b|) / 2
    const double small = 2.0 * mu * mu / (s * (s + adiff));
    const double big = 1.0 - small;
    if (diff >= 0.0) {
        return {a + excess, big, small};
    }
    return {b + excess, small, big};
}

/// mu * log(sum_j exp(v_j / mu)) with softmax weights; error bound mu * ln(count).
inline MaxListSmooth smooth_max_list(std::span<const double> values, double mu) {
    if (values.empty()) {
        throw InvalidInput("smooth_max_list: empty value list");
    }
    detail::require_positive_mu(mu, "smooth_max_list");
    const double top = *std::max_element(values.begin(), values.end());
    std::vector<double> weights(values.size());
    double total = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        weights[j] = std::exp((values[j] - top) / mu);
        total += weights[j];
    }
    for (auto& w : weights) {
        w /= total;
    }
    return {top + mu * std::log(total), std::move(weights)};
}

} // namespace sapgm
