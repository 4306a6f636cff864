#pragma once

// Convergence diagnostics: a finite reference-set lower bound of the merit
// function u0(x) = sup_z min_i [F_i(x) - F_i(z)], the W_k estimate sequence,
// nondominated filtering and log-log rate fits.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "sapgm/problems.hpp"
#include "sapgm/types.hpp"

namespace sapgm {

struct FrontPoint {
    Vector x;
    Vector F; // exact objective values

    static FrontPoint at(const ProblemSpec& p, const Vector& x) { return {x, eval_true(p, x)}; }
};

/// max_{z in Z} min_i [F_i(x) - F_i(z)]; never exceeds the true merit value.
inline double merit_u0_approx(const Vector& F_x, const std::vector<FrontPoint>& reference) {
    if (reference.empty()) {
        throw InvalidInput("merit_u0_approx: empty reference set");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& z : reference) {
        best = std::max(best, (F_x - z.F).minCoeff());
    }
    return best;
}

inline double merit_u0_approx(const Vector& x, const std::vector<FrontPoint>& reference, const ProblemSpec& p) {
    return merit_u0_approx(eval_true(p, x), reference);
}

/// W_k(z) = min_i [F~_i(x_k, mu_k) - F_i(z)] + kappa mu_k.
inline double w_k_diagnostic(const Vector& x_k, double mu_k, const Vector& z, const ProblemSpec& p, double kappa) {
    const Vector smooth = eval_smooth(p, x_k, mu_k).values.array() + eval_g(p, x_k);
    return (smooth - eval_true(p, z)).minCoeff() + kappa * mu_k;
}

namespace detail {

inline constexpr double kDominanceSlack = 1e-9;

} // namespace detail

/// q dominates p: F(q) <= F(p) everywhere and strictly better somewhere (1e-9 slack).
inline bool dominates(const Vector& q, const Vector& p) {
    bool strictly = false;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (q[i] > p[i] + detail::kDominanceSlack) {
            return false;
        }
        if (q[i] < p[i] - detail::kDominanceSlack) {
            strictly = true;
        }
    }
    return strictly;
}

/// keep[a] is true when no other objective vector dominates values[a].
inline std::vector<bool> nondominated_mask(const std::vector<Vector>& values) {
    std::vector<bool> keep(values.size(), true);
    for (std::size_t a = 0; a < values.size(); ++a) {
        for (std::size_t b = 0; b < values.size(); ++b) {
            if (b != a && dominates(values[b], values[a])) {
                keep[a] = false;
                break;
            }
        }
    }
    return keep;
}

/// Points not dominated by any other input point, in input order.
inline std::vector<FrontPoint> nondominated_filter(const std::vector<FrontPoint>& points) {
    std::vector<Vector> values;
    values.reserve(points.size());
    for (const auto& p : points) {
        values.push_back(p.F);
    }
    const std::vector<bool> keep = nondominated_mask(values);
    std::vector<FrontPoint> out;
    for (std::size_t a = 0; a < points.size(); ++a) {
        if (keep[a]) {
            out.push_back(points[a]);
        }
    }
    return out;
}

/// Number of points whose objective vectors differ pairwise by more than 1e-9.
inline std::size_t count_distinct(const std::vector<FrontPoint>& points) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i && !seen; ++j) {
            seen = (points[i].F - points[j].F).cwiseAbs().maxCoeff() <= detail::kDominanceSlack;
        }
        count += seen ? 0 : 1;
    }
    return count;
}

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t k_lo = 0;
    std::size_t k_hi = 0;
    double residual = 0.0; // RMS of log-space residuals
    std::size_t points = 0;
};

/// Least-squares line through (ln k, ln value) for k in [k_lo, k_hi] and value > 0.
inline RateFit fit_rate(const std::vector<std::pair<std::size_t, double>>& series, std::size_t k_lo,
                        std::size_t k_hi) {
    if (!(k_lo < k_hi)) {
        throw InvalidInput("fit_rate: need k_lo < k_hi");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [k, v] : series) {
        if (k >= k_lo && k <= k_hi && k > 0 && v > 0.0) {
            xs.push_back(std::log(static_cast<double>(k)));
            ys.push_back(std::log(v));
        }
    }
    if (xs.size() < 5) {
        throw InsufficientData("fit_rate: fewer than 5 positive points in range");
    }
    const auto count = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    RateFit fit;
    fit.k_lo = k_lo;
    fit.k_hi = k_hi;
    fit.points = xs.size();
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / count);
    return fit;
}

} // namespace sapgm
