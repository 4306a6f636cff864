#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "sapgm/expression.hpp"
#include "sapgm/rng.hpp"
#include "sapgm/smoothing.hpp"
#include "sapgm/types.hpp"

namespace sapgm {

/// A smoothing f~(x, mu) of a nonsmooth convex f together with its constants.
/// Immutable; evaluation touches no shared state.
class SmoothSurrogate {
public:
    SmoothSurrogate(Expr expr, SmoothingConstants constants) : expr_(std::move(expr)), constants_(constants) {
        if (!(constants_.kappa >= 0.0) || !(constants_.lip_factor > 0.0)) {
            throw InvalidParameter("SmoothSurrogate: need kappa >= 0 and lip_factor > 0");
        }
    }

    std::size_t dim() const { return expr_.dim(); }
    const SmoothingConstants& constants() const { return constants_; }
    const Expr& expression() const { return expr_; }

    double value(const Vector& x, double mu) const { return expr_.value(x, mu); }

    /// Value and gradient at (x, mu).
    std::pair<double, Vector> eval(const Vector& x, double mu) const {
        Vector grad;
        const double v = expr_.value(x, mu, &grad);
        return {v, std::move(grad)};
    }

    double true_value(const Vector& x) const { return expr_.true_value(x); }

private:
    Expr expr_;
    SmoothingConstants constants_;
};

/// Composes smoothing constants for an expression tree. kappa is global; the
/// lip_factor bound holds on `domain` for mu in (0, 1].
inline SmoothSurrogate compose_surrogate(const Expr& expr, const Box& domain) {
    require_dim(domain.lower, expr.dim(), "compose_surrogate");
    require_dim(domain.upper, expr.dim(), "compose_surrogate");
    const NodeBounds b = expr.bounds(domain);
    constexpr double kMinLip = 1e-12;
    return SmoothSurrogate(expr, {b.kappa, std::max(b.hess_smooth + b.hess_scaled, kMinLip)});
}

/// The bare atoms as surrogates carrying their own constants.
inline SmoothSurrogate abs_surrogate() { return SmoothSurrogate(Expr::abs(Expr::coordinate(0, 1)), kAbsConstants); }

inline SmoothSurrogate plus_surrogate() {
    return SmoothSurrogate(Expr::plus(Expr::coordinate(0, 1)), kPlusConstants);
}

inline SmoothSurrogate max2_surrogate() {
    return SmoothSurrogate(Expr::max2(Expr::coordinate(0, 2), Expr::coordinate(1, 2)), kMax2Constants);
}

inline SmoothSurrogate max_list_surrogate(std::size_t count) {
    std::vector<Expr> terms;
    for (std::size_t j = 0; j < count; ++j) {
        terms.push_back(Expr::coordinate(j, count));
    }
    return SmoothSurrogate(Expr::max_list(std::move(terms)), max_list_constants(count));
}

struct SurrogateReport {
    std::size_t samples = 0;
    double kappa_violation = 0.0;        // max(|f~ - f| - kappa mu)
    double mu_monotone_violation = 0.0;  // max(|f~(mu2) - f~(mu1)| - kappa |mu1 - mu2|)
    double convexity_violation = 0.0;    // max(f~(mid) - chord)
    double gradient_error = 0.0;         // max relative central-difference error
    double lipschitz_ratio = 0.0;        // max empirical Lipschitz / (lip_factor / mu)
};

struct VerifyOptions {
    std::vector<double> mus{1.0, 0.1, 0.01};
    std::size_t lipschitz_pairs = 0; // 0 means one pair per sample
};

inline Vector sample_in_box(const Box& box, Rng& rng) {
    Vector x(box.lower.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        x[j] = rng.uniform(box.lower[j], box.upper[j]);
    }
    return x;
}

/// Central-difference gradient with step 1e-6 * max(1, |x_j|).
inline Vector central_difference(const SmoothSurrogate& s, const Vector& x, double mu) {
    Vector fd(x.size());
    Vector probe = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        probe[j] = x[j] + h;
        const double up = s.value(probe, mu);
        probe[j] = x[j] - h;
        const double down = s.value(probe, mu);
        probe[j] = x[j];
        fd[j] = (up - down) / (2.0 * h);
    }
    return fd;
}

/// Samples the smoothing-function properties of `s` over `box`. Report only.
inline SurrogateReport verify_surrogate(const SmoothSurrogate& s, const Box& box, std::size_t n_samples,
                                        std::uint64_t seed, const VerifyOptions& opts = {}) {
    Rng rng(seed);
    SurrogateReport report;
    report.samples = n_samples;
    const double kappa = s.constants().kappa;
    const double lip = s.constants().lip_factor;
    const std::size_t pairs = opts.lipschitz_pairs == 0 ? n_samples : opts.lipschitz_pairs;
    auto raise = [](double& slot, double v) { slot = std::max(slot, v); };

    for (std::size_t i = 0; i < n_samples; ++i) {
        const Vector a = sample_in_box(box, rng);
        const Vector b = sample_in_box(box, rng);
        const double alpha = rng.uniform();
        const Vector mid = alpha * a + (1.0 - alpha) * b;
        for (std::size_t q = 0; q < opts.mus.size(); ++q) {
            const double mu = opts.mus[q];
            const auto [fa, ga] = s.eval(a, mu);
            raise(report.kappa_violation, std::abs(fa - s.true_value(a)) - kappa * mu);

            const double chord = alpha * fa + (1.0 - alpha) * s.value(b, mu);
            raise(report.convexity_violation, s.value(mid, mu) - chord);

            const Vector fd = central_difference(s, a, mu);
            const double scale = std::max(1.0, ga.lpNorm<Eigen::Infinity>());
            raise(report.gradient_error, (ga - fd).lpNorm<Eigen::Infinity>() / scale);

            if (q + 1 < opts.mus.size()) {
                const double mu2 = opts.mus[q + 1];
                raise(report.mu_monotone_violation, std::abs(s.value(a, mu2) - fa) - kappa * std::abs(mu - mu2));
            }
        }
    }

    // Half the pairs are local (radius ~ mu) to probe the curvature peak.
    for (std::size_t i = 0; i < pairs; ++i) {
        const double mu = opts.mus[i % opts.mus.size()];
        const Vector a = sample_in_box(box, rng);
        Vector b;
        if (i % 2 == 0) {
            b = sample_in_box(box, rng);
        } else {
            b = a;
            for (Eigen::Index j = 0; j < b.size(); ++j) {
                b[j] += rng.uniform(-mu, mu);
            }
        }
        const double dist = (a - b).norm();
        if (dist == 0.0) {
            continue;
        }
        const Vector ga = s.eval(a, mu).second;
        const Vector gb = s.eval(b, mu).second;
        raise(report.lipschitz_ratio, (ga - gb).norm() / dist / (lip / mu));
    }
    return report;
}

} // namespace sapgm
