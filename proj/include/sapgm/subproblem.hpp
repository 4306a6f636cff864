#pragma once

// The strongly convex min-max subproblem
//
//   min_z  max_i [ <grad f~_i(y), z - y> + g(z) + f~_i(y) - F~_i(x) ] + (ell/2) ||z - y||^2
//
// solved through its concave dual over the unit simplex. For fixed weights
// lambda the inner minimization is a single prox step of the shared g, so
// each dual evaluation is exact and only the m-dimensional ascent iterates.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "sapgm/problems.hpp"
#include "sapgm/types.hpp"

namespace sapgm {

/// First-order model data of all objectives at (x, y, mu).
struct Linearization {
    Vector y;
    Matrix jacobian; // m x n, row i = grad f~_i(y, mu)
    Vector f_y;      // f~_i(y, mu)
    Vector F_x;      // F~_i(x, mu) = f~_i(x, mu) + g(x)
    GKind g_kind = GKind::Zero;

    std::size_t m() const { return static_cast<std::size_t>(jacobian.rows()); }
    std::size_t n() const { return static_cast<std::size_t>(jacobian.cols()); }
    Vector offsets() const { return f_y - F_x; }
};

struct SubproblemInput {
    const ProblemSpec* problem = nullptr;
    Vector x;
    Vector y;
    double mu = 1.0;
    double ell = 1.0;
};

/// Evaluates the model at (x, y, mu); reuses one evaluation when x == y.
inline Linearization linearize(const ProblemSpec& p, const Vector& x, const Vector& y, double mu,
                               EvalCounter* counter = nullptr) {
    require_dim(x, p.n(), "linearize");
    require_dim(y, p.n(), "linearize");
    SmoothEval at_y = eval_smooth(p, y, mu, counter);
    Vector f_x = x == y ? at_y.values : eval_smooth(p, x, mu, counter).values;
    Linearization lin;
    lin.y = y;
    lin.jacobian = std::move(at_y.jacobian);
    lin.f_y = std::move(at_y.values);
    lin.F_x = f_x.array() + eval_g(p.g_kind(), x);
    lin.g_kind = p.g_kind();
    return lin;
}

inline Linearization linearize(const SubproblemInput& in, EvalCounter* counter = nullptr) {
    if (in.problem == nullptr) {
        throw InvalidInput("SubproblemInput: missing problem");
    }
    if (!(in.ell > 0.0) || !(in.mu > 0.0)) {
        throw InvalidParameter("SubproblemInput: ell and mu must be positive");
    }
    return linearize(*in.problem, in.x, in.y, in.mu, counter);
}

/// argmin_z tau * g(z) + 0.5 ||z - v||^2.
inline Vector prox_g(const Vector& v, double tau, GKind kind) {
    if (!(tau > 0.0)) {
        throw InvalidParameter("prox_g: tau must be positive");
    }
    if (kind == GKind::Zero || v.size() == 0) {
        return v;
    }
    const double thresh = tau / static_cast<double>(v.size());
    Vector out(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        const double a = std::abs(v[j]) - thresh;
        out[j] = a > 0.0 ? std::copysign(a, v[j]) : 0.0;
    }
    return out;
}

/// Euclidean projection onto { w >= 0, sum w = 1 } (sort and threshold).
inline Vector project_simplex(const Vector& w) {
    if (w.size() == 0) {
        throw InvalidInput("project_simplex: empty vector");
    }
    std::vector<double> sorted(w.data(), w.data() + w.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double shift = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cumulative += sorted[j];
        const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - candidate > 0.0) {
            shift = candidate;
        }
    }
    return (w.array() - shift).max(0.0);
}

/// Affine pieces a_i(z) = <grad_i, z - y> + g(z) + f~_i(y) - F~_i(x).
inline Vector affine_pieces(const Linearization& lin, const Vector& z) {
    return lin.jacobian * (z - lin.y) + lin.offsets() + Vector::Constant(lin.jacobian.rows(), eval_g(lin.g_kind, z));
}

/// phi_ell(z) = max_i a_i(z) + (ell/2) ||z - y||^2.
inline double primal_value(const Linearization& lin, double ell, const Vector& z) {
    return affine_pieces(lin, z).maxCoeff() + 0.5 * ell * (z - lin.y).squaredNorm();
}

struct DualPoint {
    Vector z;          // minimizer of the lambda-weighted Lagrangian
    double dual_value; // Lagrangian value at z
    Vector pieces;     // a_i(z), the dual gradient up to a constant shift
};

inline DualPoint dual_inner(const Vector& lambda, const Linearization& lin, double ell) {
    constexpr double kSimplexTol = 1e-8;
    if (static_cast<std::size_t>(lambda.size()) != lin.m() || (lambda.array() < -kSimplexTol).any() ||
        std::abs(lambda.sum() - 1.0) > kSimplexTol) {
        throw InvalidInput("dual_inner: weights are not on the simplex");
    }
    if (!(ell > 0.0)) {
        throw InvalidParameter("dual_inner: ell must be positive");
    }
    const Vector direction = lin.jacobian.transpose() * lambda;
    Vector z = prox_g(lin.y - direction / ell, 1.0 / ell, lin.g_kind);
    Vector pieces = affine_pieces(lin, z);
    const double value = lambda.dot(pieces) + 0.5 * ell * (z - lin.y).squaredNorm();
    return {std::move(z), value, std::move(pieces)};
}

inline DualPoint dual_inner(const Vector& lambda, const SubproblemInput& in) {
    return dual_inner(lambda, linearize(in), in.ell);
}

enum class SubproblemStatus { Converged, NotConverged };

struct SubproblemSolution {
    Vector z;
    Vector lambda;
    double theta = 0.0;          // phi_ell(z)
    double gap = 0.0;            // phi_ell(z) - dual value
    double kkt_residual = 0.0;   // stationarity norm
    double complementarity = 0.0; // largest weight on an inactive piece
    std::size_t inner_iterations = 0;
    SubproblemStatus status = SubproblemStatus::Converged;
};

struct SubproblemOptions {
    double tol = 1e-10;
    std::size_t max_inner = 500;
    std::optional<Vector> lambda0; // defaults to the simplex barycenter
};

struct KktReport {
    double stationarity = 0.0;
    double complementarity = 0.0;
};

/// Stationarity ||sum_i lambda_i grad_i + xi + ell (z - y)|| with xi the
/// subgradient of g at z closest to cancelling the rest, plus the largest
/// weight carried by a piece outside the active set. A piece counts as tied
/// with the top when the gap cannot separate them: z lies within
/// sqrt(2 gap / ell) of the exact minimizer, which moves piece i by at most
/// ||J_i|| times that radius.
inline KktReport kkt_check(const Vector& z, const Vector& lambda, const Linearization& lin, double ell,
                           double gap = 0.0) {
    const Vector smooth_part = lin.jacobian.transpose() * lambda + ell * (z - lin.y);
    Vector residual = smooth_part;
    if (lin.g_kind == GKind::ScaledL1) {
        const double w = 1.0 / static_cast<double>(z.size());
        for (Eigen::Index j = 0; j < z.size(); ++j) {
            const double xi = z[j] != 0.0 ? std::copysign(w, z[j]) : std::clamp(-smooth_part[j], -w, w);
            residual[j] += xi;
        }
    }
    KktReport report;
    report.stationarity = residual.norm();
    const Vector pieces = affine_pieces(lin, z);
    Eigen::Index arg_top = 0;
    const double top = pieces.maxCoeff(&arg_top);
    constexpr double kTieTol = 1e-8;
    const double radius = std::sqrt(2.0 * std::max(gap, 0.0) / ell);
    const double top_norm = lin.jacobian.row(arg_top).norm();
    for (Eigen::Index i = 0; i < pieces.size(); ++i) {
        const double band = std::max(kTieTol, (top_norm + lin.jacobian.row(i).norm()) * radius);
        if (pieces[i] < top - band) {
            report.complementarity = std::max(report.complementarity, lambda[i]);
        }
    }
    return report;
}

inline double kkt_residual(const SubproblemSolution& sol, const Linearization& lin, double ell) {
    return kkt_check(sol.z, sol.lambda, lin, ell).stationarity;
}

/// Projected gradient ascent on the dual. The dual gradient is the vector of
/// affine pieces a(z(lambda)); its Lipschitz constant is estimated locally:
/// the step is doubled before each iteration and halved until the observed
/// curvature -<a(trial) - a(lambda), d> / ||d||^2 is at most 1 / step.
/// Gradient differences stay accurate near the optimum where differences of
/// dual values drown in rounding.
inline SubproblemSolution solve_subproblem(const Linearization& lin, double ell, const SubproblemOptions& opts = {}) {
    if (!(opts.tol > 0.0)) {
        throw InvalidParameter("solve_subproblem: tol must be positive");
    }
    const auto m = static_cast<Eigen::Index>(lin.m());
    Vector lambda = opts.lambda0 ? project_simplex(*opts.lambda0) : Vector::Constant(m, 1.0 / static_cast<double>(m));

    const double jac_sq = lin.jacobian.squaredNorm();
    double step = jac_sq > 0.0 ? ell / jac_sq : 1.0 / std::max(ell, 1.0);

    DualPoint current = dual_inner(lambda, lin, ell);
    SubproblemSolution best;
    best.gap = std::numeric_limits<double>::infinity();
    std::size_t iter = 0;

    auto record = [&](const Vector& lam, const DualPoint& dp) {
        const double gap = std::max(dp.pieces.maxCoeff() - lam.dot(dp.pieces), 0.0);
        if (gap < best.gap) {
            best.z = dp.z;
            best.lambda = lam;
            best.gap = gap;
        }
        return gap;
    };

    double gap = record(lambda, current);
    while (gap > opts.tol && iter < opts.max_inner) {
        ++iter;
        step *= 2.0;
        bool moved = false;
        for (int shrink = 0; shrink < 200; ++shrink) {
            const Vector trial = project_simplex(lambda + step * current.pieces);
            const Vector delta = trial - lambda;
            const double dist_sq = delta.squaredNorm();
            if (dist_sq == 0.0) {
                break;
            }
            DualPoint next = dual_inner(trial, lin, ell);
            const double curvature = -(next.pieces - current.pieces).dot(delta) / dist_sq;
            if (curvature * step <= 1.0) {
                lambda = trial;
                current = std::move(next);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            break;
        }
        gap = record(lambda, current);
    }

    best.inner_iterations = iter;
    best.theta = primal_value(lin, ell, best.z);
    best.status = best.gap <= opts.tol ? SubproblemStatus::Converged : SubproblemStatus::NotConverged;
    const KktReport kkt = kkt_check(best.z, best.lambda, lin, ell, best.gap);
    best.kkt_residual = kkt.stationarity;
    best.complementarity = kkt.complementarity;
    return best;
}

inline SubproblemSolution solve_subproblem(const SubproblemInput& in, const SubproblemOptions& opts = {}) {
    return solve_subproblem(linearize(in), in.ell, opts);
}

} // namespace sapgm
