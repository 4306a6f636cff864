#pragma once

// Smoothing accelerated proximal gradient method for
//   min F(x) = (f_1(x) + g(x), ..., f_m(x) + g(x)).
//
// Iteration k draws mu_{k+1} = mu0 / (k+1)^sigma, estimates a Lipschitz
// constant L by backtracking with prox weight ell = L / mu_{k+1}, takes the
// min-max proximal step from the extrapolated point y_k, and updates
// y_{k+1} = x_{k+1} + theta_{k+1} (x_{k+1} - x_k) with
//   t_{k+1} = (1 + sqrt(1 + 4 (mu_k L_{k+1}) / (mu_{k+1} L_k) t_k^2)) / 2,
//   theta_{k+1} = (t_k - 1) / t_{k+1}.
// Stops once ||x_k - x_{k+1}|| < eps and mu_{k+1} < eps.

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sapgm/problems.hpp"
#include "sapgm/subproblem.hpp"
#include "sapgm/types.hpp"

namespace sapgm {

enum class BacktrackRule {
    DescentLemma, // inflate while max_i[f~_i(x^) - f~_i(y) - <grad_i, x^ - y>] > (ell/2)||x^ - y||^2
    Literal,      // inflate while 2 min_i[...] > (ell/2)||x^ - y||^2
};

struct SolverConfig {
    double mu0 = 1.0;
    double L0 = 1.0;
    double eta = 2.0;
    double sigma = 1.9;
    double eps = 1e-3;
    std::size_t max_iter = 1000;
    double inner_tol = 1e-10;
    std::size_t max_inner = 500;
    bool warm_start_L = false;
    bool record_trace = false;
    bool disable_stopping = false;
    BacktrackRule rule = BacktrackRule::DescentLemma;
    std::size_t max_inflations = 60;
    // boundedness diagnostic: max_i F~_i(x_k, mu_k) <= factor * |max_i F~_i(x_0, mu_0)| + offset
    double bound_factor = 10.0;
    double bound_offset = 10.0;

    void validate() const {
        auto fail = [](const std::string& what) { throw InvalidParameter("SolverConfig: " + what); };
        if (!(mu0 > 0.0 && mu0 <= 1.0)) fail("mu0 must lie in (0, 1]");
        if (!(L0 >= 1.0)) fail("L0 must be at least 1");
        if (!(eta > 1.0)) fail("eta must exceed 1");
        if (!(sigma > 0.0 && sigma < 2.0)) fail("sigma must lie in (0, 2)");
        if (!(eps > 0.0)) fail("eps must be positive");
        if (!(inner_tol > 0.0)) fail("inner_tol must be positive");
        if (max_iter == 0) fail("max_iter must be positive");
    }
};

struct IterateState {
    std::size_t k = 0;
    Vector x_prev;
    Vector x;
    Vector y;
    double t = 1.0;
    double theta = 0.0;
    double mu = 1.0; // mu_k
    double L = 1.0;  // L_k, the estimate accepted in the previous iteration
    std::size_t fevals = 0;
    std::size_t backtracks = 0;
};

struct TraceRecord {
    std::size_t k;         // iteration index; the record describes x_{k+1}
    Vector x;              // x_{k+1}
    double mu;             // mu_{k+1}
    double L;              // L_{k+1}
    double t;              // t_{k+1}
    double theta;          // theta_{k+1}
    double ratio;          // L_k mu_{k+1} / (L_{k+1} mu_k)
    std::size_t trials;    // backtracking trials in this iteration
    double step_norm;      // ||x_{k+1} - x_k||
    double max_F_smooth;   // max_i F~_i(x_{k+1}, mu_{k+1})
};

enum class RunStatus { Converged, MaxIter };

inline const char* status_name(RunStatus s) { return s == RunStatus::Converged ? "Converged" : "MaxIter"; }

struct RunResult {
    Vector final_x;
    Vector final_F;
    std::size_t iterations = 0;
    std::size_t fevals = 0;
    std::size_t backtracks = 0;
    std::chrono::duration<double> wall_time{0.0};
    RunStatus status = RunStatus::MaxIter;
    std::size_t boundedness_warnings = 0;
    std::vector<TraceRecord> trace;
};

/// mu_{k+1} = mu0 / (k+1)^sigma.
inline double mu_schedule(std::size_t k, double mu0, double sigma) {
    return mu0 / std::pow(static_cast<double>(k + 1), sigma);
}

struct Momentum {
    double t_next;
    double theta_next;
};

inline Momentum momentum_update(double t_k, double mu_k, double mu_next, double L_k, double L_next) {
    const double ratio = (mu_k * L_next) / (mu_next * L_k);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * ratio * t_k * t_k));
    return {t_next, (t_k - 1.0) / t_next};
}

/// max_i [f~_i(x^) - f~_i(y) - <grad_i(y), x^ - y>], or the minimum for the literal rule.
inline double linearization_error(const Linearization& lin, const Vector& f_hat, const Vector& x_hat,
                                  BacktrackRule rule) {
    const Vector err = f_hat - lin.f_y - lin.jacobian * (x_hat - lin.y);
    return rule == BacktrackRule::DescentLemma ? err.maxCoeff() : err.minCoeff();
}

inline constexpr double kDecreaseSlack = 1e-12;

/// True when the step x^ from y would trigger another inflation.
inline bool needs_inflation(const Linearization& lin, const Vector& f_hat, const Vector& x_hat, double ell,
                            BacktrackRule rule) {
    const double err = linearization_error(lin, f_hat, x_hat, rule);
    const double quad = 0.5 * ell * (x_hat - lin.y).squaredNorm();
    // rounding floor of f~(x^) - f~(y) - <grad, d>
    const double slack = kDecreaseSlack * (1.0 + lin.f_y.cwiseAbs().maxCoeff());
    if (rule == BacktrackRule::DescentLemma) {
        return err > quad + slack;
    }
    return 2.0 * err > quad + slack;
}

struct BacktrackResult {
    Vector x_next;
    double L = 0.0;
    std::size_t trials = 0;
    Vector f_next;                // f~_i(x_next, mu)
    SubproblemSolution subproblem;
};

/// Accept/inflate loop on the Lipschitz estimate at smoothing level `mu`
/// (the caller passes mu_{k+1}).
inline BacktrackResult backtrack_step(const IterateState& state, double mu, const ProblemSpec& p,
                                      const SolverConfig& cfg, EvalCounter* counter = nullptr) {
    const Linearization lin = linearize(p, state.x, state.y, mu, counter);
    SubproblemOptions sub_opts;
    sub_opts.tol = cfg.inner_tol;
    sub_opts.max_inner = cfg.max_inner;

    double L = cfg.warm_start_L ? std::max(cfg.L0, state.L / cfg.eta) : cfg.L0;
    for (std::size_t trial = 1; trial <= cfg.max_inflations + 1; ++trial) {
        const double ell = L / mu;
        SubproblemSolution sol = solve_subproblem(lin, ell, sub_opts);
        SmoothEval at_hat = eval_smooth(p, sol.z, mu, counter);
        if (!needs_inflation(lin, at_hat.values, sol.z, ell, cfg.rule)) {
            return {sol.z, L, trial, std::move(at_hat.values), std::move(sol)};
        }
        L *= cfg.eta;
    }
    throw DivergingLipschitz("backtracking exceeded " + std::to_string(cfg.max_inflations) +
                             " inflations on problem " + p.name());
}

namespace detail {

inline RunResult run_sapgm(const ProblemSpec& p, const Vector& x0, const SolverConfig& cfg, bool accelerate) {
    cfg.validate();
    require_dim(x0, p.n(), "solve");
    const auto started = std::chrono::steady_clock::now();

    EvalCounter counter;
    IterateState state;
    state.x_prev = x0;
    state.x = x0;
    state.y = x0;
    state.mu = cfg.mu0;
    state.L = cfg.L0;

    const SmoothEval start = eval_smooth(p, x0, cfg.mu0);
    const double start_level = start.values.maxCoeff() + eval_g(p.g_kind(), x0);
    const double level_cap = cfg.bound_factor * std::abs(start_level) + cfg.bound_offset;

    RunResult result;
    result.status = RunStatus::MaxIter;
    for (std::size_t k = 0; k < cfg.max_iter; ++k) {
        state.k = k;
        const double mu_next = mu_schedule(k, cfg.mu0, cfg.sigma);
        BacktrackResult step = backtrack_step(state, mu_next, p, cfg, &counter);
        state.backtracks += step.trials - 1;

        const double step_norm = (state.x - step.x_next).norm();
        const Momentum mom = momentum_update(state.t, state.mu, mu_next, state.L, step.L);
        const double theta = accelerate ? mom.theta_next : 0.0;
        const double level = step.f_next.maxCoeff() + eval_g(p.g_kind(), step.x_next);
        if (level > level_cap) {
            ++result.boundedness_warnings;
        }
        if (cfg.record_trace) {
            const double ratio = (state.L * mu_next) / (step.L * state.mu);
            result.trace.push_back(
                {k, step.x_next, mu_next, step.L, mom.t_next, theta, ratio, step.trials, step_norm, level});
        }
        result.iterations = k + 1;

        const bool stop = !cfg.disable_stopping && step_norm < cfg.eps && mu_next < cfg.eps;
        state.x_prev = state.x;
        state.x = step.x_next;
        if (stop) {
            result.status = RunStatus::Converged;
            break;
        }
        state.y = state.x + theta * (state.x - state.x_prev);
        state.t = mom.t_next;
        state.theta = theta;
        state.mu = mu_next;
        state.L = step.L;
    }

    result.wall_time = std::chrono::steady_clock::now() - started;
    result.final_x = state.x;
    result.final_F = eval_true(p, state.x);
    result.fevals = counter.count;
    result.backtracks = state.backtracks;
    return result;
}

} // namespace detail

/// Accelerated run.
inline RunResult solve(const ProblemSpec& p, const Vector& x0, const SolverConfig& cfg) {
    return detail::run_sapgm(p, x0, cfg, true);
}

/// Same loop with theta forced to zero (y_{k+1} = x_{k+1}).
inline RunResult solve_baseline(const ProblemSpec& p, const Vector& x0, const SolverConfig& cfg) {
    return detail::run_sapgm(p, x0, cfg, false);
}

} // namespace sapgm
