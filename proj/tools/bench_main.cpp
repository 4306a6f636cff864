// bench: command-line front end to the benchmark harness.
//
//   bench run    --problems all --runs 200 --seed 42 --solver both --out results/
//   bench rate   --problem JOS1 --sigmas 0.5,1.0,1.5 --out results/
//   bench verify
//
// Exit status: 0 success, 2 invalid configuration, 3 I/O failure, 1 otherwise.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sapgm/bench.hpp"
#include "sapgm/subproblem.hpp"
#include "sapgm/surrogate.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;

void add_solver_flags(CLI::App* cmd, sapgm::SolverConfig& sc) {
    cmd->add_option("--sigma", sc.sigma, "smoothing decay exponent, mu_k = mu0 / k^sigma");
    cmd->add_option("--mu0", sc.mu0, "initial smoothing parameter");
    cmd->add_option("--L0", sc.L0, "initial Lipschitz estimate");
    cmd->add_option("--eta", sc.eta, "backtracking inflation factor");
    cmd->add_option("--eps", sc.eps, "stopping tolerance");
    cmd->add_option("--max-iter", sc.max_iter, "iteration limit");
    cmd->add_flag("--warm-start-L", sc.warm_start_L, "start backtracking from the previous estimate");
}

void print_summary(const std::vector<sapgm::SummaryRow>& rows) {
    std::printf("%-10s %-9s %10s %9s %9s %10s %9s\n", "problem", "solver", "avg_time", "avg_iter", "med_iter",
                "avg_feval", "converged");
    for (const auto& s : rows) {
        std::printf("%-10s %-9s %10.4g %9.2f %9.1f %10.2f %9.3f\n", s.problem.c_str(), s.solver.c_str(),
                    s.avg_time_s, s.avg_iter, s.median_iter, s.avg_feval, s.converged_fraction);
    }
}

int run_verify(std::size_t samples, std::uint64_t seed) {
    using namespace sapgm;
    bool ok = true;
    auto line = [&](const std::string& what, const SurrogateReport& r) {
        const bool pass = r.kappa_violation <= 1e-9 && r.convexity_violation <= 1e-9 && r.gradient_error <= 1e-5 &&
                          r.mu_monotone_violation <= 1e-9 && r.lipschitz_ratio <= 1.0 + 1e-9;
        ok = ok && pass;
        std::printf("%-22s %s  kappa %.2e  convex %.2e  grad %.2e  mu-mono %.2e  lip-ratio %.3f\n", what.c_str(),
                    pass ? "ok  " : "FAIL", r.kappa_violation, r.convexity_violation, r.gradient_error,
                    r.mu_monotone_violation, r.lipschitz_ratio);
    };

    const Box unit1{Vector::Constant(1, -3.0), Vector::Constant(1, 3.0)};
    const Box unit2{Vector::Constant(2, -3.0), Vector::Constant(2, 3.0)};
    const Box unit4{Vector::Constant(4, -3.0), Vector::Constant(4, 3.0)};
    line("atom abs", verify_surrogate(abs_surrogate(), unit1, samples, seed));
    line("atom plus", verify_surrogate(plus_surrogate(), unit1, samples, seed));
    line("atom max2", verify_surrogate(max2_surrogate(), unit2, samples, seed));
    line("atom max-list(4)", verify_surrogate(max_list_surrogate(4), unit4, samples, seed));
    for (const auto& p : registry()) {
        for (std::size_t i = 0; i < p.m(); ++i) {
            line(p.name() + " f" + std::to_string(i + 1),
                 verify_surrogate(p.smooth_parts()[i], p.box(), samples, seed + i));
        }
    }

    // Subproblem certificates on random linearizations of the benchmark problems.
    Rng rng(seed);
    double worst_gap = 0.0;
    double worst_kkt = 0.0;
    std::size_t unconverged = 0;
    std::size_t count = 0;
    for (const auto& p : registry()) {
        for (std::size_t t = 0; t < 50; ++t) {
            const Vector x = sample_in_box(p.box(), rng);
            const Vector y = sample_in_box(p.box(), rng);
            const double mu = rng.uniform(1e-3, 1.0);
            const double ell = rng.uniform(0.5, 50.0) / mu;
            const auto lin = linearize(p, x, y, mu);
            const auto sol = solve_subproblem(lin, ell);
            worst_gap = std::max(worst_gap, sol.gap);
            worst_kkt = std::max(worst_kkt, sol.kkt_residual);
            unconverged += sol.status == SubproblemStatus::Converged ? 0 : 1;
            ++count;
        }
    }
    const bool sub_ok = unconverged == 0 && worst_gap <= 1e-8 && worst_kkt <= 1e-6;
    ok = ok && sub_ok;
    std::printf("%-22s %s  instances %zu  worst gap %.2e  worst kkt %.2e  unconverged %zu\n", "subproblem",
                sub_ok ? "ok  " : "FAIL", count, worst_gap, worst_kkt, unconverged);
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Smoothing accelerated proximal gradient benchmark harness"};
    app.require_subcommand(1);

    sapgm::BenchConfig cfg;
    std::string solver = "both";
    std::string out = "results";

    auto* run = app.add_subcommand("run", "multi-start benchmark over the problem registry");
    run->add_option("--problems", cfg.problems, "problem names or indices, or 'all'")->delimiter(',');
    run->add_option("--runs", cfg.runs, "random starts per problem and solver");
    run->add_option("--seed", cfg.base_seed, "seed of the first run; run i uses seed + i");
    run->add_option("--solver", solver, "sapgm, baseline or both");
    run->add_option("--out", out, "output directory");
    run->add_option("--parallel", cfg.parallel, "worker threads");
    add_solver_flags(run, cfg.solver_cfg);

    std::string rate_problem = "JOS1";
    std::vector<double> sigmas{0.5, 1.0, 1.5};
    auto* rate = app.add_subcommand("rate", "merit decay against iteration count for several sigma");
    rate->add_option("--problem", rate_problem, "problem name or index");
    rate->add_option("--sigmas", sigmas, "comma-separated decay exponents")->delimiter(',');
    rate->add_option("--runs", cfg.runs, "runs pooled into the reference front");
    rate->add_option("--seed", cfg.base_seed, "seed of the rate runs and the first reference run");
    rate->add_option("--out", out, "output directory");
    rate->add_option("--parallel", cfg.parallel, "worker threads");
    add_solver_flags(rate, cfg.solver_cfg);

    std::size_t verify_samples = 1000;
    std::uint64_t verify_seed = 1;
    auto* verify = app.add_subcommand("verify", "smoothing and subproblem property checks");
    verify->add_option("--samples", verify_samples, "samples per surrogate");
    verify->add_option("--seed", verify_seed, "sampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        cfg.out_dir = out;
        if (run->parsed()) {
            cfg.solver = sapgm::parse_solver_choice(solver);
            const auto outcome = sapgm::run_benchmark(cfg);
            print_summary(outcome.summary);
            std::printf("wrote %zu files to %s\n", outcome.files.size(), cfg.out_dir.string().c_str());
            return 0;
        }
        if (rate->parsed()) {
            const auto outcome = sapgm::run_rate_experiment(rate_problem, sigmas, cfg);
            std::printf("%s: reference front of %zu points\n", outcome.problem.c_str(), outcome.reference.size());
            for (const auto& s : outcome.series) {
                if (s.fit) {
                    std::printf("sigma %-5g slope %.4f  (%zu points)\n", s.sigma, s.fit->slope, s.fit->points);
                } else {
                    std::printf("sigma %-5g no fit: %s\n", s.sigma, s.fit_error.c_str());
                }
            }
            return 0;
        }
        return run_verify(verify_samples, verify_seed);
    } catch (const sapgm::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
