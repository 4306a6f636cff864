#pragma once

// Benchmark harness: seeded multi-start runs of both solvers over the problem
// registry, Table-style summaries, pooled fronts and rate experiments.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "sapgm/metrics.hpp"
#include "sapgm/problems.hpp"
#include "sapgm/report.hpp"
#include "sapgm/solver.hpp"

namespace sapgm {

enum class SolverChoice { Sapgm, Baseline, Both };

inline const char* solver_choice_name(SolverChoice c) {
    switch (c) {
    case SolverChoice::Sapgm: return "sapgm";
    case SolverChoice::Baseline: return "baseline";
    default: return "both";
    }
}

inline SolverChoice parse_solver_choice(const std::string& s) {
    if (s == "sapgm") return SolverChoice::Sapgm;
    if (s == "baseline") return SolverChoice::Baseline;
    if (s == "both") return SolverChoice::Both;
    throw InvalidParameter("unknown solver '" + s + "' (expected sapgm, baseline or both)");
}

struct BenchConfig {
    std::vector<std::string> problems{"all"};
    std::size_t runs = 200;
    std::uint64_t base_seed = 42;
    SolverChoice solver = SolverChoice::Both;
    SolverConfig solver_cfg;
    std::filesystem::path out_dir = "results";
    std::size_t parallel = 1;

    void validate() const {
        if (runs == 0) {
            throw InvalidParameter("BenchConfig: runs must be at least 1");
        }
        if (problems.empty()) {
            throw InvalidParameter("BenchConfig: no problems selected");
        }
        solver_cfg.validate();
    }

    /// Solver names in output order.
    std::vector<std::string> solvers() const {
        switch (solver) {
        case SolverChoice::Sapgm: return {"sapgm"};
        case SolverChoice::Baseline: return {"baseline"};
        default: return {"baseline", "sapgm"};
        }
    }
};

/// "all" expands to the registry; anything else goes through find_problem.
inline std::vector<ProblemSpec> resolve_problems(const std::vector<std::string>& keys) {
    std::vector<ProblemSpec> out;
    for (const auto& key : keys) {
        if (key == "all") {
            for (auto& p : registry()) {
                out.push_back(std::move(p));
            }
            continue;
        }
        auto p = find_problem(key);
        if (!p) {
            throw InvalidInput("unknown problem '" + key + "'");
        }
        out.push_back(std::move(*p));
    }
    return out;
}

struct RunRecord {
    std::string problem;
    std::string solver;
    std::uint64_t seed = 0;
    std::string status; // Converged, MaxIter or Diverged
    RunResult result;
};

struct SummaryRow {
    std::string problem;
    std::string solver;
    double avg_time_s = 0.0;
    double avg_iter = 0.0;
    double avg_feval = 0.0;
    double converged_fraction = 0.0;
    double median_iter = 0.0;
    std::size_t runs = 0;
};

namespace detail {

struct Job {
    const ProblemSpec* problem;
    std::string solver;
    std::uint64_t seed;
};

inline RunRecord execute_job(const Job& job, const SolverConfig& cfg) {
    const Vector x0 = sample_start(*job.problem, job.seed);
    RunRecord rec{job.problem->name(), job.solver, job.seed, {}, {}};
    try {
        rec.result = job.solver == "sapgm" ? solve(*job.problem, x0, cfg) : solve_baseline(*job.problem, x0, cfg);
        rec.status = status_name(rec.result.status);
    } catch (const DivergingLipschitz&) {
        rec.status = "Diverged";
        rec.result.final_x = x0;
        rec.result.final_F = eval_true(*job.problem, x0);
    }
    return rec;
}

inline double median(std::vector<double> v) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

} // namespace detail

/// Runs every (problem, solver, seed) combination on up to cfg.parallel
/// threads. Records come back ordered by problem (input order), solver name
/// and seed, whatever the scheduling.
inline std::vector<RunRecord> execute_runs(const std::vector<ProblemSpec>& problems, const BenchConfig& cfg) {
    cfg.validate();
    std::vector<detail::Job> jobs;
    for (const auto& p : problems) {
        for (const auto& solver : cfg.solvers()) {
            for (std::size_t i = 0; i < cfg.runs; ++i) {
                jobs.push_back({&p, solver, cfg.base_seed + i});
            }
        }
    }

    std::vector<RunRecord> records(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                records[j] = detail::execute_job(jobs[j], cfg.solver_cfg);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };

    const std::size_t threads = std::clamp<std::size_t>(cfg.parallel, 1, std::max<std::size_t>(jobs.size(), 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return records;
}

inline std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
    std::vector<SummaryRow> rows;
    std::vector<std::vector<double>> iters;
    for (const auto& r : records) {
        auto it = std::find_if(rows.begin(), rows.end(),
                               [&](const SummaryRow& s) { return s.problem == r.problem && s.solver == r.solver; });
        if (it == rows.end()) {
            rows.push_back({r.problem, r.solver});
            iters.emplace_back();
            it = std::prev(rows.end());
        }
        it->avg_time_s += r.result.wall_time.count();
        it->avg_iter += static_cast<double>(r.result.iterations);
        it->avg_feval += static_cast<double>(r.result.fevals);
        it->converged_fraction += r.status == "Converged" ? 1.0 : 0.0;
        ++it->runs;
        iters[static_cast<std::size_t>(it - rows.begin())].push_back(static_cast<double>(r.result.iterations));
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& s = rows[i];
        const auto n = static_cast<double>(s.runs);
        s.avg_time_s /= n;
        s.avg_iter /= n;
        s.avg_feval /= n;
        s.converged_fraction /= n;
        s.median_iter = detail::median(iters[i]);
    }
    return rows;
}

/// A front point with the run that produced it.
struct TaggedPoint {
    std::string solver;
    std::uint64_t seed;
    FrontPoint point;
};

/// Nondominated final points of one problem. An empty `solver` pools all solvers.
inline std::vector<TaggedPoint> final_front(const std::vector<RunRecord>& records, const std::string& problem,
                                            const std::string& solver = "") {
    std::vector<TaggedPoint> pts;
    std::vector<Vector> values;
    for (const auto& r : records) {
        if (r.problem == problem && (solver.empty() || r.solver == solver)) {
            pts.push_back({r.solver, r.seed, {r.result.final_x, r.result.final_F}});
            values.push_back(r.result.final_F);
        }
    }
    const std::vector<bool> keep = nondominated_mask(values);
    std::vector<TaggedPoint> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (keep[i]) {
            out.push_back(std::move(pts[i]));
        }
    }
    return out;
}

inline std::vector<FrontPoint> untag(const std::vector<TaggedPoint>& pts) {
    std::vector<FrontPoint> out;
    out.reserve(pts.size());
    for (const auto& t : pts) {
        out.push_back(t.point);
    }
    return out;
}

inline std::string runs_csv(const std::vector<RunRecord>& records, const std::vector<ProblemSpec>& problems) {
    std::size_t n = 0;
    std::size_t m = 0;
    for (const auto& p : problems) {
        n = std::max(n, p.n());
        m = std::max(m, p.m());
    }
    std::vector<std::string> header{"problem", "solver", "seed", "status", "iters", "fevals", "time_s"};
    for (std::size_t j = 1; j <= n; ++j) header.push_back("final_x" + std::to_string(j));
    for (std::size_t i = 1; i <= m; ++i) header.push_back("final_F" + std::to_string(i));

    std::string out = csv_row(header);
    for (const auto& r : records) {
        std::vector<std::string> row{r.problem,
                                     r.solver,
                                     std::to_string(r.seed),
                                     r.status,
                                     std::to_string(r.result.iterations),
                                     std::to_string(r.result.fevals),
                                     format_double(r.result.wall_time.count())};
        for (std::size_t j = 0; j < n; ++j) {
            row.push_back(j < static_cast<std::size_t>(r.result.final_x.size())
                              ? format_double(r.result.final_x[static_cast<Eigen::Index>(j)])
                              : "");
        }
        for (std::size_t i = 0; i < m; ++i) {
            row.push_back(i < static_cast<std::size_t>(r.result.final_F.size())
                              ? format_double(r.result.final_F[static_cast<Eigen::Index>(i)])
                              : "");
        }
        out += csv_row(row);
    }
    return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = csv_row(
        {"problem", "solver", "avg_time_s", "avg_iter", "avg_feval", "converged_fraction", "median_iter", "runs"});
    for (const auto& s : rows) {
        out += csv_row({s.problem, s.solver, format_double(s.avg_time_s), format_double(s.avg_iter),
                        format_double(s.avg_feval), format_double(s.converged_fraction),
                        format_double(s.median_iter), std::to_string(s.runs)});
    }
    return out;
}

inline std::string front_csv(const std::vector<TaggedPoint>& front) {
    if (front.empty()) {
        return csv_row({"solver", "seed"});
    }
    std::vector<std::string> header{"solver", "seed"};
    for (Eigen::Index j = 1; j <= front.front().point.x.size(); ++j) header.push_back("x" + std::to_string(j));
    for (Eigen::Index i = 1; i <= front.front().point.F.size(); ++i) header.push_back("F" + std::to_string(i));
    std::string out = csv_row(header);
    for (const auto& t : front) {
        std::vector<std::string> row{t.solver, std::to_string(t.seed)};
        for (double v : t.point.x) row.push_back(format_double(v));
        for (double v : t.point.F) row.push_back(format_double(v));
        out += csv_row(row);
    }
    return out;
}

inline nlohmann::json solver_json(const SolverConfig& c) {
    return {{"sigma", c.sigma}, {"mu0", c.mu0},         {"L0", c.L0},
            {"eta", c.eta},     {"eps", c.eps},         {"max_iter", c.max_iter},
            {"inner_tol", c.inner_tol}, {"max_inner", c.max_inner}, {"warm_start_L", c.warm_start_L},
            {"backtrack_rule", c.rule == BacktrackRule::DescentLemma ? "descent-lemma" : "literal"}};
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }
}

struct BenchOutcome {
    std::vector<RunRecord> records;
    std::vector<SummaryRow> summary;
    std::map<std::string, std::vector<TaggedPoint>> pooled_fronts; // keyed by problem name
    std::vector<std::filesystem::path> files;
};

/// Executes the benchmark and writes runs.csv, summary.csv, front_<problem>.csv,
/// front_<problem>.svg and manifest.json under cfg.out_dir.
inline BenchOutcome run_benchmark(const BenchConfig& cfg) {
    cfg.validate();
    const std::vector<ProblemSpec> problems = resolve_problems(cfg.problems);
    ensure_directory(cfg.out_dir);

    BenchOutcome out;
    out.records = execute_runs(problems, cfg);
    out.summary = summarize(out.records);

    auto emit = [&](const std::string& name, const std::string& content) {
        const auto path = cfg.out_dir / name;
        write_text_file(path, content);
        out.files.push_back(path);
    };
    emit("runs.csv", runs_csv(out.records, problems));
    emit("summary.csv", summary_csv(out.summary));

    for (const auto& p : problems) {
        auto pooled = final_front(out.records, p.name());
        emit("front_" + file_stem(p.name()) + ".csv", front_csv(pooled));
        std::map<std::string, std::vector<FrontPoint>> per_solver;
        for (const auto& solver : cfg.solvers()) {
            per_solver[solver] = untag(final_front(out.records, p.name(), solver));
        }
        const auto svg_path = cfg.out_dir / ("front_" + file_stem(p.name()) + ".svg");
        emit_svg_scatter(per_solver, p.name(), svg_path);
        out.files.push_back(svg_path);
        out.pooled_fronts[p.name()] = std::move(pooled);
    }

    nlohmann::json manifest;
    manifest["command"] = "run";
    for (const auto& p : problems) {
        manifest["problems"].push_back({{"name", p.name()}, {"index", p.index()}, {"n", p.n()}, {"m", p.m()},
                                        {"g", g_kind_name(p.g_kind())}});
    }
    manifest["runs"] = cfg.runs;
    manifest["base_seed"] = cfg.base_seed;
    manifest["solver"] = solver_choice_name(cfg.solver);
    manifest["parallel"] = cfg.parallel;
    manifest["solver_config"] = solver_json(cfg.solver_cfg);
    for (const auto& s : out.summary) {
        manifest["summary"].push_back({{"problem", s.problem},
                                       {"solver", s.solver},
                                       {"avg_iter", s.avg_iter},
                                       {"median_iter", s.median_iter},
                                       {"avg_feval", s.avg_feval},
                                       {"converged_fraction", s.converged_fraction}});
    }
    std::vector<std::string> names;
    for (const auto& f : out.files) names.push_back(f.filename().string());
    names.push_back("manifest.json");
    manifest["files"] = names;
    emit("manifest.json", manifest.dump(2) + "\n");
    return out;
}

struct RateSeries {
    double sigma = 0.0;
    std::vector<std::pair<std::size_t, double>> merit; // (k, merit of x_k)
    std::optional<RateFit> fit;
    std::string fit_error; // set when the fit was impossible
    std::size_t positive_in_window = 0;
};

struct RateOutcome {
    std::string problem;
    std::vector<FrontPoint> reference;
    std::vector<RateSeries> series;
    std::vector<std::filesystem::path> files;
};

struct RateOptions {
    std::size_t iterations = 2000;
    std::size_t k_lo = 20;
    std::size_t k_hi = 1000;
};

/// Pooled nondominated final points of converged benchmark runs (all runs if
/// none converged).
inline std::vector<FrontPoint> reference_front(const ProblemSpec& p, const BenchConfig& cfg) {
    BenchConfig ref = cfg;
    ref.solver = SolverChoice::Both;
    const auto records = execute_runs({p}, ref);
    std::vector<FrontPoint> converged;
    std::vector<FrontPoint> all;
    for (const auto& r : records) {
        FrontPoint fp{r.result.final_x, r.result.final_F};
        if (r.status == "Converged") {
            converged.push_back(fp);
        }
        all.push_back(std::move(fp));
    }
    return nondominated_filter(converged.empty() ? all : converged);
}

/// One accelerated run per sigma from the start drawn with cfg.base_seed,
/// stopping disabled, merit tracked against the reference front. Writes
/// rate_<problem>_sigma<s>.csv per sigma, rate_<problem>_slopes.csv,
/// rate_<problem>_reference.csv and rate_manifest.json.
inline RateOutcome run_rate_experiment(const std::string& problem, const std::vector<double>& sigmas,
                                       const BenchConfig& cfg, const RateOptions& opts = {},
                                       std::ostream& log = std::cerr) {
    cfg.validate();
    for (double s : sigmas) {
        SolverConfig probe = cfg.solver_cfg;
        probe.sigma = s;
        probe.validate();
    }
    auto found = find_problem(problem);
    if (!found) {
        throw InvalidInput("unknown problem '" + problem + "'");
    }
    RateOutcome out;
    out.problem = found->name();
    if (sigmas.empty()) {
        log << "warning: empty sigma list, nothing to do\n";
        return out;
    }
    const ProblemSpec& p = *found;
    ensure_directory(cfg.out_dir);

    out.reference = reference_front(p, cfg);
    const Vector x0 = sample_start(p, cfg.base_seed);
    const std::string stem = "rate_" + file_stem(p.name());

    for (double sigma : sigmas) {
        SolverConfig sc = cfg.solver_cfg;
        sc.sigma = sigma;
        sc.disable_stopping = true;
        sc.max_iter = opts.iterations;
        sc.record_trace = true;
        const RunResult run = solve(p, x0, sc);

        RateSeries s;
        s.sigma = sigma;
        for (const auto& t : run.trace) {
            const std::size_t k = t.k + 1;
            const double merit = merit_u0_approx(t.x, out.reference, p);
            s.merit.emplace_back(k, merit);
            if (k >= opts.k_lo && k <= opts.k_hi && merit > 0.0) {
                ++s.positive_in_window;
            }
        }
        try {
            s.fit = fit_rate(s.merit, opts.k_lo, opts.k_hi);
        } catch (const InsufficientData& e) {
            s.fit_error = e.what();
            log << "warning: sigma " << sigma << ": " << e.what() << '\n';
        }

        std::string csv = csv_row({"k", "merit"});
        for (const auto& [k, v] : s.merit) {
            csv += csv_row({std::to_string(k), format_double(v)});
        }
        const auto path = cfg.out_dir / (stem + "_sigma" + format_double(sigma) + ".csv");
        write_text_file(path, csv);
        out.files.push_back(path);
        out.series.push_back(std::move(s));
    }

    std::string slopes = csv_row({"sigma", "slope", "intercept", "residual", "points", "positive_in_window", "note"});
    for (const auto& s : out.series) {
        if (s.fit) {
            slopes += csv_row({format_double(s.sigma), format_double(s.fit->slope), format_double(s.fit->intercept),
                               format_double(s.fit->residual), std::to_string(s.fit->points),
                               std::to_string(s.positive_in_window), ""});
        } else {
            slopes += csv_row({format_double(s.sigma), "", "", "", "0", std::to_string(s.positive_in_window),
                               s.fit_error});
        }
    }
    const auto slopes_path = cfg.out_dir / (stem + "_slopes.csv");
    write_text_file(slopes_path, slopes);
    out.files.push_back(slopes_path);

    std::vector<TaggedPoint> tagged;
    for (const auto& fp : out.reference) {
        tagged.push_back({"pooled", 0, fp});
    }
    const auto ref_path = cfg.out_dir / (stem + "_reference.csv");
    write_text_file(ref_path, front_csv(tagged));
    out.files.push_back(ref_path);

    nlohmann::json manifest;
    manifest["command"] = "rate";
    manifest["problem"] = p.name();
    manifest["sigmas"] = sigmas;
    manifest["iterations"] = opts.iterations;
    manifest["fit_window"] = {opts.k_lo, opts.k_hi};
    manifest["reference_runs"] = cfg.runs;
    manifest["reference_points"] = out.reference.size();
    manifest["base_seed"] = cfg.base_seed;
    manifest["solver_config"] = solver_json(cfg.solver_cfg);
    std::vector<std::string> names;
    for (const auto& f : out.files) names.push_back(f.filename().string());
    manifest["files"] = names;
    const auto manifest_path = cfg.out_dir / "rate_manifest.json";
    write_text_file(manifest_path, manifest.dump(2) + "\n");
    out.files.push_back(manifest_path);
    return out;
}

} // namespace sapgm
