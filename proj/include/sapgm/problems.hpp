#pragma once

// Benchmark multiobjective instances F_i(x) = f_i(x) + g(x), where each f_i is
// a (possibly nonsmooth) convex expression with a smoothing surrogate and g is
// shared by all objectives.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sapgm/expression.hpp"
#include "sapgm/rng.hpp"
#include "sapgm/surrogate.hpp"
#include "sapgm/types.hpp"

namespace sapgm {

enum class GKind { ScaledL1, Zero };

inline const char* g_kind_name(GKind g) { return g == GKind::ScaledL1 ? "ScaledL1" : "Zero"; }

/// Per-run tally of smooth-part evaluations.
struct EvalCounter {
    std::size_t count = 0;
};

/// Margin used to grow the start box into the region where surrogate
/// Lipschitz bounds are certified.
inline constexpr double kDomainMargin = 2.0;

class ProblemSpec {
public:
    ProblemSpec(std::string name, std::size_t index, std::vector<Expr> smooth_parts, GKind g_kind, Box box)
        : name_(std::move(name)), index_(index), g_kind_(g_kind), box_(std::move(box)) {
        const std::size_t n = box_.dim();
        if (smooth_parts.size() < 2) {
            throw InvalidInput(name_ + ": need at least two objectives");
        }
        require_dim(box_.upper, n, "ProblemSpec box");
        if (!(box_.lower.array() < box_.upper.array()).all()) {
            throw InvalidInput(name_ + ": lower bound must be below upper bound in every coordinate");
        }
        const Box domain = box_.expanded(kDomainMargin);
        for (const auto& part : smooth_parts) {
            if (part.dim() != n) {
                throw InvalidInput(name_ + ": objective dimension does not match the box");
            }
            parts_.push_back(compose_surrogate(part, domain));
        }
    }

    const std::string& name() const { return name_; }
    std::size_t index() const { return index_; }
    std::size_t n() const { return box_.dim(); }
    std::size_t m() const { return parts_.size(); }
    GKind g_kind() const { return g_kind_; }
    const Box& box() const { return box_; }
    const Vector& lower() const { return box_.lower; }
    const Vector& upper() const { return box_.upper; }
    const std::vector<SmoothSurrogate>& smooth_parts() const { return parts_; }

    double kappa_max() const {
        double k = 0.0;
        for (const auto& p : parts_) {
            k = std::max(k, p.constants().kappa);
        }
        return k;
    }

    double lip_factor_max() const {
        double l = 0.0;
        for (const auto& p : parts_) {
            l = std::max(l, p.constants().lip_factor);
        }
        return l;
    }

private:
    std::string name_;
    std::size_t index_;
    std::vector<SmoothSurrogate> parts_;
    GKind g_kind_;
    Box box_;
};

inline double eval_g(GKind kind, const Vector& x) {
    if (kind == GKind::Zero) {
        return 0.0;
    }
    return x.lpNorm<1>() / static_cast<double>(x.size());
}

inline double eval_g(const ProblemSpec& p, const Vector& x) {
    require_dim(x, p.n(), "eval_g");
    return eval_g(p.g_kind(), x);
}

/// Exact objective vector (F_1(x), ..., F_m(x)).
inline Vector eval_true(const ProblemSpec& p, const Vector& x) {
    require_dim(x, p.n(), "eval_true");
    const double g = eval_g(p.g_kind(), x);
    Vector out(static_cast<Eigen::Index>(p.m()));
    for (std::size_t i = 0; i < p.m(); ++i) {
        out[static_cast<Eigen::Index>(i)] = p.smooth_parts()[i].true_value(x) + g;
    }
    return out;
}

struct SmoothEval {
    Vector values; // f~_i(x, mu), g excluded
    Matrix jacobian; // row i = grad f~_i(x, mu)
};

inline SmoothEval eval_smooth(const ProblemSpec& p, const Vector& x, double mu, EvalCounter* counter = nullptr) {
    require_dim(x, p.n(), "eval_smooth");
    if (!(mu > 0.0)) {
        throw InvalidParameter("eval_smooth: mu must be positive");
    }
    const auto m = static_cast<Eigen::Index>(p.m());
    SmoothEval out{Vector(m), Matrix(m, static_cast<Eigen::Index>(p.n()))};
    for (Eigen::Index i = 0; i < m; ++i) {
        auto [v, grad] = p.smooth_parts()[static_cast<std::size_t>(i)].eval(x, mu);
        out.values[i] = v;
        out.jacobian.row(i) = grad.transpose();
    }
    if (counter) {
        ++counter->count;
    }
    return out;
}

/// Uniform draw in [lower, upper]; a function of the seed alone.
inline Vector sample_start(const ProblemSpec& p, std::uint64_t seed) {
    Rng rng(seed);
    return sample_in_box(p.box(), rng);
}

namespace problems {

namespace detail {

inline Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

inline Box box2(double l1, double l2, double u1, double u2) { return {vec2(l1, l2), vec2(u1, u2)}; }

inline Expr x1() { return Expr::coordinate(0, 2); }
inline Expr x2() { return Expr::coordinate(1, 2); }
inline Expr sq(const Expr& e) { return Expr::square(e); }

// max{x1^4 + x2^2, (2 - x1)^2 + (2 - x2)^2, 2 exp(x2 - x1)}
inline Expr cb3() {
    return Expr::max_list({Expr::quartic(x1()) + sq(x2()), sq(x1() - 2.0) + sq(x2() - 2.0),
                           2.0 * Expr::exp(x2() - x1())});
}

// x1^2 + x2^2 - 1
inline Expr circle() { return sq(x1()) + sq(x2()) - 1.0; }

} // namespace detail

inline ProblemSpec bk1() {
    using namespace detail;
    return ProblemSpec("BK1", 1, {sq(x1()) + sq(x2()), sq(x1() - 5.0) + sq(x2() - 5.0)}, GKind::ScaledL1,
                       box2(-5, -5, 10, 10));
}

inline ProblemSpec cb3_lq() {
    using namespace detail;
    const Expr lin = -x1() - x2();
    return ProblemSpec("CB3&LQ", 2, {cb3(), Expr::max2(lin, lin + circle())}, GKind::ScaledL1,
                       box2(1.5, 1.5, 2, 2));
}

inline ProblemSpec cb3_mf1() {
    using namespace detail;
    return ProblemSpec("CB3&MF1", 3, {cb3(), -x1() + 20.0 * Expr::plus(circle())}, GKind::ScaledL1,
                       box2(0, 0, 1, 1));
}

inline ProblemSpec cr_mf2() {
    using namespace detail;
    const Expr r = sq(x1()) + sq(x2() - 1.0);
    const Expr f1 = Expr::max2(r + x2() - 1.0, -r + x2() + 1.0);
    const Expr f2 = -x1() + 2.0 * circle() + 1.75 * Expr::abs(circle());
    return ProblemSpec("CR&MF2", 4, {f1, f2}, GKind::ScaledL1, box2(1.5, 1.5, 2, 2));
}

inline ProblemSpec jos1() {
    using namespace detail;
    return ProblemSpec("JOS1", 5, {0.5 * (sq(x1()) + sq(x2())), 0.5 * (sq(x1() - 2.0) + sq(x2() - 2.0))},
                       GKind::ScaledL1, box2(-5, -5, 5, 5));
}

inline ProblemSpec sp1() {
    using namespace detail;
    const Expr gap = sq(x1() - x2());
    return ProblemSpec("SP1", 6, {sq(x1() - 1.0) + gap, sq(x2() - 3.0) + gap}, GKind::ScaledL1,
                       box2(2, -2, 3, 3));
}

} // namespace problems

/// The six benchmark instances in index order.
inline std::vector<ProblemSpec> registry() {
    return {problems::bk1(), problems::cb3_lq(), problems::cb3_mf1(),
            problems::cr_mf2(), problems::jos1(), problems::sp1()};
}

/// Resolves a problem by case-insensitive name or 1-based index.
inline std::optional<ProblemSpec> find_problem(std::string_view key) {
    auto lower = [](std::string_view s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
        return out;
    };
    const std::string wanted = lower(key);
    for (auto& p : registry()) {
        if (lower(p.name()) == wanted || std::to_string(p.index()) == wanted) {
            return p;
        }
    }
    return std::nullopt;
}

} // namespace sapgm
