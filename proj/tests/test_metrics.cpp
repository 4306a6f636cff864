#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sapgm/metrics.hpp"

using namespace sapgm;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

FrontPoint fp(double a, double b) { return {vec2(0, 0), vec2(a, b)}; }

} // namespace

TEST(Merit, SelfReferenceContributesZero) {
    const auto p = *find_problem("JOS1");
    const auto z = FrontPoint::at(p, vec2(0.3, 0.3));
    EXPECT_DOUBLE_EQ(merit_u0_approx(vec2(0.3, 0.3), {z}, p), 0.0);
    const auto other = FrontPoint::at(p, vec2(1.0, 1.0));
    EXPECT_GE(merit_u0_approx(vec2(0.3, 0.3), {other, z}, p), 0.0);
}

TEST(Merit, StrictDominationByMargin) {
    const std::vector<FrontPoint> Z{fp(1.0, 1.0)};
    EXPECT_GE(merit_u0_approx(vec2(1.25, 1.5), Z), 0.25);
}

TEST(Merit, Jos1HandEvaluation) {
    const auto p = *find_problem("JOS1");
    const std::vector<FrontPoint> Z{FrontPoint::at(p, vec2(0, 0)), FrontPoint::at(p, vec2(2, 2))};
    // oracle values: F(5,5) = (30, 14), F(0,0) = (0, 4), F(2,2) = (6, 2)
    const auto F = oracle::objectives("JOS1", {5, 5});
    const auto Z0 = oracle::objectives("JOS1", {0, 0});
    const auto Z1 = oracle::objectives("JOS1", {2, 2});
    const double expect = std::max(std::min(F[0] - Z0[0], F[1] - Z0[1]), std::min(F[0] - Z1[0], F[1] - Z1[1]));
    EXPECT_DOUBLE_EQ(expect, 12.0);
    EXPECT_DOUBLE_EQ(merit_u0_approx(vec2(5, 5), Z, p), expect);
}

TEST(Merit, MonotoneUnderInclusionAndEmptyRejected) {
    Rng rng(5);
    std::vector<FrontPoint> Z;
    const Vector F = vec2(rng.uniform(), rng.uniform());
    double last = -INFINITY;
    for (int i = 0; i < 200; ++i) {
        Z.push_back(fp(rng.uniform(-1, 2), rng.uniform(-1, 2)));
        const double v = merit_u0_approx(F, Z);
        EXPECT_GE(v, last);
        last = v;
    }
    EXPECT_THROW(merit_u0_approx(F, {}), InvalidInput);
}

TEST(WkDiagnostic, LimitAdditivityAndDirectFormula) {
    const auto p = *find_problem("JOS1");
    const Vector x = vec2(1, 1);
    EXPECT_NEAR(w_k_diagnostic(x, 1e-12, x, p, 0.0), 0.0, 1e-12);
    const double a = w_k_diagnostic(x, 0.5, vec2(0, 0), p, 1.0);
    const double b = w_k_diagnostic(x, 0.5, vec2(0, 0), p, 2.0);
    EXPECT_NEAR(b - a, 0.5, 1e-15);
    // JOS1 parts are exactly smooth: F~(1,1) = (1 + 1, 1 + 1), F(0,0) = (0, 4)
    const auto Fx = oracle::objectives("JOS1", {1, 1});
    const auto Fz = oracle::objectives("JOS1", {0, 0});
    const double kappa = 0.7;
    EXPECT_NEAR(w_k_diagnostic(x, 0.5, vec2(0, 0), p, kappa),
                std::min(Fx[0] - Fz[0], Fx[1] - Fz[1]) + kappa * 0.5, 1e-14);
}

TEST(NondominatedFilter, ReferenceCases) {
    auto out = nondominated_filter({fp(1, 2), fp(2, 1)});
    EXPECT_EQ(out.size(), 2u);
    out = nondominated_filter({fp(2, 2), fp(1, 1)});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].F, vec2(1, 1));
    EXPECT_TRUE(nondominated_filter({}).empty());
    // duplicates do not dominate each other
    EXPECT_EQ(nondominated_filter({fp(1, 1), fp(1, 1)}).size(), 2u);
}

TEST(NondominatedFilter, MatchesBruteForceAndIsIdempotent) {
    Rng rng(9);
    std::vector<FrontPoint> pts;
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform();
        const double b = rng.uniform();
        pts.push_back(fp(a, b));
        raw.push_back({a, b});
    }
    const auto out = nondominated_filter(pts);
    const auto keep = oracle::brute_nondominated(raw);
    ASSERT_EQ(out.size(), keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        EXPECT_EQ(out[i].F[0], raw[keep[i]][0]);
        EXPECT_EQ(out[i].F[1], raw[keep[i]][1]);
    }
    const auto again = nondominated_filter(out);
    EXPECT_EQ(again.size(), out.size());
}

TEST(CountDistinct, ToleranceMerging) {
    EXPECT_EQ(count_distinct({fp(1, 1), fp(1, 1 + 1e-12), fp(1, 2)}), 2u);
    EXPECT_EQ(count_distinct({}), 0u);
}

TEST(Dominates, Slack) {
    EXPECT_TRUE(dominates(vec2(1, 1), vec2(1, 2)));
    EXPECT_FALSE(dominates(vec2(1, 1), vec2(1, 1)));
    EXPECT_FALSE(dominates(vec2(1, 1), vec2(1 + 1e-10, 1 + 1e-10)));
    EXPECT_FALSE(dominates(vec2(0, 3), vec2(1, 2)));
}

TEST(FitRate, ExactPowerLawAndConstant) {
    std::vector<std::pair<std::size_t, double>> s;
    std::vector<std::pair<std::size_t, double>> c;
    for (std::size_t k = 1; k <= 2000; ++k) {
        s.emplace_back(k, std::pow(static_cast<double>(k), -0.5));
        c.emplace_back(k, 7.0);
    }
    const auto fit = fit_rate(s, 20, 1000);
    EXPECT_NEAR(fit.slope, -0.5, 1e-6);
    EXPECT_NEAR(fit.intercept, 0.0, 1e-9);
    EXPECT_EQ(fit.points, 981u);
    EXPECT_LT(fit.residual, 1e-9);
    EXPECT_NEAR(fit_rate(c, 20, 1000).slope, 0.0, 1e-12);
}

TEST(FitRate, LogOverKMatchesIndependentLeastSquares) {
    std::vector<std::pair<std::size_t, double>> s;
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t k = 20; k <= 2000; ++k) {
        const double v = std::log(static_cast<double>(k)) / static_cast<double>(k);
        s.emplace_back(k, v);
        lx.push_back(std::log(static_cast<double>(k)));
        ly.push_back(std::log(v));
    }
    const double expect = oracle::ols_slope(lx, ly);
    const auto fit = fit_rate(s, 20, 2000);
    EXPECT_NEAR(fit.slope, expect, 1e-9);
    // shallower than 1/k because of the slowly growing log factor
    EXPECT_GT(fit.slope, -1.0);
    EXPECT_LT(fit.slope, -0.7);
}

TEST(FitRate, WindowAndInsufficientData) {
    std::vector<std::pair<std::size_t, double>> s{{20, 1.0}, {21, 0.9}, {22, -0.1}, {23, 0.8}, {24, 0.0}};
    EXPECT_THROW(fit_rate(s, 20, 30), InsufficientData);
    EXPECT_THROW(fit_rate(s, 30, 20), InvalidInput);
    s.emplace_back(25, 0.7);
    s.emplace_back(26, 0.6);
    s.emplace_back(5000, 1e-9); // outside the window
    const auto fit = fit_rate(s, 20, 30);
    EXPECT_EQ(fit.points, 5u);
    EXPECT_EQ(fit.k_lo, 20u);
    EXPECT_EQ(fit.k_hi, 30u);
}
