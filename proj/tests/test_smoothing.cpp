#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "sapgm/surrogate.hpp"

using namespace sapgm;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

} // namespace

TEST(SmoothAbs, ValuesAtReferencePoints) {
    auto s = smooth_abs(0.0, 1.0);
    EXPECT_DOUBLE_EQ(s.value, 1.0);
    EXPECT_DOUBLE_EQ(s.derivative, 0.0);

    s = smooth_abs(3.0, 1e-6);
    EXPECT_NEAR(s.value, 3.0, 1e-9);
    EXPECT_NEAR(s.derivative, 1.0, 1e-9);

    s = smooth_abs(1.0, 1.0);
    EXPECT_NEAR(s.value, 1.41421356, 1e-8);
    EXPECT_NEAR(s.derivative, 0.70710678, 1e-8);
}

TEST(SmoothAbs, RejectsNonPositiveMu) {
    EXPECT_THROW(smooth_abs(1.0, 0.0), InvalidParameter);
    EXPECT_THROW(smooth_abs(1.0, -1.0), InvalidParameter);
    EXPECT_THROW(smooth_abs(1.0, std::nan("")), InvalidParameter);
}

TEST(SmoothPlus, ValuesAtReferencePoints) {
    auto s = smooth_plus(0.0, 1.0);
    EXPECT_DOUBLE_EQ(s.value, 1.0);
    EXPECT_DOUBLE_EQ(s.derivative, 0.5);

    s = smooth_plus(-10.0, 1e-6);
    EXPECT_NEAR(s.value, 0.0, 1e-9);
    EXPECT_NEAR(s.derivative, 0.0, 1e-9);
    EXPECT_GT(s.value, 0.0);

    s = smooth_plus(10.0, 1e-6);
    EXPECT_NEAR(s.value, 10.0, 1e-9);
    EXPECT_NEAR(s.derivative, 1.0, 1e-9);
}

TEST(SmoothPlus, NegativeBranchKeepsRelativeAccuracy) {
    // mu^2 / |x| for x << -mu, where the naive formula cancels to zero.
    const auto s = smooth_plus(-1e8, 1.0);
    EXPECT_NEAR(s.value / 1e-8, 1.0, 1e-6);
    EXPECT_THROW(smooth_plus(0.0, 0.0), InvalidParameter);
}

TEST(SmoothMax2, ValuesAtReferencePoints) {
    auto s = smooth_max2(0.0, 0.0, 1.0);
    EXPECT_DOUBLE_EQ(s.value, 1.0);
    EXPECT_DOUBLE_EQ(s.grad_a, 0.5);
    EXPECT_DOUBLE_EQ(s.grad_b, 0.5);

    s = smooth_max2(5.0, 0.0, 1e-6);
    EXPECT_NEAR(s.value, 5.0, 1e-9);
    EXPECT_NEAR(s.grad_a, 1.0, 1e-9);
    EXPECT_NEAR(s.grad_b, 0.0, 1e-9);

    s = smooth_max2(2.0, 2.0 + 1e-12, 0.5);
    EXPECT_NEAR(s.value, 2.5, 1e-9);
    EXPECT_NEAR(s.grad_a, 0.5, 1e-9);
    EXPECT_NEAR(s.grad_b, 0.5, 1e-9);

    EXPECT_THROW(smooth_max2(0.0, 0.0, 0.0), InvalidParameter);
}

TEST(SmoothMax2, GradientsFormConvexWeights) {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-50, 50);
        const double b = rng.uniform(-50, 50);
        const double mu = rng.uniform(1e-6, 1.0);
        const auto s = smooth_max2(a, b, mu);
        EXPECT_GE(s.grad_a, 0.0);
        EXPECT_LE(s.grad_a, 1.0);
        EXPECT_NEAR(s.grad_a + s.grad_b, 1.0, 1e-12);
        EXPECT_GE(s.value, std::max(a, b));
    }
}

TEST(SmoothMaxList, ValuesAtReferencePoints) {
    std::vector<double> zeros{0.0, 0.0, 0.0};
    auto s = smooth_max_list(zeros, 1.0);
    EXPECT_NEAR(s.value, std::log(3.0), 1e-12);
    for (double w : s.weights) EXPECT_NEAR(w, 1.0 / 3.0, 1e-12);

    std::vector<double> big{100.0, 0.0};
    s = smooth_max_list(big, 1.0);
    EXPECT_NEAR(s.value, 100.0, 1e-12);
    EXPECT_NEAR(s.weights[0], 1.0, 1e-12);
    EXPECT_NEAR(s.weights[1], 0.0, 1e-12);
    EXPECT_TRUE(std::isfinite(s.value));

    std::vector<double> pair{1.0, 2.0};
    s = smooth_max_list(pair, 0.5);
    EXPECT_GE(s.value, 2.0);
    EXPECT_LE(s.value, 2.0 + 0.5 * std::log(2.0));
}

TEST(SmoothMaxList, OverflowSafeAndWeightsOnSimplex) {
    std::vector<double> huge{1e6, 1e6 - 1, -1e6};
    const auto s = smooth_max_list(huge, 1e-3);
    EXPECT_NEAR(s.value, 1e6, 1e-9);

    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> v(4);
        for (double& x : v) x = rng.uniform(-30, 30);
        const auto r = smooth_max_list(v, rng.uniform(1e-4, 1.0));
        double sum = 0.0;
        for (double w : r.weights) {
            EXPECT_GE(w, 0.0);
            sum += w;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(SmoothMaxList, Errors) {
    std::vector<double> empty;
    EXPECT_THROW(smooth_max_list(empty, 1.0), InvalidInput);
    std::vector<double> one{1.0};
    EXPECT_THROW(smooth_max_list(one, -0.1), InvalidParameter);
    EXPECT_DOUBLE_EQ(max_list_constants(3).kappa, std::log(3.0));
}

// Scalar atom properties over many sampled (x, mu): kappa bound, approach
// monotonicity in mu, and the closed-form derivative against differences.
TEST(AtomProperties, KappaBoundAndMuApproach) {
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const double x = rng.uniform(-5, 5);
        const double y = rng.uniform(-5, 5);
        const double mu1 = rng.uniform(1e-4, 1.0);
        const double mu2 = mu1 * rng.uniform();
        EXPECT_LE(std::abs(smooth_abs(x, mu1).value - std::abs(x)), mu1 + 1e-12);
        EXPECT_LE(std::abs(smooth_plus(x, mu1).value - std::max(x, 0.0)), mu1 + 1e-12);
        EXPECT_LE(std::abs(smooth_max2(x, y, mu1).value - std::max(x, y)), mu1 + 1e-12);
        EXPECT_LE(std::abs(smooth_abs(x, mu1).value - smooth_abs(x, mu2).value), (mu1 - mu2) + 1e-9);
        EXPECT_LE(std::abs(smooth_plus(x, mu1).value - smooth_plus(x, mu2).value), (mu1 - mu2) + 1e-9);
        EXPECT_LE(std::abs(smooth_max2(x, y, mu1).value - smooth_max2(x, y, mu2).value), (mu1 - mu2) + 1e-9);
    }
}

TEST(AtomProperties, EmpiricalLipschitzWithinFactor) {
    Rng rng(8);
    for (int i = 0; i < 10000; ++i) {
        const double mu = rng.uniform(1e-3, 1.0);
        const double a = rng.uniform(-3, 3);
        const double b = a + rng.uniform(-3 * mu, 3 * mu);
        if (a == b) continue;
        const double d = std::abs(a - b);
        EXPECT_LE(std::abs(smooth_abs(a, mu).derivative - smooth_abs(b, mu).derivative) / d,
                  kAbsConstants.lip_factor / mu * (1 + 1e-6));
        EXPECT_LE(std::abs(smooth_plus(a, mu).derivative - smooth_plus(b, mu).derivative) / d,
                  kPlusConstants.lip_factor / mu * (1 + 1e-6));
    }
}

TEST(Expression, UnsupportedAtomNamesTheAtom) {
    const auto x = Expr::coordinate(0, 1);
    try {
        Expr::make("huber", {x});
        FAIL() << "expected UnsupportedAtom";
    } catch (const UnsupportedAtom& e) {
        EXPECT_EQ(e.atom(), "huber");
        EXPECT_NE(std::string(e.what()).find("huber"), std::string::npos);
    }
    EXPECT_NO_THROW(Expr::make("abs", {x}));
    EXPECT_NO_THROW(Expr::make("max2", {x, x}));
}

TEST(Expression, DimensionMismatchRejected) {
    EXPECT_THROW(Expr::coordinate(0, 1) + Expr::coordinate(0, 2), InvalidInput);
    EXPECT_THROW(Expr::coordinate(2, 2), InvalidInput);
    EXPECT_THROW(Expr::coordinate(0, 2).true_value(vec({1.0})), InvalidInput);
}

TEST(ComposeSurrogate, KappaScalesWithCoefficient) {
    const Box box{vec({-2.0}), vec({2.0})};
    const auto s = compose_surrogate(0.5 * Expr::abs(Expr::coordinate(0, 1)), box);
    EXPECT_DOUBLE_EQ(s.constants().kappa, 0.5);
    const auto t = compose_surrogate(-3.0 * Expr::plus(Expr::coordinate(0, 1)) + 1.0, box);
    EXPECT_DOUBLE_EQ(t.constants().kappa, 3.0);
}

TEST(ComposeSurrogate, CircleKinkWithinKappa) {
    const auto x1 = Expr::coordinate(0, 2);
    const auto x2 = Expr::coordinate(1, 2);
    const Box box{vec({-2.0, -2.0}), vec({2.0, 2.0})};
    const auto s = compose_surrogate(Expr::abs(Expr::square(x1) + Expr::square(x2) - 1.0), box);
    EXPECT_DOUBLE_EQ(s.constants().kappa, 1.0);
    const Vector x = vec({1.0, 0.0});
    EXPECT_DOUBLE_EQ(s.true_value(x), 0.0);
    EXPECT_LE(std::abs(s.value(x, 0.1)), 0.1);
}

TEST(ComposeSurrogate, Cb3FirstObjectiveApproachesMax) {
    const auto x1 = Expr::coordinate(0, 2);
    const auto x2 = Expr::coordinate(1, 2);
    const Expr cb3 = Expr::max_list({Expr::quartic(x1) + Expr::square(x2),
                                     Expr::square(x1 - 2.0) + Expr::square(x2 - 2.0),
                                     2.0 * Expr::exp(x2 - x1)});
    const Box box{vec({1.5, 1.5}), vec({2.0, 2.0})};
    const auto s = compose_surrogate(cb3, box);
    const Vector x = vec({2.0, 2.0});
    // hand evaluation: max{16 + 4, 0, 2 e^0} = 20
    EXPECT_DOUBLE_EQ(s.true_value(x), 20.0);
    EXPECT_NEAR(s.value(x, 1e-9), 20.0, 1e-8);
    EXPECT_DOUBLE_EQ(s.constants().kappa, std::log(3.0));
}

TEST(ComposeSurrogate, GradientMatchesDifferencesOnNestedTree) {
    const auto x1 = Expr::coordinate(0, 2);
    const auto x2 = Expr::coordinate(1, 2);
    const Expr e = Expr::max2(Expr::abs(x1 - x2) + Expr::exp(0.3 * x1), 2.0 * Expr::plus(Expr::square(x2) - 1.0));
    const Box box{vec({-2.0, -2.0}), vec({2.0, 2.0})};
    const auto s = compose_surrogate(e, box);
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        const Vector x = sample_in_box(box, rng);
        const auto [v, g] = s.eval(x, 0.05);
        const Vector fd = central_difference(s, x, 0.05);
        EXPECT_LE((g - fd).lpNorm<Eigen::Infinity>() / std::max(1.0, g.lpNorm<Eigen::Infinity>()), 1e-5);
    }
}

TEST(VerifySurrogate, AbsOverSymmetricBox) {
    const Box box{vec({-5.0}), vec({5.0})};
    const auto r = verify_surrogate(abs_surrogate(), box, 1000, 17);
    EXPECT_EQ(r.samples, 1000u);
    EXPECT_LE(r.kappa_violation, 1e-6);
    EXPECT_LE(r.convexity_violation, 1e-6);
    EXPECT_LE(r.gradient_error, 1e-6);
    EXPECT_LE(r.mu_monotone_violation, 1e-6);
    EXPECT_LE(r.lipschitz_ratio, 1.0 + 1e-6);
}

TEST(VerifySurrogate, SingleSampleIsFine) {
    const Box box{vec({-1.0, -1.0}), vec({1.0, 1.0})};
    const auto r = verify_surrogate(max2_surrogate(), box, 1, 4);
    EXPECT_EQ(r.samples, 1u);
    EXPECT_LE(r.kappa_violation, 1e-9);
}

TEST(VerifySurrogate, MaxListKappaIsLogCount) {
    const Box box{Vector::Constant(3, -1.0), Vector::Constant(3, 1.0)};
    const auto s = max_list_surrogate(3);
    EXPECT_DOUBLE_EQ(s.constants().kappa, std::log(3.0));
    const auto r = verify_surrogate(s, box, 1000, 9);
    EXPECT_LE(r.kappa_violation, 1e-9);
    EXPECT_LE(r.lipschitz_ratio, 1.0 + 1e-6);
}

TEST(VerifySurrogate, FlagsAnUnderstatedKappa) {
    const Box box{vec({-1.0}), vec({1.0})};
    const SmoothSurrogate wrong(Expr::abs(Expr::coordinate(0, 1)), {0.1, 1.0});
    const auto r = verify_surrogate(wrong, box, 200, 2);
    EXPECT_GT(r.kappa_violation, 0.1);
}

TEST(SmoothSurrogate, RejectsBadConstants) {
    const auto e = Expr::coordinate(0, 1);
    EXPECT_THROW(SmoothSurrogate(e, {-1.0, 1.0}), InvalidParameter);
    EXPECT_THROW(SmoothSurrogate(e, {0.0, 0.0}), InvalidParameter);
}
