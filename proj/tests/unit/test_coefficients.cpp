#include <gtest/gtest.h>

#include <cmath>

#include "rswave/coefficients.hpp"
#include "rswave/error.hpp"

using namespace rswave;

TEST(Coefficients, ConstantsAndExpressions) {
    const Coefficient c = Coefficient::expression("2.5");
    EXPECT_FALSE(c.time_dependent());
    EXPECT_DOUBLE_EQ(c(0.3, 0.1), 2.5);
    const Coefficient e = Coefficient::expression("x*t");
    EXPECT_TRUE(e.time_dependent());
    EXPECT_DOUBLE_EQ(e(2.0, 0.25), 0.5);
    EXPECT_TRUE(Coefficient().is_zero());
    EXPECT_TRUE(Coefficient::constant(0.0).is_zero());
}

TEST(Coefficients, SizesForConstantPotential) {
    Grid g({0.0}, {1.0}, {20}, 1.0, 10);
    CoefficientSet c;
    c.a1 = Coefficient::constant(5.0);
    const CoefficientSizes s = coefficient_sizes(c, g);
    EXPECT_DOUBLE_EQ(s.r1, 25.0);
    EXPECT_DOUBLE_EQ(s.r2, 25.0);
}

TEST(Coefficients, SizesIncludeGradientOfA4) {
    Grid g({0.0}, {1.0}, {20}, 1.0, 10);
    CoefficientSet c;
    c.a4 = Coefficient::expression("x*(1-x)");
    c.a5 = Coefficient::constant(2.0);
    const CoefficientSizes s = coefficient_sizes(c, g);
    // |a4|_inf = 1/4 at x = 1/2, |a4'|_inf = 1 at the ends; differences are exact for quadratics.
    const double w = 0.25 + 1.0;
    EXPECT_NEAR(s.r2, 4.0 + w * w, 1e-12);
    EXPECT_DOUBLE_EQ(s.r1, 0.0);
}

TEST(Coefficients, A4MustVanishOnBoundary) {
    Grid g({0.0}, {1.0}, {10}, 1.0, 10);
    CoefficientSet c;
    c.a4 = Coefficient::expression("x");
    EXPECT_THROW(c.validate(g), ConfigError);
    c.a4 = Coefficient::expression("sin(pi*x)");
    EXPECT_NO_THROW(c.validate(g));
}

TEST(Coefficients, SampledCacheMatchesDirect) {
    Grid g({0.0, 0.0}, {1.0, 1.0}, {4, 4}, 1.0, 4);
    CoefficientSet c;
    c.a2 = Coefficient::expression("x + y*t");
    SampledCoefficients sc(c, g);
    const Field& f = sc.at(2, 0.5);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto p = g.point(n);
        EXPECT_DOUBLE_EQ(f[n], p[0] + p[1] * 0.5);
    }
    EXPECT_TRUE(sc.at(1, 0.5).empty());
}
