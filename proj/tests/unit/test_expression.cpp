#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rswave/error.hpp"
#include "rswave/expression.hpp"

using rswave::ConfigError;
using rswave::Expression;

TEST(Expression, ArithmeticAndPrecedence) {
    EXPECT_DOUBLE_EQ(Expression::parse("1 + 2 * 3").eval(0, 0), 7.0);
    EXPECT_DOUBLE_EQ(Expression::parse("(1 + 2) * 3").eval(0, 0), 9.0);
    EXPECT_DOUBLE_EQ(Expression::parse("2^3^2").eval(0, 0), 512.0);
    EXPECT_DOUBLE_EQ(Expression::parse("-2^2").eval(0, 0), -4.0);
    EXPECT_DOUBLE_EQ(Expression::parse("8 / 4 / 2").eval(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(Expression::parse("1e-3 * 2").eval(0, 0), 2e-3);
}

TEST(Expression, VariablesAndFunctions) {
    const Expression e = Expression::parse("x*(1-x) + sin(pi*t) + max(y, 0.5)");
    const double t = 0.3, x = 0.25, y = 0.1;
    EXPECT_NEAR(e.eval(t, x, y), x * (1 - x) + std::sin(std::numbers::pi * t) + 0.5, 1e-15);
    EXPECT_TRUE(e.depends_on_t());
    EXPECT_FALSE(e.is_constant());
    EXPECT_NEAR(Expression::parse("pow(e, 2) + sqrt(abs(-4)) + log(exp(1.5))").eval(0, 0),
                std::exp(2.0) + 2.0 + 1.5, 1e-14);
    EXPECT_NEAR(Expression::parse("tanh(x) + cosh(x) - sinh(x) + tan(x) + min(x, 2)").eval(0, 0.4),
                std::tanh(0.4) + std::cosh(0.4) - std::sinh(0.4) + std::tan(0.4) + 0.4, 1e-14);
    EXPECT_TRUE(Expression::parse("3*pi").is_constant());
    EXPECT_FALSE(Expression::parse("x").depends_on_t());
}

TEST(Expression, MalformedInputThrows) {
    for (const char* bad : {"", "1 +", "(1", "1)", "foo(x)", "sin x", "x $ 2", "max(1)", "2 3"})
        EXPECT_THROW(Expression::parse(bad), ConfigError) << bad;
}
