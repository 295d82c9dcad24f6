#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rswave/carleman_params.hpp"
#include "rswave/error.hpp"
#include "rswave/geometry.hpp"

using namespace rswave;

namespace {

GeometrySpec interval(double x0, double T = 2.5) {
    GeometrySpec g;
    g.lo = {0.0};
    g.hi = {1.0};
    g.x0 = {x0};
    g.T = T;
    return g;
}

}  // namespace

TEST(ControlTime, IntervalWaitingTimeIsTwiceR1) {
    const ControlTimeReport rep = compute_report(interval(-0.1));
    EXPECT_NEAR(rep.R1, 1.1, 1e-15);
    EXPECT_NEAR(rep.Tstar, 2.2, 4e-16);
    EXPECT_DOUBLE_EQ(rep.alpha, 0.95 * 0.95);
    ASSERT_EQ(rep.gamma0.size(), 1u);
    EXPECT_EQ(rep.gamma0[0], (Face{0, Side::High}));
}

TEST(ControlTime, ObservationPointOnTheRight) {
    const ControlTimeReport rep = compute_report(interval(1.3));
    EXPECT_NEAR(rep.Tstar, 2.6, 1e-15);
    ASSERT_EQ(rep.gamma0.size(), 1u);
    EXPECT_EQ(rep.gamma0[0], (Face{0, Side::Low}));
}

TEST(ControlTime, SquareHasTwoObservedFaces) {
    GeometrySpec g;
    g.lo = {0.0, 0.0};
    g.hi = {1.0, 1.0};
    g.x0 = {-0.1, -0.1};
    g.search_points = 201;
    const ControlTimeReport rep = compute_report(g);
    // max_i |x_i - x0_i| = 1.1 and the worst axis ratio 1.1 / 0.1 are attained at grid corners.
    EXPECT_NEAR(rep.R1, 1.1, 1e-14);
    EXPECT_NEAR(rep.Tstar, 2.0 * std::sqrt(2.0) * 1.1 * 11.0, 1e-11);
    EXPECT_NEAR(rep.alpha, 0.95 * 0.95 / 2.0 / 121.0, 1e-15);
    ASSERT_EQ(rep.gamma0.size(), 2u);
    EXPECT_EQ(rep.gamma0[0], (Face{0, Side::High}));
    EXPECT_EQ(rep.gamma0[1], (Face{1, Side::High}));
}

TEST(ControlTime, RejectsInadmissibleGeometry) {
    EXPECT_THROW(compute_report(interval(0.5)), GeometryError);
    EXPECT_THROW(compute_report(interval(1.0)), GeometryError);
    GeometrySpec g = interval(-0.1);
    g.kappa = 1.0;
    EXPECT_THROW(g.validate(), GeometryError);
    g = interval(-0.1);
    g.hi = {1.0, 1.0};
    EXPECT_THROW(g.validate(), GeometryError);
}

TEST(BetaSearch, CertifiesDefaultIntervalForSeveralR2) {
    const GeometrySpec geom = interval(-0.1);
    for (double r2 : {0.0, 1.0, 10.0}) {
        const CarlemanParams p = choose_beta(geom, r2);
        const ConditionReport c = verify_conditions(p, geom);
        EXPECT_TRUE(c.all()) << "r2 = " << r2;
        EXPECT_TRUE(c.inclusions);
        EXPECT_GT(c.margin1, 0.0);
        EXPECT_GT(c.margin2, 0.0);
        EXPECT_GT(c.margin3, 0.0);
        const double k = std::log2(p.beta / (1.0 + r2));
        EXPECT_NEAR(k, std::round(k), 1e-12);
        EXPECT_GE(k, 1.0);
        EXPECT_GT(p.delta, 0.0);
    }
}

TEST(BetaSearch, ForcedSmallBetaFailsConditionThree) {
    const GeometrySpec geom = interval(-0.1);
    for (double r2 : {1.0, 10.0}) {
        const CarlemanParams p = params_for_beta(geom, 0.1, r2);
        const ConditionReport c = verify_conditions(p, geom);
        EXPECT_FALSE(c.cond3);
        // Independent evaluation of the condition-(3) margin.
        const double b = p.beta;
        const double expected = 4.0 * p.c0 * b * b + 2.0 * b * (1.0 - p.alpha) - 4.0 * r2 * b * geom.T - p.c0_tilde;
        EXPECT_NEAR(c.margin3, expected, 1e-12);
    }
}

TEST(BetaSearch, FailsWhenHorizonTooShort) {
    EXPECT_THROW(choose_beta(interval(-0.1, 2.0), 0.0), ConditionError);
}

TEST(BetaSearch, RandomAdmissibleIntervals) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> len(0.5, 2.0), gap(0.05, 0.5), kap(0.8, 0.98);
    for (int trial = 0; trial < 8; ++trial) {
        GeometrySpec g;
        const double L = len(rng);
        g.lo = {0.0};
        g.hi = {L};
        g.x0 = {trial % 2 ? L + gap(rng) : -gap(rng)};
        g.kappa = kap(rng);
        g.T = 1.0;
        const double tstar = compute_report(g).Tstar;
        g.T = 1.05 * tstar / g.kappa;
        const CarlemanParams p = choose_beta(g, 0.5 * trial);
        EXPECT_TRUE(verify_conditions(p, g).all()) << "trial " << trial;
    }
}

TEST(LevelSets, MembershipMatchesDirectSigma) {
    const GeometrySpec geom = interval(-0.1);
    CarlemanParams p = choose_beta(geom, 0.0);
    for (double t : {0.1, 1.0, 1.25, 2.4}) {
        for (double x : {0.05, 0.5, 0.95}) {
            const double sigma = std::exp(p.beta * (x + 0.1) * (x + 0.1)) -
                                 std::exp(p.alpha * p.beta * (t - 1.25) * (t - 1.25));
            for (double b : {0.0, p.c1, 0.5}) {
                if (std::abs(sigma - b) < 1e-9) continue;
                EXPECT_EQ(level_set_membership(p, geom, b, t, std::span<const double>(&x, 1)), sigma > b);
            }
        }
    }
}
