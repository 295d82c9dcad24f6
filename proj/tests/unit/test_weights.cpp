#include <gtest/gtest.h>

#include <cmath>

#include "rswave/error.hpp"
#include "rswave/jet.hpp"
#include "rswave/weights.hpp"

using namespace rswave;

namespace {

GeometrySpec square() {
    GeometrySpec g;
    g.lo = {0.0, 0.0};
    g.hi = {1.0, 1.0};
    g.x0 = {-0.1, -0.2};
    g.T = 3.0;
    return g;
}

CarlemanParams moderate() {
    CarlemanParams p;
    p.beta = 0.5;
    p.lambda = 1.3;
    p.mu = 0.7;
    p.alpha = 0.4;
    return p;
}

// σ written out directly from its definition.
double sigma_direct(const CarlemanParams& p, const GeometrySpec& g, double t, const double* x) {
    double s = 0.0;
    for (int i = 0; i < g.dim(); ++i) s += std::exp(p.beta * (x[i] - g.x0[i]) * (x[i] - g.x0[i]));
    const double tau = t - g.T / 2.0;
    return s - g.dim() * std::exp(p.alpha * p.beta * tau * tau);
}

double ell_direct(const CarlemanParams& p, const GeometrySpec& g, double t, const double* x) {
    return p.lambda * std::exp(p.mu * sigma_direct(p, g, t, x));
}

}  // namespace

TEST(Weights, ValuesMatchDefinition) {
    const auto g = square();
    const auto p = moderate();
    const double x[2] = {0.3, 0.8};
    const WeightSample w = eval_weight_point(p, g, 0.7, x);
    EXPECT_NEAR(w.sigma, sigma_direct(p, g, 0.7, x), 1e-14);
    EXPECT_NEAR(w.ell, ell_direct(p, g, 0.7, x), 1e-13);
    EXPECT_NEAR(w.phi, std::exp(p.mu * w.sigma), 1e-14);
    EXPECT_NEAR(w.theta, std::exp(w.ell), 1e-12);
    EXPECT_FALSE(w.saturated);
}

TEST(Weights, PartialsMatchFiniteDifferences) {
    const auto g = square();
    const auto p = moderate();
    const double h = 1e-4;
    for (double t : {0.4, 1.5, 2.7}) {
        const double x[2] = {0.35, 0.6};
        const WeightSample w = eval_weight_point(p, g, t, x);
        const double e0 = ell_direct(p, g, t, x);
        const double et1 = ell_direct(p, g, t + h, x), et0 = ell_direct(p, g, t - h, x);
        EXPECT_NEAR(w.ell_t, (et1 - et0) / (2 * h), 1e-6);
        EXPECT_NEAR(w.ell_tt, (et1 - 2 * e0 + et0) / (h * h), 1e-4);
        for (int j = 0; j < 2; ++j) {
            double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]};
            xp[j] += h;
            xm[j] -= h;
            const double ep = ell_direct(p, g, t, xp), em = ell_direct(p, g, t, xm);
            EXPECT_NEAR(w.ell_x[j], (ep - em) / (2 * h), 1e-6);
            EXPECT_NEAR(w.ell_xx[j][j], (ep - 2 * e0 + em) / (h * h), 1e-4);
            const double etx = (ell_direct(p, g, t + h, xp) - ell_direct(p, g, t + h, xm) -
                                ell_direct(p, g, t - h, xp) + ell_direct(p, g, t - h, xm)) / (4 * h * h);
            EXPECT_NEAR(w.ell_tx[j], etx, 1e-4);
        }
        double xpp[2] = {x[0] + h, x[1] + h}, xpm[2] = {x[0] + h, x[1] - h};
        double xmp[2] = {x[0] - h, x[1] + h}, xmm[2] = {x[0] - h, x[1] - h};
        const double exy = (ell_direct(p, g, t, xpp) - ell_direct(p, g, t, xpm) -
                            ell_direct(p, g, t, xmp) + ell_direct(p, g, t, xmm)) / (4 * h * h);
        EXPECT_NEAR(w.ell_xx[0][1], exy, 1e-4);
    }
}

TEST(Weights, JetAgreesWithAnalyticPartials) {
    const auto g = square();
    const auto p = moderate();
    const double x[2] = {0.2, 0.9};
    const double t = 2.2;
    const auto J = ell_jet<3, 2>(p, g, t, x);
    const WeightSample w = eval_weight_point(p, g, t, x);
    EXPECT_NEAR(J.value(), w.ell, 1e-13);
    EXPECT_NEAR(J.partial({1, 0, 0}), w.ell_t, 1e-12);
    EXPECT_NEAR(J.partial({2, 0, 0}), w.ell_tt, 1e-11);
    EXPECT_NEAR(J.partial({0, 1, 0}), w.ell_x[0], 1e-12);
    EXPECT_NEAR(J.partial({0, 0, 2}), w.ell_xx[1][1], 1e-11);
    EXPECT_NEAR(J.partial({1, 1, 0}), w.ell_tx[0], 1e-11);
    EXPECT_NEAR(J.partial({0, 1, 1}), w.ell_xx[0][1], 1e-11);
}

TEST(Weights, LargeParametersSaturateInsteadOfOverflowing) {
    GeometrySpec g;
    g.lo = {0.0};
    g.hi = {1.0};
    g.x0 = {-0.1};
    CarlemanParams p;
    p.beta = 8.0;
    p.lambda = 1e3;
    p.mu = 200.0;
    p.alpha = 0.9;
    const double x = 1.0;
    const WeightSample w = eval_weight_point(p, g, 1.25, &x);
    EXPECT_TRUE(w.saturated);
    EXPECT_TRUE(std::isfinite(w.ell));
}

TEST(Smoothstep, EndpointsAndDerivatives) {
    EXPECT_EQ(smoothstep(-0.5), 0.0);
    EXPECT_EQ(smoothstep(1.5), 1.0);
    EXPECT_DOUBLE_EQ(smoothstep(0.5), 0.5);
    EXPECT_EQ(smoothstep_d1(0.0), 0.0);
    EXPECT_EQ(smoothstep_d1(1.0), 0.0);
    EXPECT_EQ(smoothstep_d2(0.0), 0.0);
    EXPECT_NEAR(smoothstep_d2(1.0), 0.0, 1e-12);
    const double h = 1e-5;
    for (double u : {0.1, 0.37, 0.8}) {
        EXPECT_NEAR(smoothstep_d1(u), (smoothstep(u + h) - smoothstep(u - h)) / (2 * h), 1e-8);
        EXPECT_NEAR(smoothstep_d2(u), (smoothstep_d1(u + h) - smoothstep_d1(u - h)) / (2 * h), 1e-7);
    }
}

TEST(Cutoff, PlateauSupportAndChainRule) {
    GeometrySpec g;
    g.lo = {0.0};
    g.hi = {1.0};
    g.x0 = {-0.1};
    g.T = 2.5;
    CarlemanParams p = moderate();
    p.alpha = 0.9025;
    p.c1 = 0.05;
    p.delta = 0.2;
    const double h = 1e-5;
    int plateau = 0, outside = 0, ramp = 0;
    for (double t = 0.05; t < 2.5; t += 0.3) {
        for (double x = 0.05; x < 1.0; x += 0.1) {
            const WeightSample w = eval_weight_point(p, g, t, &x);
            const CutoffSample c = eval_cutoff_point(p, g, w);
            if (w.sigma >= p.c1 + p.delta) {
                EXPECT_EQ(c.chi, 1.0);
                ++plateau;
            } else if (w.sigma <= p.c1) {
                EXPECT_EQ(c.chi, 0.0);
                ++outside;
            } else {
                ++ramp;
                auto chi_at = [&](double tt, double xx) {
                    return smoothstep((sigma_direct(p, g, tt, &xx) - p.c1) / p.delta);
                };
                EXPECT_NEAR(c.chi, chi_at(t, x), 1e-13);
                EXPECT_NEAR(c.chi_t, (chi_at(t + h, x) - chi_at(t - h, x)) / (2 * h), 1e-6);
                EXPECT_NEAR(c.chi_x[0], (chi_at(t, x + h) - chi_at(t, x - h)) / (2 * h), 1e-6);
                const double Theta = c.chi_x[0] * c.chi_x[0] + c.chi_t * c.chi_t + c.chi_xx[0][0] * c.chi_xx[0][0];
                EXPECT_NEAR(c.Theta, Theta, 1e-10 * std::max(1.0, Theta));
            }
        }
    }
    EXPECT_GT(plateau, 0);
    EXPECT_GT(outside, 0);
    EXPECT_GT(ramp, 0);
}

TEST(Cutoff, NeedsPositiveDelta) {
    GeometrySpec g;
    g.lo = {0.0};
    g.hi = {1.0};
    g.x0 = {-0.1};
    CarlemanParams p = moderate();
    p.delta = 0.0;
    Grid grid({0.0}, {1.0}, {10}, g.T, 10);
    EXPECT_THROW(build_cutoff(p, g, grid), ConditionError);
}
