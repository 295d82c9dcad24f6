#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rswave/carleman.hpp"
#include "rswave/error.hpp"

using namespace rswave;

namespace {

constexpr double kPi = std::numbers::pi;

GeometrySpec interval() {
    GeometrySpec g;
    g.lo = {0.0};
    g.hi = {1.0};
    g.x0 = {-0.1};
    g.T = 2.5;
    return g;
}

CarlemanParams identity_params() {
    CarlemanParams p;
    p.beta = 0.5;
    p.lambda = 1.0;
    p.mu = 1.0;
    p.alpha = 0.95 * 0.95;
    return p;
}

// u = t e^{-(t - T/2)^2} x(1 - x) and its time derivative.
IdentityInput manufactured(const Grid& g) {
    IdentityInput in;
    for (int k = 0; k <= g.steps(); ++k) {
        const double t = g.time(k), b = std::exp(-(t - 1.25) * (t - 1.25));
        in.u.push_back(sample(g, [&](auto x) { return t * b * x[0] * (1 - x[0]); }));
        in.uhat.push_back(sample(g, [&](auto x) { return (b - 2 * t * (t - 1.25) * b) * x[0] * (1 - x[0]); }));
    }
    return in;
}

}  // namespace

TEST(PointCoefficients, PsiClosedFormMatchesJet) {
    const auto geom = interval();
    const auto p = identity_params();
    for (double t : {0.2, 1.25, 2.3}) {
        for (double x : {0.1, 0.5, 0.9}) {
            const PointCoefficients pc = point_coefficients(p, geom, t, &x);
            EXPECT_NEAR(pc.Psi, pc.Psi_jet, 1e-10 * std::max(1.0, std::abs(pc.Psi)));
            const WeightSample w = eval_weight_point(p, geom, t, &x);
            EXPECT_NEAR(psi_closed_form(p, geom, w, t, &x), pc.Psi, 1e-12 * std::max(1.0, std::abs(pc.Psi)));
            // A from its definition with the analytic partials.
            const double A = w.ell_t * w.ell_t - w.ell_tt - w.ell_x[0] * w.ell_x[0] + w.ell_xx[0][0] - pc.Psi;
            EXPECT_NEAR(pc.A, A, 1e-10 * std::max(1.0, std::abs(A)));
        }
    }
}

TEST(PointCoefficients, LeadingTermOfAIsQuadraticInLambda) {
    const auto geom = interval();
    auto p = identity_params();
    const double t = 0.3, x = 0.8;
    double prev = 0.0;
    for (double lambda : {10.0, 100.0, 1000.0}) {
        p.lambda = lambda;
        const PointCoefficients pc = point_coefficients(p, geom, t, &x);
        const double rel = std::abs(pc.A - pc.A_leading) / std::abs(pc.A_leading);
        if (prev > 0.0) EXPECT_NEAR(rel / prev, 0.1, 0.02);
        prev = rel;
    }
}

TEST(Identity, ZeroProcessGivesZeroResidual) {
    Grid g({0.0}, {1.0}, {20}, 2.5, 40);
    IdentityInput in;
    in.u.assign(41, g.zeros());
    in.uhat = in.u;
    const IdentityResidual r = identity_residual(g, identity_params(), interval(), in);
    EXPECT_EQ(r.residual, 0.0);
    EXPECT_EQ(r.scale, 0.0);
}

TEST(Identity, ManufacturedResidualConvergesAtSecondOrder) {
    const auto geom = interval();
    double prev = 0.0;
    for (int nx : {40, 80, 160}) {
        Grid g({0.0}, {1.0}, {nx}, 2.5, 2 * nx);
        const IdentityResidual r = identity_residual(g, identity_params(), geom, manufactured(g));
        EXPECT_GT(r.scale, 0.0);
        if (prev > 0.0) EXPECT_GT(std::log2(prev / r.residual), 1.8) << "nx " << nx;
        prev = r.residual;
    }
}

TEST(Identity, PointwiseFormRejectsDiffusion) {
    Grid g({0.0}, {1.0}, {10}, 2.5, 20);
    IdentityInput in = manufactured(g);
    in.U.assign(21, g.zeros());
    EXPECT_THROW(identity_residual(g, identity_params(), interval(), in), ConfigError);
}

TEST(Identity, DeterministicIntegratedResidualShrinksWithDt) {
    const auto geom = interval();
    Grid coarse({0.0}, {1.0}, {40}, 2.5, 100), fine({0.0}, {1.0}, {40}, 2.5, 400);
    const auto a = integrated_identity(coarse, identity_params(), geom, manufactured(coarse));
    const auto b = integrated_identity(fine, identity_params(), geom, manufactured(fine));
    EXPECT_GT(a.scale, 0.0);
    EXPECT_LT(std::abs(b.residual), std::abs(a.residual));
}

TEST(Identity, ExpectedResidualIsReproducible) {
    const auto geom = interval();
    Grid g({0.0}, {1.0}, {20}, 2.5, 20);
    const IdentityInput in = manufactured(g);
    const Field q = sample(g, [](auto x) { return x[0] * (1 - x[0]); });
    const auto a = expected_identity_residual(g, identity_params(), geom, in.u, in.uhat, q, 8, 3, 1);
    const auto b = expected_identity_residual(g, identity_params(), geom, in.u, in.uhat, q, 8, 3, 2);
    EXPECT_EQ(a.estimate.mean, b.estimate.mean);
    EXPECT_EQ(a.estimate.ci_halfwidth, b.estimate.ci_halfwidth);
    EXPECT_EQ(a.estimate.count, 8u);
    EXPECT_THROW(expected_identity_residual(g, identity_params(), geom, in.u, in.uhat, q, 1, 3, 1),
                 ContractViolation);
}

TEST(Transform, PlateauCopiesTheAdjointState) {
    const auto geom = interval();
    CarlemanParams p = choose_beta(geom, 0.0);
    p.delta = 0.5;
    Grid g({0.0}, {1.0}, {50}, 2.5, 125);
    const auto tr = AdjointSolver(g, CoefficientSet{}).solve(
        {sample(g, [](auto x) { return std::sin(kPi * x[0]); }), g.zeros()});
    const CutoffFunction chi = build_cutoff(p, geom, g);
    const TransformedTrajectory ut = transform(g, tr, chi);
    int plateau = 0;
    for (int k = 0; k <= g.steps(); ++k)
        for (std::size_t n = 0; n < g.size(); ++n)
            if (chi.at(k, n).chi == 1.0) {
                ++plateau;
                EXPECT_EQ(ut.u[k][n], tr.z[k][n]);
            } else if (chi.at(k, n).chi == 0.0) {
                EXPECT_EQ(ut.u[k][n], 0.0);
            }
    EXPECT_GT(plateau, 0);
    EXPECT_TRUE(std::isfinite(ut.max_residual));
}

TEST(Positivity, BoundsHoldOnIntervalGrid) {
    const auto geom = interval();
    CarlemanParams p = choose_beta(geom, 0.0);
    p.lambda = 10.0;
    Grid g({0.0}, {1.0}, {40}, 2.5, 100);
    for (double mu : {1.0, 10.0}) {
        p.mu = mu;
        const PositivityReport r = positivity_checks(g, p, geom, 16, 1, false);
        EXPECT_GT(r.nodes_checked, 0);
        EXPECT_EQ(r.bv2_violations, 0);
        EXPECT_EQ(r.zd1_violations, 0);
        EXPECT_GT(r.bv2_min_margin, 0.0);
        EXPECT_GT(r.zd1_min_margin, 0.0);
        EXPECT_TRUE(r.ok());
    }
}

TEST(Positivity, QuadraticFormIsIndefiniteInTwoDimensions) {
    // With two axes the per-axis Hessian terms differ and the form loses
    // definiteness on directions orthogonal to the gradient of sigma.
    GeometrySpec geom;
    geom.lo = {0.0, 0.0};
    geom.hi = {1.0, 1.0};
    geom.x0 = {-0.1, -0.1};
    geom.T = 40.0;
    CarlemanParams p = choose_beta(geom, 0.0);
    p.lambda = 10.0;
    p.mu = 1.0;
    Grid g({0.0, 0.0}, {1.0, 1.0}, {8, 8}, geom.T, 40);
    const PositivityReport r = positivity_checks(g, p, geom, 16, 1, false);
    EXPECT_GT(r.bv2_violations, 0);
    EXPECT_LT(r.bv2_min_margin, 0.0);
    EXPECT_EQ(r.zd1_violations, 0);
}

TEST(CarlemanRatio, ZeroDatumIsDegenerate) {
    const auto geom = interval();
    CarlemanParams p = choose_beta(geom, 0.0);
    p.delta = 0.5;
    p.mu = 0.1;
    Grid g({0.0}, {1.0}, {40}, 2.5, 200);
    const auto tr = AdjointSolver(g, CoefficientSet{}).solve({g.zeros(), g.zeros()});
    const CarlemanRatio r = carleman_ratio(g, p, geom, tr, CoefficientSet{}, {Face{0, Side::High}});
    EXPECT_TRUE(r.degenerate);
}

TEST(CarlemanRatio, ResolvedRatioIsStableUnderRefinement) {
    const auto geom = interval();
    CarlemanParams p = choose_beta(geom, 0.0);
    p.delta = 0.5;
    p.mu = 0.1;
    double prev = 0.0;
    for (int nx : {100, 200}) {
        Grid g({0.0}, {1.0}, {nx}, 2.5, 5 * nx);
        const auto tr = AdjointSolver(g, CoefficientSet{}).solve(
            {sample(g, [](auto x) { return std::sin(kPi * x[0]); }), g.zeros()});
        const CarlemanRatio r = carleman_ratio(g, p, geom, tr, CoefficientSet{}, {Face{0, Side::High}});
        EXPECT_FALSE(r.degenerate);
        EXPECT_TRUE(std::isfinite(r.ratio));
        EXPECT_GT(r.ratio, 0.0);
        EXPECT_LT(r.resolution, 2.0);
        if (prev > 0.0) EXPECT_NEAR(r.ratio / prev, 1.0, 0.25);
        prev = r.ratio;
    }
}
