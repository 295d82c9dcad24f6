#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rswave/adjoint.hpp"
#include "rswave/discrete_ops.hpp"
#include "rswave/error.hpp"

using namespace rswave;

namespace {

constexpr double kPi = std::numbers::pi;
const std::vector<Face> kRight = {Face{0, Side::High}};

TerminalData sine_datum(const Grid& g) {
    return {sample(g, [](auto x) { return std::sin(kPi * x[0]); }), g.zeros()};
}

// Transposition benchmark with every control and coefficient slot active.
double transposition(int nx) {
    Grid g({0.0}, {1.0}, {nx}, 2.5, 5 * nx);
    CoefficientSet c;
    c.a1 = Coefficient::constant(1.0);
    c.a4 = Coefficient::expression("x*(1-x)");
    c.a5 = Coefficient::constant(1.0);
    ControlTriple u;
    for (int k = 0; k < g.steps(); ++k) {
        const double th = g.time(k) + 0.5 * g.dt();
        u.f.push_back(sample(g, [&](auto x) { return std::sin(kPi * x[0]) * std::cos(th); }));
        u.g.push_back(sample(g, [&](auto x) { return x[0] * (1 - x[0]) * std::sin(th); }));
    }
    for (int j = 0; j <= g.steps(); ++j) {
        Field h = g.zeros();
        h[g.index(nx)] = 0.1 * std::pow(std::sin(kPi * g.time(j) / 2.5), 2);
        u.h.push_back(h);
    }
    const Field y0 = sample(g, [](auto x) { return std::sin(kPi * x[0]); });
    const Field yh0 = sample(g, [](auto x) { return x[0] * (1 - x[0]); });
    const auto ft = ForwardSolver(g, c, kRight).solve(y0, yh0, u, nullptr);
    const auto at = AdjointSolver(g, c).solve({sample(g, [](auto x) { return std::sin(2 * kPi * x[0]); }),
                                               sample(g, [](auto x) { return std::sin(kPi * x[0]); })});
    const auto r = transposition_residual(g, c, kRight, y0, yh0, {ft.final_y()}, {ft.final_yhat()}, at, u);
    EXPECT_FALSE(r.degenerate);
    return r.residual;
}

}  // namespace

TEST(Adjoint, TerminalLevelHoldsData) {
    Grid g({0.0}, {1.0}, {20}, 1.0, 40);
    const TerminalData d = sine_datum(g);
    const auto tr = AdjointSolver(g, CoefficientSet{}).solve(d);
    EXPECT_EQ(tr.tau_level, 40);
    EXPECT_EQ(tr.z.back(), zero_boundary(g, d.zT));
    EXPECT_EQ(tr.z.size(), 41u);
    EXPECT_EQ(tr.z_pair.size(), 40u);
    const auto half = AdjointSolver(g, CoefficientSet{}).solve(d, 20);
    EXPECT_EQ(half.tau_level, 20);
    EXPECT_EQ(half.z.size(), 21u);
}

TEST(Adjoint, StandingWaveMatchesClosedForm) {
    // z(t) = sin(πx) cos(π(T - t)) for data (sin πx, 0) at t = T.
    Grid g({0.0}, {1.0}, {200}, 1.0, 400);
    const auto tr = AdjointSolver(g, CoefficientSet{}).solve(sine_datum(g));
    double err = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n)
        err = std::max(err, std::abs(tr.z[0][n] - std::sin(kPi * g.point(n)[0]) * std::cos(kPi * g.T())));
    EXPECT_LT(err, 1e-4);
}

TEST(Adjoint, TranspositionIdentityConvergesAtSecondOrder) {
    const double r1 = transposition(25), r2 = transposition(50), r3 = transposition(100);
    EXPECT_GT(std::log2(r1 / r2), 1.8);
    EXPECT_GT(std::log2(r2 / r3), 1.8);
    EXPECT_LT(r3, 1e-3);
}

TEST(Adjoint, FreeEnergyIsConservedByMidpoint) {
    Grid g({0.0}, {1.0}, {100}, 2.5, 1000);
    const TerminalData d{sample(g, [](auto x) { return std::sin(kPi * x[0]); }),
                         sample(g, [](auto x) { return x[0] * (1 - x[0]); })};
    const auto tr = AdjointSolver(g, CoefficientSet{}).solve(d);
    const EnergyReport e = energy_check(g, CoefficientSet{}, tr, kRight, 0.0);
    EXPECT_LT(e.max_relative_drift, 1e-10);
    EXPECT_TRUE(e.forward_bound_ok);
    EXPECT_TRUE(e.backward_bound_ok);
}

TEST(Adjoint, EnergyBandWithPotential) {
    Grid g({0.0}, {1.0}, {50}, 2.5, 500);
    CoefficientSet c;
    c.a1 = Coefficient::constant(5.0);
    const auto tr = AdjointSolver(g, c).solve(sine_datum(g));
    const double r2 = coefficient_sizes(c, g).r2;
    const EnergyReport e = energy_check(g, c, tr, kRight, r2);
    EXPECT_TRUE(e.forward_bound_ok);
    EXPECT_TRUE(e.backward_bound_ok);
    EXPECT_TRUE(std::isfinite(e.fitted_C));
    EXPECT_GT(e.max_relative_drift, 1e-3);  // the potential really changes the energy
    // The band must hold with the fitted constant at every level.
    const double E_tau = e.energy.back();
    const double w = std::exp(e.fitted_C * (r2 + 1.0) * g.T());
    for (double Ek : e.energy) EXPECT_GE(E_tau * (1.0 + 1e-12), Ek / w);
}

TEST(Adjoint, HiddenRegularityMatchesClosedForm) {
    // Outward derivative at x = 1 of sin(πx) cos(π(T - t)) is -π cos(π(T - t)).
    const double T = 1.7;
    Grid g({0.0}, {1.0}, {200}, T, 400);
    const auto tr = AdjointSolver(g, CoefficientSet{}).solve(sine_datum(g));
    const double exact = std::sqrt(kPi * kPi * (T / 2.0 + std::sin(2.0 * kPi * T) / (4.0 * kPi)));
    EXPECT_NEAR(hidden_regularity_norm(g, tr, kRight), exact, 1e-3 * exact);
    EXPECT_NEAR(hidden_regularity_norm(g, tr), std::sqrt(2.0) * exact, 2e-3 * exact);
}

TEST(Adjoint, RandomCoefficientsUnsupported) {
    Grid g({0.0}, {1.0}, {10}, 1.0, 10);
    CoefficientSet c;
    c.random = true;
    EXPECT_THROW(AdjointSolver(g, c), SolverError);
}

TEST(Adjoint, ObservationTermsSplit) {
    Grid g({0.0}, {1.0}, {40}, 2.5, 100);
    CoefficientSet c;
    c.a5 = Coefficient::constant(2.0);
    const auto tr = AdjointSolver(g, c).solve(sine_datum(g));
    const ObservationTerms o = observation_terms(g, c, tr, kRight);
    EXPECT_GT(o.trace, 0.0);
    EXPECT_GT(o.a5zhat, 0.0);
    EXPECT_EQ(o.a4z, 0.0);
    EXPECT_DOUBLE_EQ(o.total(), o.trace + o.a5zhat);
}
