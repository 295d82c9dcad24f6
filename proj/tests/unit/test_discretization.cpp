#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rswave/discrete_ops.hpp"
#include "rswave/error.hpp"
#include "rswave/grid.hpp"
#include "rswave/noise.hpp"
#include "rswave/spectral_filter.hpp"

using namespace rswave;

namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form eigenvalue of the 3-point Dirichlet Laplacian for mode m.
double discrete_eigenvalue(int m, int N, double h) {
    return (2.0 - 2.0 * std::cos(m * kPi / N)) / (h * h);
}

Field random_interior(const Grid& g, std::uint64_t seed) {
    Field u = g.zeros();
    for (std::size_t n : g.interior()) u[n] = standard_normal(seed, n);
    return u;
}

}  // namespace

TEST(Grid, IndexRoundTripAndBoundaryCount) {
    Grid g({0.0, 0.0}, {1.0, 2.0}, {4, 6}, 1.0, 10);
    EXPECT_EQ(g.size(), 5u * 7u);
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto ij = g.multi_index(n);
        EXPECT_EQ(g.index(ij[0], ij[1]), n);
    }
    EXPECT_EQ(g.interior().size(), 3u * 5u);
    EXPECT_DOUBLE_EQ(g.h(1), 2.0 / 6.0);
    // Corners are excluded from face stencils.
    EXPECT_EQ(g.face_nodes(Face{0, Side::High}).size(), 5u);
    EXPECT_EQ(g.face_nodes(Face{1, Side::Low}).size(), 3u);
}

TEST(Grid, TimeStepRoundsUpAndStepLookup) {
    Grid g = Grid::with_time_step({0.0}, {1.0}, {10}, 1.0, 0.3);
    EXPECT_EQ(g.steps(), 4);
    EXPECT_DOUBLE_EQ(g.dt(), 0.25);
    EXPECT_EQ(g.step_of(0.5), 2);
    EXPECT_THROW(g.step_of(0.3), ConfigError);
}

TEST(Grid, RejectsBadInput) {
    EXPECT_THROW(Grid({0.0}, {1.0}, {1}, 1.0, 4), ConfigError);
    EXPECT_THROW(Grid({0.0}, {0.0}, {4}, 1.0, 4), GeometryError);
    EXPECT_THROW(Grid({0.0}, {1.0}, {4}, 1.0, 0), ConfigError);
    EXPECT_THROW(parse_scheme("rk4"), ConfigError);
    EXPECT_EQ(parse_scheme("leapfrog"), Scheme::Leapfrog);
}

TEST(Laplacian, SineModeIsDiscreteEigenvector1D) {
    const int N = 16;
    Grid g({0.0}, {1.0}, {N}, 1.0, 1);
    for (int m : {1, 3, 7}) {
        const Field u = sample(g, [&](auto x) { return std::sin(m * kPi * x[0]); });
        const Field Lu = laplacian_apply(g, u);
        const double lam = discrete_eigenvalue(m, N, g.h(0));
        for (std::size_t n : g.interior()) EXPECT_NEAR(Lu[n], -lam * u[n], 1e-10 * lam);
    }
    EXPECT_NEAR(smallest_dirichlet_eigenvalue(g), discrete_eigenvalue(1, N, g.h(0)), 1e-12);
}

TEST(Laplacian, ProductModeIn2D) {
    Grid g({0.0, 0.0}, {1.0, 2.0}, {8, 12}, 1.0, 1);
    const Field u = sample(g, [](auto x) { return std::sin(kPi * x[0]) * std::sin(2.0 * kPi * x[1] / 2.0); });
    const double lam = discrete_eigenvalue(1, 8, g.h(0)) + discrete_eigenvalue(2, 12, g.h(1));
    const Field Lu = laplacian_apply(g, u);
    for (std::size_t n : g.interior()) EXPECT_NEAR(Lu[n], -lam * u[n], 1e-10 * lam);
    EXPECT_NEAR(smallest_dirichlet_eigenvalue(g),
                discrete_eigenvalue(1, 8, g.h(0)) + discrete_eigenvalue(1, 12, g.h(1)), 1e-10);
}

TEST(Norms, SummationByParts) {
    for (const Grid& g : {Grid({0.0}, {1.0}, {20}, 1.0, 1), Grid({0.0, 0.0}, {1.0, 1.0}, {9, 7}, 1.0, 1)}) {
        const Field u = random_interior(g, 1), v = random_interior(g, 2);
        Field mLu = laplacian_apply(g, u);
        for (double& x : mLu) x = -x;
        EXPECT_NEAR(inner(g, mLu, v), h01_inner(g, u, v), 1e-10 * std::abs(h01_inner(g, u, u)));
    }
}

TEST(Norms, HminusOneOfEigenfunction) {
    const int N = 32;
    Grid g({0.0}, {1.0}, {N}, 1.0, 1);
    const Field u = sample(g, [](auto x) { return std::sin(2.0 * kPi * x[0]); });
    const double lam = discrete_eigenvalue(2, N, g.h(0));
    EXPECT_NEAR(hm1_norm(g, u), l2_norm(g, u) / std::sqrt(lam), 1e-9);
    EXPECT_NEAR(h01_norm(g, u), l2_norm(g, u) * std::sqrt(lam), 1e-9);
    // Exact L2 norm of sin(2πx) sampled at interior nodes: the node sum equals N/2 · h.
    EXPECT_NEAR(l2_norm(g, u), std::sqrt(0.5), 1e-12);
}

TEST(Poisson, InvertsMinusLaplacian) {
    for (const Grid& g : {Grid({0.0}, {1.0}, {40}, 1.0, 1), Grid({0.0, 0.0}, {1.0, 1.0}, {12, 10}, 1.0, 1)}) {
        const Field f = random_interior(g, 5);
        CgStats st;
        const Field u = poisson_solve(g, f, 1e-12, &st);
        const Field Lu = laplacian_apply(g, u);
        double err = 0.0, ref = 0.0;
        for (std::size_t n : g.interior()) {
            err = std::max(err, std::abs(-Lu[n] - f[n]));
            ref = std::max(ref, std::abs(f[n]));
        }
        EXPECT_LT(err, 1e-9 * ref);
        EXPECT_GT(st.iterations, 0);
    }
}

TEST(NormalTrace, ExactForQuadratics) {
    Grid g({0.0, 0.0}, {1.0, 1.0}, {10, 10}, 1.0, 1);
    // u = x(1-x)(y+2): outward derivative on x=hi is -(y+2), on x=lo also -(y+2).
    const Field u = sample(g, [](auto x) { return x[0] * (1.0 - x[0]) * (x[1] + 2.0); });
    for (Side side : {Side::Low, Side::High}) {
        const Face f{0, side};
        const auto tr = normal_trace(g, u, f);
        const auto& nodes = g.face_nodes(f);
        ASSERT_EQ(tr.size(), nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            EXPECT_NEAR(tr[i], -(g.point(nodes[i].boundary)[1] + 2.0), 1e-12);
    }
}

TEST(ShiftedSolver, SolvesShiftedSystem) {
    for (const Grid& g : {Grid({0.0}, {1.0}, {30}, 1.0, 1), Grid({0.0, 0.0}, {1.0, 1.0}, {8, 9}, 1.0, 1)}) {
        const double c = 0.013;
        const Field a = sample(g, [](auto x) { return 1.0 + x[0]; });
        const Field r = random_interior(g, 9);
        const Field u = ShiftedSolver(g, c, a).solve(r);
        const Field Lu = laplacian_apply(g, u);
        for (std::size_t n : g.interior()) EXPECT_NEAR(u[n] - c * (Lu[n] + a[n] * u[n]), r[n], 1e-10);
        for (std::size_t n = 0; n < g.size(); ++n)
            if (g.is_boundary(n)) EXPECT_EQ(u[n], 0.0);
    }
}

TEST(SpectralFilter, ProjectionProperties) {
    Grid g({0.0}, {1.0}, {20}, 1.0, 1);
    SpectralFilter P(g, 0.6);
    EXPECT_EQ(P.cutoff(0), 12);
    const Field low = sample(g, [](auto x) { return std::sin(3.0 * kPi * x[0]); });
    const Field high = sample(g, [](auto x) { return std::sin(17.0 * kPi * x[0]); });
    const Field pl = P.apply(low), ph = P.apply(high);
    for (std::size_t n = 0; n < g.size(); ++n) {
        EXPECT_NEAR(pl[n], low[n], 1e-12);
        EXPECT_NEAR(ph[n], 0.0, 1e-12);
    }
    const Field u = random_interior(g, 3), v = random_interior(g, 4);
    EXPECT_NEAR(inner(g, P.apply(u), v), inner(g, u, P.apply(v)), 1e-12);
    const Field pu = P.apply(u), ppu = P.apply(pu);
    for (std::size_t n = 0; n < g.size(); ++n) EXPECT_NEAR(ppu[n], pu[n], 1e-12);
    EXPECT_THROW(SpectralFilter(g, 0.0), ConfigError);
}
