#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "rswave/adjoint.hpp"
#include "rswave/carleman.hpp"
#include "rswave/control.hpp"
#include "rswave/discrete_ops.hpp"
#include "rswave/forward.hpp"
#include "rswave/noise.hpp"

using namespace rswave;

namespace {

constexpr double kPi = std::numbers::pi;
const std::vector<Face> kRight = {Face{0, Side::High}};

Grid square(int n) { return Grid({0.0, 0.0}, {1.0, 1.0}, {n, n}, 1.0, 2 * n); }

Field bump2(const Grid& g) {
    return sample(g, [](auto x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); });
}

}  // namespace

static void BM_Laplacian2D(benchmark::State& st) {
    const Grid g = square(static_cast<int>(st.range(0)));
    const Field u = bump2(g);
    for (auto _ : st) benchmark::DoNotOptimize(laplacian_apply(g, u));
    st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_Laplacian2D)->Arg(32)->Arg(64)->Arg(128);

static void BM_Poisson2D(benchmark::State& st) {
    const Grid g = square(static_cast<int>(st.range(0)));
    const Field f = bump2(g);
    for (auto _ : st) benchmark::DoNotOptimize(poisson_solve(g, f));
}
BENCHMARK(BM_Poisson2D)->Arg(32)->Arg(64);

static void BM_ForwardSolve1D(benchmark::State& st) {
    const int nx = static_cast<int>(st.range(0));
    const Grid g({0.0}, {1.0}, {nx}, 2.5, 5 * nx);
    CoefficientSet c;
    c.a2 = Coefficient::constant(0.5);
    const ForwardSolver fs(g, c, kRight);
    const Field y0 = sample(g, [](auto x) { return std::sin(kPi * x[0]); });
    const BrownianPath p = sample_path(1, g.dt(), g.steps());
    for (auto _ : st) benchmark::DoNotOptimize(fs.solve(y0, g.zeros(), ControlTriple{}, &p));
}
BENCHMARK(BM_ForwardSolve1D)->Arg(100)->Arg(400);

static void BM_AdjointSolve1D(benchmark::State& st) {
    const int nx = static_cast<int>(st.range(0));
    const Grid g({0.0}, {1.0}, {nx}, 2.5, 5 * nx);
    const AdjointSolver as(g, CoefficientSet{});
    const TerminalData d{sample(g, [](auto x) { return std::sin(kPi * x[0]); }), g.zeros()};
    for (auto _ : st) benchmark::DoNotOptimize(as.solve(d));
}
BENCHMARK(BM_AdjointSolve1D)->Arg(100)->Arg(400);

static void BM_AdjointSolve2DLeapfrog(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const Grid g({0.0, 0.0}, {1.0, 1.0}, {n, n}, 1.0, 4 * n, Scheme::Leapfrog);
    const AdjointSolver as(g, CoefficientSet{});
    const TerminalData d{bump2(g), g.zeros()};
    for (auto _ : st) benchmark::DoNotOptimize(as.solve(d));
}
BENCHMARK(BM_AdjointSolve2DLeapfrog)->Arg(24)->Arg(48);

static void BM_GramianApply1D(benchmark::State& st) {
    const int nx = static_cast<int>(st.range(0));
    const Grid g({0.0}, {1.0}, {nx}, 2.5, static_cast<int>(2.5 * nx), Scheme::Leapfrog);
    const TerminalData xi{sample(g, [](auto x) { return std::sin(kPi * x[0]); }), g.zeros()};
    for (auto _ : st) benchmark::DoNotOptimize(apply_gramian(g, CoefficientSet{}, kRight, xi));
}
BENCHMARK(BM_GramianApply1D)->Arg(100)->Arg(200);

static void BM_PositivityChecks1D(benchmark::State& st) {
    GeometrySpec geom;
    geom.lo = {0.0};
    geom.hi = {1.0};
    geom.x0 = {-0.1};
    geom.T = 2.5;
    CarlemanParams p = choose_beta(geom, 0.0);
    p.lambda = 10.0;
    p.mu = 3.0;
    const Grid g({0.0}, {1.0}, {100}, 2.5, 250);
    for (auto _ : st) benchmark::DoNotOptimize(positivity_checks(g, p, geom, 32, 1, false));
}
BENCHMARK(BM_PositivityChecks1D)->Unit(benchmark::kMillisecond);

static void BM_SamplePath(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(sample_path(7, 0.01, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_SamplePath)->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
