#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "rswave/carleman_params.hpp"
#include "rswave/grid.hpp"
#include "rswave/jet.hpp"

namespace rswave {

/// sigma, phi = e^{mu sigma}, ell = lambda phi, theta = e^ell and their analytic
/// partials at one space-time point. Spatial arrays use the first dim() entries.
struct WeightSample {
    double sigma = 0.0, phi = 0.0, ell = 0.0, theta = 0.0;
    double sigma_t = 0.0, sigma_tt = 0.0;
    std::array<double, 2> sigma_x{};   ///< ∂σ/∂x_j
    std::array<double, 2> sigma_xx{};  ///< ∂²σ/∂x_j² (σ is separable: mixed partials vanish)
    double ell_t = 0.0, ell_tt = 0.0;
    std::array<double, 2> ell_x{};
    std::array<std::array<double, 2>, 2> ell_xx{};
    std::array<double, 2> ell_tx{};
    /// theta = e^ell overflowed; only `ell` (= log theta) is meaningful.
    bool saturated = false;
};

WeightSample eval_weight_point(const CarlemanParams& p, const GeometrySpec& geom, double t,
                               const double* x);

/// Weight samples on every (time level, node) of a grid.
struct WeightField {
    int levels = 0;
    std::size_t nodes = 0;
    std::vector<WeightSample> samples;
    std::vector<std::pair<int, std::size_t>> saturated;  ///< (time level, node)

    const WeightSample& at(int k, std::size_t node) const { return samples[k * nodes + node]; }
};

WeightField eval_weights(const CarlemanParams& p, const GeometrySpec& geom, const Grid& grid);

/// C² quintic smoothstep 6u⁵ - 15u⁴ + 10u³ clamped to [0, 1] and its derivatives.
double smoothstep(double u);
double smoothstep_d1(double u);
double smoothstep_d2(double u);

struct CutoffSample {
    double chi = 0.0, chi_t = 0.0, chi_tt = 0.0;
    std::array<double, 2> chi_x{};
    std::array<double, 2> chi_tx{};
    std::array<std::array<double, 2>, 2> chi_xx{};
    double Theta = 0.0;  ///< |∇χ|² + χ_t² + Σ_jk χ_{x_j x_k}²
};

/// χ = S((σ - c1) / δ) with derivatives by the chain rule through σ.
CutoffSample eval_cutoff_point(const CarlemanParams& p, const GeometrySpec& geom,
                               const WeightSample& w);

struct CutoffFunction {
    int levels = 0;
    std::size_t nodes = 0;
    std::vector<CutoffSample> samples;

    const CutoffSample& at(int k, std::size_t node) const { return samples[k * nodes + node]; }
};

/// Throws ConditionError when no grid node lies in Q(c1 + δ).
CutoffFunction build_cutoff(const CarlemanParams& p, const GeometrySpec& geom, const Grid& grid);

/// Taylor jet of σ around (t, x): variable 0 is t, variables 1..n are x_1..x_n.
template <int V, int N>
Jet<V, N> sigma_jet(const CarlemanParams& p, const GeometrySpec& geom, double t, const double* x) {
    const int n = V - 1;
    Jet<V, N> spatial;
    for (int i = 0; i < n; ++i) {
        const Jet<V, N> d = Jet<V, N>::variable(i + 1, x[i]) - geom.x0[i];
        spatial += exp(p.beta * (d * d));
    }
    const Jet<V, N> tau = Jet<V, N>::variable(0, t) - geom.T / 2.0;
    return spatial - static_cast<double>(n) * exp(p.alpha * p.beta * (tau * tau));
}

/// Taylor jet of ell = lambda e^{mu sigma}.
template <int V, int N>
Jet<V, N> ell_jet(const CarlemanParams& p, const GeometrySpec& geom, double t, const double* x) {
    return p.lambda * exp(p.mu * sigma_jet<V, N>(p, geom, t, x));
}

}  // namespace rswave
