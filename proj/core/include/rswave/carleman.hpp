#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rswave/adjoint.hpp"
#include "rswave/carleman_params.hpp"
#include "rswave/coefficients.hpp"
#include "rswave/grid.hpp"
#include "rswave/noise.hpp"
#include "rswave/weights.hpp"

namespace rswave {

/// Weight-derived scalars entering the fundamental identity at one point.
/// Psi is the closed-form choice; the derivatives of Psi and A and the value of
/// B come from Taylor jets of ell.
struct PointCoefficients {
    double ell_t = 0.0, ell_tt = 0.0, lap_ell = 0.0;
    std::array<double, 2> ell_x{};
    std::array<std::array<double, 2>, 2> ell_xx{};
    std::array<double, 2> ell_tx{};
    double Psi = 0.0;      ///< closed form from analytic partials
    double Psi_jet = 0.0;  ///< same quantity through jets
    double Psi_t = 0.0;
    std::array<double, 2> Psi_x{};
    double A = 0.0;          ///< ell_t² - ell_tt - |∇ell|² + Δell - Psi
    double A_leading = 0.0;  ///< 4λ²μ²β²φ²[α²n²e^{2αβτ²}τ² - Σ e^{2βd²}d²]
    double B = 0.0;
};

PointCoefficients point_coefficients(const CarlemanParams& p, const GeometrySpec& geom, double t,
                                     const double* x);

/// Psi from analytic weight partials alone.
double psi_closed_form(const CarlemanParams& p, const GeometrySpec& geom, const WeightSample& w,
                       double t, const double* x);

/// u = χz, û = χ_t z + χẑ on every level of an adjoint trajectory.
struct TransformedTrajectory {
    std::vector<Field> u;
    std::vector<Field> uhat;
    /// max over steps and nodes of |(u^{k+1} - u^k)/dt - (û^k + û^{k+1})/2|
    double max_residual = 0.0;
};

TransformedTrajectory transform(const Grid& g, const AdjointTrajectory& tr,
                                const CutoffFunction& cutoff);

/// Ingredient fields per time level. `theta_shift` is subtracted from ell before
/// forming theta, so every quadratic quantity carries the factor e^{-2 theta_shift}.
struct IdentityIngredients {
    std::vector<Field> Psi, A, B, M, N_dt, v, vhat, K, Khat;
    std::vector<std::array<Field, 2>> V;
    double theta_shift = 0.0;
};

IdentityIngredients assemble_ingredients(const Grid& g, const CarlemanParams& p,
                                         const GeometrySpec& geom, const WeightField& w,
                                         const CutoffFunction& cutoff,
                                         const TransformedTrajectory& ut,
                                         const AdjointTrajectory& tr, const CoefficientSet& c);

/// An Itô process du = û dt + U dW, dû = (...) dt + Û dW sampled on the grid.
/// Empty U or Uhat means zero diffusion.
struct IdentityInput {
    std::vector<Field> u;
    std::vector<Field> uhat;
    std::vector<Field> U;
    std::vector<Field> Uhat;
};

struct IdentityResidual {
    double residual = 0.0;  ///< grid L² norm (space-time) of LHS - RHS
    double scale = 0.0;     ///< grid L² norm of the right-hand side
    double relative() const { return scale > 0.0 ? residual / scale : residual; }
};

/// Pointwise identity with U = Û = 0, all derivatives by centered differences.
/// Evaluated on the window t in [T/8, 7T/8], x in the middle 3/4 of every axis.
IdentityResidual identity_residual(const Grid& g, const CarlemanParams& p,
                                   const GeometrySpec& geom, const IdentityInput& in);

/// Integral over one path and the same window of LHS - (dt bracket + 𝒩) with
/// per-step increments; the dW bracket is left out, so its expectation must vanish.
struct IntegratedResidual {
    double residual = 0.0;
    double scale = 0.0;  ///< integral of |dt bracket|
};

IntegratedResidual integrated_identity(const Grid& g, const CarlemanParams& p,
                                       const GeometrySpec& geom, const IdentityInput& in);

struct ExpectedResidual {
    McEstimate estimate;
    double scale = 0.0;  ///< mean of the per-path scale
    bool within_ci() const { return std::abs(estimate.mean) <= estimate.ci_halfwidth; }
};

/// u = m + q W(t), û = m_t, U = q over `paths` Brownian paths.
ExpectedResidual expected_identity_residual(const Grid& g, const CarlemanParams& p,
                                            const GeometrySpec& geom,
                                            const std::vector<Field>& m,
                                            const std::vector<Field>& m_t, const Field& q,
                                            int paths, std::uint64_t seed, int workers = 1);

struct PositivityReport {
    long nodes_checked = 0;
    long bv2_violations = 0;
    double bv2_min_margin = 0.0;  ///< smallest eigenvalue of form minus bound, over the form's size
    long zd1_violations = 0;
    double zd1_min_margin = 0.0;
    bool zd3_evaluated = false;
    long zd3_violations = 0;
    long zd3_skipped = 0;  ///< nodes where the unscaled jet evaluation would overflow
    double zd3_min_ratio = 0.0;  ///< min of B / zd3 bound
    bool ok(bool with_zd3 = false) const {
        return bv2_violations == 0 && zd1_violations == 0 && (!with_zd3 || zd3_violations == 0);
    }
};

/// Checks the quadratic-form bound, the zd1 chain and optionally the B lower
/// bound at every grid node of Q(c1). The quadratic form is tested on `samples`
/// random directions per node.
PositivityReport positivity_checks(const Grid& g, const CarlemanParams& p,
                                   const GeometrySpec& geom, int samples = 32,
                                   std::uint64_t seed = 1, bool with_zd3 = false);

struct CarlemanRatio {
    double lhs = 0.0;
    double rhs_energy = 0.0;
    double rhs_combo = 0.0;
    double rhs_trace = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double log_scale = 0.0;  ///< every integral is multiplied by e^{-log_scale}
    /// Largest change of ell or chi across one cell or step; values well above 1
    /// mean the weight is not resolved and the ratio is grid-dependent.
    double resolution = 0.0;
    bool degenerate = false;
};

/// Both sides of the weighted estimate without the unknown constant. Space
/// integrals use the trapezoid rule over all nodes, time integrals the trapezoid
/// rule over levels.
CarlemanRatio carleman_ratio(const Grid& g, const CarlemanParams& p, const GeometrySpec& geom,
                             const AdjointTrajectory& tr, const CoefficientSet& c,
                             const std::vector<Face>& gamma0, double floor = 1e-300);

}  // namespace rswave
