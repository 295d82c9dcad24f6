#pragma once

#include <optional>
#include <vector>

#include "rswave/coefficients.hpp"
#include "rswave/discrete_ops.hpp"
#include "rswave/forward.hpp"
#include "rswave/grid.hpp"

namespace rswave {

struct TerminalData {
    Field zT;
    Field zhatT;
};

/// Backward solution with deterministic data; the martingale parts Z and Ẑ
/// vanish identically in this regime and are not stored.
struct AdjointTrajectory {
    int tau_level = 0;
    std::vector<Field> z;     ///< levels 0..tau
    std::vector<Field> zhat;  ///< levels 0..tau
    /// States that pair with the forcing of step k (k = 0..tau-1): midpoint
    /// averages for the midpoint scheme, (z^k, ẑ^{k+1/2}) for leapfrog.
    std::vector<Field> z_pair;
    std::vector<Field> zhat_pair;
    std::vector<Face> faces;  ///< every face of the box, in Grid::faces() order
    /// Second-order outward normal derivative: trace[level][face][node].
    std::vector<std::vector<std::vector<double>>> trace;
    /// Normal derivative consistent with the discrete duality: same layout.
    std::vector<std::vector<std::vector<double>>> dual_trace;

    std::size_t face_index(const Face& f) const;
};

class AdjointSolver {
public:
    /// Throws SolverError for random coefficient sets (unsupported mode).
    AdjointSolver(const Grid& grid, const CoefficientSet& coeffs);

    /// Integrates backward from level tau (default: final level).
    AdjointTrajectory solve(const TerminalData& data, std::optional<int> tau_level = {}) const;

    const Grid& grid() const { return *grid_; }

private:
    Field apply_L(const Field& z, const Field& a1) const;
    Field coefficient(int i, double t) const;

    const Grid* grid_;
    const CoefficientSet* coeffs_;
    std::optional<ShiftedSolver> fixed_solver_;
};

/// a4 z + Z (Z = 0) at a pairing step, with a4 at the step midpoint.
Field combo_a4z(const Grid& g, const CoefficientSet& c, const AdjointTrajectory& tr, int k);
/// a5 ẑ + Ẑ (Ẑ = 0) at a pairing step.
Field combo_a5zhat(const Grid& g, const CoefficientSet& c, const AdjointTrajectory& tr, int k);

/// Observation terms of the observability inequality, per step, in the form
/// that makes the discrete duality exact.
struct ObservationTerms {
    double trace = 0.0;   ///< Σ_j dt_j Σ_Γ0 h_tan D̃²
    double a4z = 0.0;     ///< Σ_k dt |a4 z|²_{H0¹}
    double a5zhat = 0.0;  ///< Σ_k dt |a5 ẑ|²_{L²}
    double total() const { return trace + a4z + a5zhat; }
};

ObservationTerms observation_terms(const Grid& g, const CoefficientSet& c,
                                   const AdjointTrajectory& tr, const std::vector<Face>& gamma0);

/// sqrt of the time-trapezoid integral of the squared second-order trace over the
/// given faces (all faces when `faces` is empty).
double hidden_regularity_norm(const Grid& g, const AdjointTrajectory& tr,
                              const std::vector<Face>& faces = {});

struct TranspositionResult {
    double lhs = 0.0;
    double lhs_ci = 0.0;  ///< Monte Carlo half-width (0 for a single deterministic path)
    double rhs = 0.0;
    double residual = 0.0;
    bool degenerate = false;
};

/// Both sides of the transposition identity. `y_tau`/`yhat_tau` hold the forward
/// state at level tau for each Monte Carlo path (one entry when deterministic).
/// The right side uses midpoint-in-time pairings of f and g and the trapezoid
/// rule with the second-order trace for h.
TranspositionResult transposition_residual(const Grid& g, const CoefficientSet& c,
                                           const std::vector<Face>& gamma0, const Field& y0,
                                           const Field& yhat0, const std::vector<Field>& y_tau,
                                           const std::vector<Field>& yhat_tau,
                                           const AdjointTrajectory& adj, const ControlTriple& u,
                                           double floor = 1e-14);

struct EnergyReport {
    bool forward_bound_ok = true;
    bool backward_bound_ok = true;
    double fitted_C = 0.0;
    double max_relative_drift = 0.0;  ///< max_k |E_k - E_tau| / E_tau
    std::vector<double> energy;       ///< |∇z|² + |ẑ|² per level
};

/// Two-sided Gronwall check E(τ) <= e^{C(r2+1)T}(E(t) + obs(t, τ)) and
/// E(τ) >= e^{-C(r2+1)T} E(t), reporting the smallest C that works at every level.
EnergyReport energy_check(const Grid& g, const CoefficientSet& c, const AdjointTrajectory& tr,
                          const std::vector<Face>& gamma0, double r2);

}  // namespace rswave
