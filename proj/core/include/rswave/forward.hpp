#pragma once

#include <optional>
#include <vector>

#include "rswave/coefficients.hpp"
#include "rswave/discrete_ops.hpp"
#include "rswave/grid.hpp"
#include "rswave/noise.hpp"

namespace rswave {

/// The three controls on a grid with K steps.
/// f, g: one full-grid field per step k (value on [t_k, t_{k+1}]), interior used.
/// h: one full-grid field per time level j = 0..K carrying boundary values on Γ0.
/// Empty vectors stand for zero controls.
struct ControlTriple {
    std::vector<Field> f;
    std::vector<Field> g;
    std::vector<Field> h;

    bool empty() const { return f.empty() && g.empty() && h.empty(); }
    /// Throws ConfigError on size mismatch or when h is nonzero off Γ0.
    void validate(const Grid& grid, const std::vector<Face>& gamma0) const;
};

struct ForwardState {
    Field y;
    Field yhat;
    int k = 0;
};

struct ForwardOptions {
    double blowup_cap = 1e12;
    /// Store every `stride`-th time level (the final level is always stored).
    int stride = 1;
};

struct ForwardTrajectory {
    std::vector<int> levels;
    std::vector<Field> y;
    std::vector<Field> yhat;

    const Field& final_y() const { return y.back(); }
    const Field& final_yhat() const { return yhat.back(); }
};

/// Path-wise solver of the controlled system. Midpoint: implicit midpoint in the
/// wave part (a1 included) with Euler-Maruyama noise. Leapfrog: Störmer-Verlet
/// kick-drift-kick with the same noise terms, subject to dt <= cfl * min h.
class ForwardSolver {
public:
    ForwardSolver(const Grid& grid, const CoefficientSet& coeffs, std::vector<Face> gamma0,
                  double cfl = 1.0);

    ForwardState initial_state(const Field& y0, const Field& yhat0, const ControlTriple& u) const;

    /// Advances one step; `dw` must come from an IncrementCursor so that the
    /// adaptedness contract is enforced.
    void step(ForwardState& s, const ControlTriple& u, IncrementCursor& dw) const;

    ForwardTrajectory solve(const Field& y0, const Field& yhat0, const ControlTriple& u,
                            const BrownianPath* path, const ForwardOptions& opt = {}) const;

    const Grid& grid() const { return *grid_; }
    const std::vector<Face>& gamma0() const { return gamma0_; }

private:
    Field apply_L(const Field& y, const Field& a1) const;
    Field coefficient(int i, double t) const;

    const Grid* grid_;
    const CoefficientSet* coeffs_;
    std::vector<Face> gamma0_;
    std::optional<ShiftedSolver> fixed_solver_;
};

struct WellposednessProbe {
    double ratio = 0.0;
    double lhs = 0.0;  ///< sup_t sqrt(E |y|_{L2}^2 + E |yhat|_{H^-1}^2)
    double rhs = 0.0;  ///< |y0| + |yhat0|_{H^-1} + |f| + |g|_{H^-1} + |h|_{L2(Σ0)}
    bool degenerate = false;
};

/// Ensemble estimate of the solution-to-data ratio of the well-posedness bound.
WellposednessProbe wellposedness_probe(const ForwardSolver& solver, const Field& y0,
                                       const Field& yhat0, const ControlTriple& u, int paths,
                                       std::uint64_t seed, int workers = 1, int stride = 1);

}  // namespace rswave
