#pragma once

#include <vector>

#include "rswave/adjoint.hpp"
#include "rswave/forward.hpp"
#include "rswave/grid.hpp"

namespace rswave {

struct ObservabilityReport {
    double T = 0.0;
    double lhs = 0.0;  ///< |zT|²_{H0¹} + |ẑT|²_{L²}
    ObservationTerms rhs;
    double ratio = 0.0;
    bool degenerate = false;
};

/// Solves the adjoint on the grid's horizon and compares terminal energy with
/// the observation terms.
ObservabilityReport observability_ratio(const Grid& grid, const CoefficientSet& coeffs,
                                        const std::vector<Face>& gamma0, const TerminalData& data,
                                        double floor = 1e-14);

struct ScanRow {
    double T = 0.0;
    double worst_ratio = 0.0;
    int worst_member = -1;  ///< index into the data family, -1 when every member is degenerate
    std::vector<double> ratios;  ///< per family member (infinity when degenerate)
};

/// For each horizon, the largest observability ratio over the data family. The
/// step count for horizon T is round(T / dt) with dt taken from `base`.
std::vector<ScanRow> tstar_scan(const Grid& base, const CoefficientSet& coeffs,
                                const std::vector<Face>& gamma0,
                                const std::vector<TerminalData>& family,
                                const std::vector<double>& T_grid, int workers = 1);

/// Adjoint data ξ = (zT, ẑT) or a Gramian output in the same layout.
struct DataPair {
    Field first;   ///< pairs with zT (H⁻¹ side for outputs)
    Field second;  ///< pairs with ẑT
};

double pair_inner(const Grid& g, const DataPair& a, const DataPair& b);

/// Controls synthesized from an adjoint trajectory:
/// f = -a5 ẑ, g = -Δ_h(a4 z), h = -∂z/∂ν on Γ0 (duality-consistent trace).
ControlTriple controls_from_adjoint(const Grid& g, const CoefficientSet& c,
                                    const std::vector<Face>& gamma0, const AdjointTrajectory& tr);

struct GramianApplication {
    ControlTriple controls;
    DataPair output;  ///< (ŷ(T), -y(T)) of the controlled run from zero data
    ObservationTerms observation;
};

GramianApplication apply_gramian(const Grid& g, const CoefficientSet& c,
                                 const std::vector<Face>& gamma0, const TerminalData& xi);

struct HumOptions {
    double tol = 1e-8;
    int max_iter = 200;
    bool filter = true;
    double filter_fraction = 0.6;
};

struct HumIteration {
    int iteration = 0;
    double residual = 0.0;        ///< relative (filtered) residual in the L²×H⁻¹ norm
    double terminal_error = 0.0;  ///< unfiltered terminal mismatch, L²×H⁻¹
};

struct HumResult {
    ControlTriple controls;
    double achieved_error = 0.0;     ///< terminal mismatch of the controlled run
    double uncontrolled_error = 0.0;  ///< mismatch without control
    int iterations = 0;
    bool converged = false;
    std::vector<HumIteration> log;
    Field y_final, yhat_final;
};

/// Terminal mismatch sqrt(|y - y1|²_{L²} + |ŷ - ŷ1|²_{H⁻¹}).
double terminal_mismatch(const Grid& g, const Field& y, const Field& yhat, const Field& y1,
                         const Field& yhat1);

/// Preconditioned conjugate residual on the (optionally filtered) Gramian.
/// `converged` is false when the iteration cap is reached first.
HumResult hum_solve(const Grid& g, const CoefficientSet& c, const std::vector<Face>& gamma0,
                    const Field& y0, const Field& yhat0, const Field& y1, const Field& yhat1,
                    const HumOptions& opt = {});

}  // namespace rswave
