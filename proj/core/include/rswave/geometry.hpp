#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rswave/grid.hpp"

namespace rswave {

/// Box domain G = prod [lo_i, hi_i], observation point x0 outside closure(G),
/// kappa in (0, 1) and control horizon T.
struct GeometrySpec {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> x0;
    double kappa = 0.95;
    double T = 2.5;
    /// Points per axis of the dense search grid used for max/min over closure(G).
    int search_points = 0;  // 0: 1001 in 1D, 401 in 2D

    int dim() const { return static_cast<int>(lo.size()); }
    int resolved_search_points() const;

    /// Throws GeometryError unless the invariants hold.
    void validate() const;
};

struct ControlTimeReport {
    double R1 = 0.0;
    double Tstar = 0.0;
    double alpha = 0.0;
    std::vector<Face> gamma0;
};

ControlTimeReport compute_report(const GeometrySpec& geom);

/// Visits every point of the dense search grid over closure(G).
void for_each_search_point(const GeometrySpec& geom,
                           const std::function<void(std::span<const double>)>& fn);

/// True when face `f` lies in Γ0, i.e. (x - x0)·ν > 0 on it.
bool in_gamma0(const GeometrySpec& geom, const Face& f);

}  // namespace rswave
