#include "rswave/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rswave/error.hpp"

namespace rswave {

int GeometrySpec::resolved_search_points() const {
    if (search_points > 1) return search_points;
    return dim() == 1 ? 1001 : 401;
}

void GeometrySpec::validate() const {
    const auto n = lo.size();
    if (n < 1 || n > 2) throw GeometryError("dimension must be 1 or 2");
    if (hi.size() != n || x0.size() != n)
        throw GeometryError("lo, hi and x0 must have the same dimension");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(hi[i] > lo[i])) throw GeometryError("degenerate box along axis " + std::to_string(i));
        // |x_i - x0_i| must stay positive on closure(G) for every axis.
        if (x0[i] >= lo[i] && x0[i] <= hi[i])
            throw GeometryError("x0 coordinate " + std::to_string(i) +
                                " lies within the box extent; every |x_i - x0_i| must be positive");
    }
    if (!(kappa > 0.0 && kappa < 1.0)) throw GeometryError("kappa must lie in (0, 1)");
    if (!(T > 0.0)) throw GeometryError("T must be positive");
}

void for_each_search_point(const GeometrySpec& geom,
                           const std::function<void(std::span<const double>)>& fn) {
    const int m = geom.resolved_search_points();
    auto coord = [&](int axis, int i) {
        return geom.lo[axis] + (geom.hi[axis] - geom.lo[axis]) * i / (m - 1);
    };
    double p[2] = {0.0, 0.0};
    if (geom.dim() == 1) {
        for (int i = 0; i < m; ++i) {
            p[0] = coord(0, i);
            fn(std::span<const double>(p, 1));
        }
        return;
    }
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            p[0] = coord(0, i);
            p[1] = coord(1, j);
            fn(std::span<const double>(p, 2));
        }
}

bool in_gamma0(const GeometrySpec& geom, const Face& f) {
    const double wall = f.side == Side::High ? geom.hi[f.axis] : geom.lo[f.axis];
    const double normal = f.side == Side::High ? 1.0 : -1.0;
    return (wall - geom.x0[f.axis]) * normal > 0.0;
}

ControlTimeReport compute_report(const GeometrySpec& geom) {
    geom.validate();
    const int n = geom.dim();
    double r1 = 0.0;
    double worst_ratio = 0.0;
    double best_ratio = std::numeric_limits<double>::infinity();
    for_each_search_point(geom, [&](std::span<const double> x) {
        double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double d2 = (x[i] - geom.x0[i]) * (x[i] - geom.x0[i]);
            dmax = std::max(dmax, d2);
            dmin = std::min(dmin, d2);
        }
        r1 = std::max(r1, std::sqrt(dmax));
        worst_ratio = std::max(worst_ratio, dmax / dmin);
        best_ratio = std::min(best_ratio, dmin / dmax);
    });

    ControlTimeReport rep;
    rep.R1 = r1;
    // For n = 1 the ratio is identically one; skip the rounding of the sqrt.
    rep.Tstar = n == 1 ? 2.0 * r1 : 2.0 * std::sqrt(static_cast<double>(n)) * r1 * std::sqrt(worst_ratio);
    rep.alpha = geom.kappa * geom.kappa / n * (n == 1 ? 1.0 : best_ratio);
    for (int a = 0; a < n; ++a)
        for (Side s : {Side::Low, Side::High})
            if (in_gamma0(geom, {a, s})) rep.gamma0.push_back({a, s});
    return rep;
}

}  // namespace rswave
