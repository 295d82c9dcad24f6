#include "rswave/weights.hpp"

#include <algorithm>
#include <cmath>

#include "rswave/error.hpp"

namespace rswave {

namespace {
constexpr double kExpBudget = 700.0;
}

WeightSample eval_weight_point(const CarlemanParams& p, const GeometrySpec& geom, double t,
                               const double* x) {
    const int n = geom.dim();
    const double tau = t - geom.T / 2.0;
    const double ab = p.alpha * p.beta;
    const double E = std::exp(ab * tau * tau);

    WeightSample w;
    double spatial = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = x[i] - geom.x0[i];
        const double e = std::exp(p.beta * d * d);
        spatial += e;
        w.sigma_x[i] = 2.0 * p.beta * e * d;
        w.sigma_xx[i] = 2.0 * p.beta * e + 4.0 * p.beta * p.beta * e * d * d;
    }
    w.sigma = spatial - n * E;
    w.sigma_t = -2.0 * n * ab * E * tau;
    w.sigma_tt = -2.0 * n * ab * E - 4.0 * n * ab * ab * E * tau * tau;

    const double mu_sigma = p.mu * w.sigma;
    w.phi = std::exp(std::min(mu_sigma, kExpBudget));
    w.ell = p.lambda * w.phi;
    w.saturated = mu_sigma > kExpBudget || w.ell > kExpBudget;
    w.theta = w.saturated ? HUGE_VAL : std::exp(w.ell);

    const double lmp = p.lambda * p.mu * w.phi;
    w.ell_t = lmp * w.sigma_t;
    w.ell_tt = lmp * (w.sigma_tt + p.mu * w.sigma_t * w.sigma_t);
    for (int j = 0; j < n; ++j) {
        w.ell_x[j] = lmp * w.sigma_x[j];
        w.ell_tx[j] = lmp * p.mu * w.sigma_t * w.sigma_x[j];
        for (int k = 0; k < n; ++k)
            w.ell_xx[j][k] = lmp * ((j == k ? w.sigma_xx[j] : 0.0) + p.mu * w.sigma_x[j] * w.sigma_x[k]);
    }
    return w;
}

WeightField eval_weights(const CarlemanParams& p, const GeometrySpec& geom, const Grid& grid) {
    WeightField f;
    f.levels = grid.steps() + 1;
    f.nodes = grid.size();
    f.samples.resize(static_cast<std::size_t>(f.levels) * f.nodes);
    for (int k = 0; k < f.levels; ++k) {
        const double t = grid.time(k);
        for (std::size_t node = 0; node < f.nodes; ++node) {
            const auto x = grid.point(node);
            auto& s = f.samples[k * f.nodes + node];
            s = eval_weight_point(p, geom, t, x.data());
            if (s.saturated) f.saturated.emplace_back(k, node);
        }
    }
    return f;
}

double smoothstep(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep_d1(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double v = u * (1.0 - u);
    return 30.0 * v * v;
}

double smoothstep_d2(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
}

CutoffSample eval_cutoff_point(const CarlemanParams& p, const GeometrySpec& geom,
                               const WeightSample& w) {
    const int n = geom.dim();
    const double u = (w.sigma - p.c1) / p.delta;
    const double s1 = smoothstep_d1(u) / p.delta;
    const double s2 = smoothstep_d2(u) / (p.delta * p.delta);
    CutoffSample c;
    c.chi = smoothstep(u);
    c.chi_t = s1 * w.sigma_t;
    c.chi_tt = s2 * w.sigma_t * w.sigma_t + s1 * w.sigma_tt;
    double theta = c.chi_t * c.chi_t;
    for (int j = 0; j < n; ++j) {
        c.chi_x[j] = s1 * w.sigma_x[j];
        c.chi_tx[j] = s2 * w.sigma_t * w.sigma_x[j];
        theta += c.chi_x[j] * c.chi_x[j];
        for (int k = 0; k < n; ++k) {
            c.chi_xx[j][k] = s2 * w.sigma_x[j] * w.sigma_x[k] + (j == k ? s1 * w.sigma_xx[j] : 0.0);
            theta += c.chi_xx[j][k] * c.chi_xx[j][k];
        }
    }
    c.Theta = theta;
    return c;
}

CutoffFunction build_cutoff(const CarlemanParams& p, const GeometrySpec& geom, const Grid& grid) {
    if (!(p.delta > 0.0)) throw ConditionError("cut-off needs delta > 0");
    CutoffFunction f;
    f.levels = grid.steps() + 1;
    f.nodes = grid.size();
    f.samples.resize(static_cast<std::size_t>(f.levels) * f.nodes);
    bool plateau = false;
    for (int k = 0; k < f.levels; ++k) {
        const double t = grid.time(k);
        for (std::size_t node = 0; node < f.nodes; ++node) {
            const auto x = grid.point(node);
            const WeightSample w = eval_weight_point(p, geom, t, x.data());
            f.samples[k * f.nodes + node] = eval_cutoff_point(p, geom, w);
            plateau = plateau || w.sigma > p.c1 + p.delta;
        }
    }
    if (!plateau) throw ConditionError("Q(c1 + delta) contains no grid node; refine the grid or shrink delta");
    return f;
}

}  // namespace rswave
