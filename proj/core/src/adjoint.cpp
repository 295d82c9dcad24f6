#include "rswave/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rswave/error.hpp"
#include "rswave/noise.hpp"

namespace rswave {

std::size_t AdjointTrajectory::face_index(const Face& f) const {
    for (std::size_t i = 0; i < faces.size(); ++i)
        if (faces[i] == f) return i;
    throw ContractViolation("face not present in the trajectory");
}

AdjointSolver::AdjointSolver(const Grid& grid, const CoefficientSet& coeffs)
    : grid_(&grid), coeffs_(&coeffs) {
    if (coeffs.random)
        throw SolverError(
            "adjoint solver supports deterministic coefficients only (Z = Ẑ = 0 regime); "
            "random coefficients need a martingale-representation solver");
    coeffs.validate(grid);
    if (grid.scheme() == Scheme::Midpoint && !coeffs.a1.time_dependent()) {
        const double c = grid.dt() * grid.dt() / 4.0;
        fixed_solver_.emplace(grid, c, coeffs.a1.is_zero() ? Field{} : coeffs.a1.sample(grid, 0.0));
    }
}

Field AdjointSolver::coefficient(int i, double t) const {
    const Coefficient& a = coeffs_->get(i);
    return a.is_zero() ? Field{} : a.sample(*grid_, t);
}

Field AdjointSolver::apply_L(const Field& z, const Field& a1) const {
    Field out = laplacian_apply(*grid_, z);
    if (!a1.empty())
        for (std::size_t n : grid_->interior()) out[n] += a1[n] * z[n];
    return out;
}

AdjointTrajectory AdjointSolver::solve(const TerminalData& data, std::optional<int> tau_level) const {
    const Grid& g = *grid_;
    const int tau = tau_level.value_or(g.steps());
    if (tau < 1 || tau > g.steps()) throw ContractViolation("tau must be a time level in 1..K");
    const double dt = g.dt();
    const auto& in = g.interior();

    AdjointTrajectory tr;
    tr.tau_level = tau;
    tr.z.assign(static_cast<std::size_t>(tau + 1), Field{});
    tr.zhat.assign(static_cast<std::size_t>(tau + 1), Field{});
    tr.z_pair.assign(static_cast<std::size_t>(tau), Field{});
    tr.zhat_pair.assign(static_cast<std::size_t>(tau), Field{});
    tr.z[tau] = data.zT.empty() ? g.zeros() : zero_boundary(g, data.zT);
    tr.zhat[tau] = data.zhatT.empty() ? g.zeros() : zero_boundary(g, data.zhatT);

    for (int k = tau - 1; k >= 0; --k) {
        const Field& zn = tr.z[k + 1];
        const Field& zhn = tr.zhat[k + 1];
        Field z = g.zeros(), zh = g.zeros();
        if (g.scheme() == Scheme::Midpoint) {
            const double th = g.time(k) + dt / 2.0;
            const Field a1 = coefficient(1, th);
            const double c = dt * dt / 4.0;
            const Field Lzn = apply_L(zn, a1);
            Field rhs = g.zeros();
            for (std::size_t n : in) rhs[n] = zn[n] - dt * zhn[n] + c * Lzn[n];
            std::optional<ShiftedSolver> local;
            const ShiftedSolver& solver = fixed_solver_ ? *fixed_solver_ : local.emplace(g, c, a1);
            z = solver.solve(rhs);
            const Field Lz = apply_L(z, a1);
            for (std::size_t n : in) zh[n] = zhn[n] - 0.5 * dt * (Lz[n] + Lzn[n]);
            Field zp = g.zeros(), zhp = g.zeros();
            for (std::size_t n : in) {
                zp[n] = 0.5 * (z[n] + zn[n]);
                zhp[n] = 0.5 * (zh[n] + zhn[n]);
            }
            tr.z_pair[k] = std::move(zp);
            tr.zhat_pair[k] = std::move(zhp);
        } else {
            const Field a1k = coefficient(1, g.time(k)), a1n = coefficient(1, g.time(k + 1));
            const Field Lzn = apply_L(zn, a1n);
            Field mid = g.zeros();
            for (std::size_t n : in) mid[n] = zhn[n] - 0.5 * dt * Lzn[n];
            for (std::size_t n : in) z[n] = zn[n] - dt * mid[n];
            const Field Lz = apply_L(z, a1k);
            for (std::size_t n : in) zh[n] = mid[n] - 0.5 * dt * Lz[n];
            tr.z_pair[k] = z;
            tr.zhat_pair[k] = std::move(mid);
        }
        tr.z[k] = std::move(z);
        tr.zhat[k] = std::move(zh);
    }

    tr.faces = g.faces();
    const std::size_t nf = tr.faces.size();
    tr.trace.assign(static_cast<std::size_t>(tau + 1), std::vector<std::vector<double>>(nf));
    tr.dual_trace.assign(static_cast<std::size_t>(tau + 1), std::vector<std::vector<double>>(nf));
    for (int j = 0; j <= tau; ++j)
        for (std::size_t f = 0; f < nf; ++f) tr.trace[j][f] = normal_trace(g, tr.z[j], tr.faces[f]);

    // D = -z_adjacent / h_n reproduces the boundary lifting of the discrete Laplacian.
    auto first_order = [&](const Field& z, const Face& face) {
        const auto& nodes = g.face_nodes(face);
        std::vector<double> d(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) d[i] = -z[nodes[i].first] / g.face_spacing(face);
        return d;
    };
    for (std::size_t f = 0; f < nf; ++f) {
        const Face& face = tr.faces[f];
        if (g.scheme() == Scheme::Leapfrog) {
            for (int j = 0; j <= tau; ++j) tr.dual_trace[j][f] = first_order(tr.z[j], face);
            continue;
        }
        std::vector<std::vector<double>> half(static_cast<std::size_t>(tau));
        for (int k = 0; k < tau; ++k) half[k] = first_order(tr.z_pair[k], face);
        for (int j = 0; j <= tau; ++j) {
            if (j == 0) tr.dual_trace[j][f] = half[0];
            else if (j == tau) tr.dual_trace[j][f] = half[tau - 1];
            else {
                std::vector<double> d(half[j].size());
                for (std::size_t i = 0; i < d.size(); ++i) d[i] = 0.5 * (half[j - 1][i] + half[j][i]);
                tr.dual_trace[j][f] = std::move(d);
            }
        }
    }
    return tr;
}

namespace {

Field times(const Field& a, const Field& b) {
    Field out(b.size(), 0.0);
    if (a.empty()) return out;
    for (std::size_t n = 0; n < b.size(); ++n) out[n] = a[n] * b[n];
    return out;
}

double step_time_weight(int j, int tau, double dt) { return (j == 0 || j == tau) ? 0.5 * dt : dt; }

}  // namespace

Field combo_a4z(const Grid& g, const CoefficientSet& c, const AdjointTrajectory& tr, int k) {
    if (c.a4.is_zero()) return g.zeros();
    return times(c.a4.sample(g, g.time(k) + 0.5 * g.dt()), tr.z_pair[k]);
}

Field combo_a5zhat(const Grid& g, const CoefficientSet& c, const AdjointTrajectory& tr, int k) {
    if (c.a5.is_zero()) return g.zeros();
    return times(c.a5.sample(g, g.time(k) + 0.5 * g.dt()), tr.zhat_pair[k]);
}

ObservationTerms observation_terms(const Grid& g, const CoefficientSet& c,
                                   const AdjointTrajectory& tr, const std::vector<Face>& gamma0) {
    ObservationTerms o;
    const double dt = g.dt();
    for (int k = 0; k < tr.tau_level; ++k) {
        if (!c.a4.is_zero()) o.a4z += dt * std::pow(h01_norm(g, combo_a4z(g, c, tr, k)), 2);
        if (!c.a5.is_zero()) o.a5zhat += dt * std::pow(l2_norm(g, combo_a5zhat(g, c, tr, k)), 2);
    }
    for (const Face& face : gamma0) {
        const std::size_t f = tr.face_index(face);
        const double w = g.face_weight(face);
        for (int j = 0; j <= tr.tau_level; ++j) {
            double s = 0.0;
            for (double d : tr.dual_trace[j][f]) s += d * d;
            o.trace += step_time_weight(j, tr.tau_level, dt) * w * s;
        }
    }
    return o;
}

double hidden_regularity_norm(const Grid& g, const AdjointTrajectory& tr, const std::vector<Face>& faces) {
    const std::vector<Face> use = faces.empty() ? tr.faces : faces;
    double s = 0.0;
    for (const Face& face : use) {
        const std::size_t f = tr.face_index(face);
        const double w = g.face_weight(face);
        for (int j = 0; j <= tr.tau_level; ++j) {
            double q = 0.0;
            for (double d : tr.trace[j][f]) q += d * d;
            s += step_time_weight(j, tr.tau_level, g.dt()) * w * q;
        }
    }
    return std::sqrt(s);
}

TranspositionResult transposition_residual(const Grid& g, const CoefficientSet& c,
                                           const std::vector<Face>& gamma0, const Field& y0,
                                           const Field& yhat0, const std::vector<Field>& y_tau,
                                           const std::vector<Field>& yhat_tau,
                                           const AdjointTrajectory& adj, const ControlTriple& u,
                                           double floor) {
    if (y_tau.empty() || y_tau.size() != yhat_tau.size())
        throw ContractViolation("transposition_residual needs matching forward states");
    const int tau = adj.tau_level;
    const double dt = g.dt();
    const Field& zT = adj.z[tau];
    const Field& zhT = adj.zhat[tau];
    const double initial = -(yhat0.empty() ? 0.0 : inner(g, yhat0, adj.z[0])) +
                           (y0.empty() ? 0.0 : inner(g, y0, adj.zhat[0]));

    TranspositionResult r;
    if (y_tau.size() == 1) {
        r.lhs = inner(g, yhat_tau[0], zT) - inner(g, y_tau[0], zhT) + initial;
    } else {
        RunningStats s;
        for (std::size_t p = 0; p < y_tau.size(); ++p)
            s.add(inner(g, yhat_tau[p], zT) - inner(g, y_tau[p], zhT) + initial);
        const McEstimate e = to_estimate(s);
        r.lhs = e.mean;
        r.lhs_ci = e.ci_halfwidth;
    }

    double rhs = 0.0;
    for (int k = 0; k < tau; ++k) {
        const double th = g.time(k) + 0.5 * dt;
        Field zm = g.zeros(), zhm = g.zeros();
        for (std::size_t n : g.interior()) {
            zm[n] = 0.5 * (adj.z[k][n] + adj.z[k + 1][n]);
            zhm[n] = 0.5 * (adj.zhat[k][n] + adj.zhat[k + 1][n]);
        }
        if (!u.f.empty() && !c.a5.is_zero()) rhs -= dt * inner(g, u.f[k], times(c.a5.sample(g, th), zhm));
        if (!u.g.empty() && !c.a4.is_zero()) rhs += dt * inner(g, u.g[k], times(c.a4.sample(g, th), zm));
    }
    if (!u.h.empty()) {
        for (const Face& face : gamma0) {
            const std::size_t f = adj.face_index(face);
            const auto& nodes = g.face_nodes(face);
            const double w = g.face_weight(face);
            for (int j = 0; j <= tau; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < nodes.size(); ++i) s += u.h[j][nodes[i].boundary] * adj.trace[j][f][i];
                rhs -= step_time_weight(j, tau, dt) * w * s;
            }
        }
    }
    r.rhs = rhs;
    const double scale = std::max({std::abs(r.lhs), std::abs(r.rhs), floor});
    r.degenerate = scale <= floor;
    r.residual = r.degenerate ? 0.0 : std::abs(r.lhs - r.rhs) / scale;
    return r;
}

EnergyReport energy_check(const Grid& g, const CoefficientSet& c, const AdjointTrajectory& tr,
                          const std::vector<Face>& gamma0, double r2) {
    EnergyReport rep;
    const int tau = tr.tau_level;
    const double dt = g.dt();
    rep.energy.resize(static_cast<std::size_t>(tau + 1));
    for (int k = 0; k <= tau; ++k)
        rep.energy[k] = std::pow(h01_norm(g, tr.z[k]), 2) + std::pow(l2_norm(g, tr.zhat[k]), 2);

    // Observation integral over [t_k, τ], accumulated backward.
    std::vector<double> obs(static_cast<std::size_t>(tau + 1), 0.0);
    std::vector<double> trace_sq(static_cast<std::size_t>(tau + 1), 0.0);
    for (const Face& face : gamma0) {
        const std::size_t f = tr.face_index(face);
        for (int j = 0; j <= tau; ++j) {
            double s = 0.0;
            for (double d : tr.dual_trace[j][f]) s += d * d;
            trace_sq[j] += g.face_weight(face) * s;
        }
    }
    for (int k = tau - 1; k >= 0; --k) {
        double step = 0.5 * dt * (trace_sq[k] + trace_sq[k + 1]);
        if (!c.a4.is_zero()) step += dt * std::pow(h01_norm(g, combo_a4z(g, c, tr, k)), 2);
        if (!c.a5.is_zero()) step += dt * std::pow(l2_norm(g, combo_a5zhat(g, c, tr, k)), 2);
        obs[k] = obs[k + 1] + step;
    }

    const double ET = rep.energy[tau];
    if (!(ET > 0.0)) return rep;  // zero data: both bounds hold vacuously
    const double scale = (r2 + 1.0) * g.time(tau);
    double C = 0.0;
    for (int k = 0; k <= tau; ++k) {
        const double Ek = rep.energy[k];
        rep.max_relative_drift = std::max(rep.max_relative_drift, std::abs(Ek - ET) / ET);
        if (Ek + obs[k] > 0.0) C = std::max(C, std::log(ET / (Ek + obs[k])) / scale);
        if (Ek > 0.0) C = std::max(C, std::log(Ek / ET) / scale);
        else C = std::numeric_limits<double>::infinity();
    }
    rep.fitted_C = C;
    const double grow = std::exp(C * scale) * (1.0 + 1e-12);
    for (int k = 0; k <= tau; ++k) {
        const double Ek = rep.energy[k];
        if (!(ET <= grow * (Ek + obs[k]))) rep.forward_bound_ok = false;
        if (!(ET * grow >= Ek)) rep.backward_bound_ok = false;
    }
    if (!std::isfinite(C)) rep.forward_bound_ok = rep.backward_bound_ok = false;
    return rep;
}

}  // namespace rswave
