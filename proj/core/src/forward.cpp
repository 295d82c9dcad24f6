#include "rswave/forward.hpp"

#include <cmath>
#include <string>

#include "rswave/error.hpp"
#include "rswave/parallel.hpp"

namespace rswave {

void ControlTriple::validate(const Grid& grid, const std::vector<Face>& gamma0) const {
    const auto K = static_cast<std::size_t>(grid.steps());
    if (!f.empty() && f.size() != K) throw ConfigError("control f needs one field per step");
    if (!g.empty() && g.size() != K) throw ConfigError("control g needs one field per step");
    if (!h.empty() && h.size() != K + 1) throw ConfigError("control h needs one field per time level");
    for (const auto& v : f)
        if (v.size() != grid.size()) throw ConfigError("control f field has the wrong size");
    for (const auto& v : g)
        if (v.size() != grid.size()) throw ConfigError("control g field has the wrong size");
    if (h.empty()) return;
    std::vector<unsigned char> allowed(grid.size(), 0);
    for (const Face& face : gamma0)
        for (const auto& fn : grid.face_nodes(face)) allowed[fn.boundary] = 1;
    for (const auto& v : h) {
        if (v.size() != grid.size()) throw ConfigError("control h field has the wrong size");
        for (std::size_t n = 0; n < v.size(); ++n)
            if (v[n] != 0.0 && !allowed[n])
                throw ConfigError("control h is nonzero off Γ0 at node " + std::to_string(n));
    }
}

ForwardSolver::ForwardSolver(const Grid& grid, const CoefficientSet& coeffs,
                             std::vector<Face> gamma0, double cfl)
    : grid_(&grid), coeffs_(&coeffs), gamma0_(std::move(gamma0)) {
    coeffs.validate(grid);
    if (grid.scheme() == Scheme::Leapfrog && grid.dt() > cfl * grid.min_h() * (1.0 + 1e-12))
        throw ConfigError("leapfrog needs dt <= cfl * min h (dt = " + std::to_string(grid.dt()) +
                          ", bound = " + std::to_string(cfl * grid.min_h()) + ")");
    if (grid.scheme() == Scheme::Midpoint && !coeffs.a1.time_dependent()) {
        const double c = grid.dt() * grid.dt() / 4.0;
        fixed_solver_.emplace(grid, c, coeffs.a1.is_zero() ? Field{} : coeffs.a1.sample(grid, 0.0));
    }
}

Field ForwardSolver::coefficient(int i, double t) const {
    const Coefficient& a = coeffs_->get(i);
    return a.is_zero() ? Field{} : a.sample(*grid_, t);
}

Field ForwardSolver::apply_L(const Field& y, const Field& a1) const {
    Field out = laplacian_apply(*grid_, y);
    if (!a1.empty())
        for (std::size_t n : grid_->interior()) out[n] += a1[n] * y[n];
    return out;
}

ForwardState ForwardSolver::initial_state(const Field& y0, const Field& yhat0,
                                          const ControlTriple& u) const {
    ForwardState s;
    s.y = y0.empty() ? grid_->zeros() : y0;
    s.yhat = yhat0.empty() ? grid_->zeros() : zero_boundary(*grid_, yhat0);
    if (s.y.size() != grid_->size() || s.yhat.size() != grid_->size())
        throw ConfigError("initial data has the wrong size");
    // Boundary rows of y carry the Dirichlet control.
    for (std::size_t n = 0; n < grid_->size(); ++n)
        if (grid_->is_boundary(n)) s.y[n] = u.h.empty() ? 0.0 : u.h[0][n];
    s.k = 0;
    return s;
}

void ForwardSolver::step(ForwardState& s, const ControlTriple& u, IncrementCursor& cursor) const {
    const Grid& g = *grid_;
    const int k = s.k;
    if (k >= g.steps()) throw ContractViolation("step beyond the final time level");
    const double dt = g.dt();
    const double tk = g.time(k), th = tk + dt / 2.0, tn = g.time(k + 1);
    const double dw = cursor.take(k);
    const auto& in = g.interior();

    const Field a2 = coefficient(2, tk), a3 = coefficient(3, tk);
    const Field a4 = coefficient(4, th), a5 = coefficient(5, th);
    const Field* f = u.f.empty() ? nullptr : &u.f[k];
    const Field* gc = u.g.empty() ? nullptr : &u.g[k];

    // Forcing increments of the displacement (Fy) and velocity (Fv) equations.
    Field Fy = g.zeros(), Fv = g.zeros();
    for (std::size_t n : in) {
        const double fv = f ? (*f)[n] : 0.0;
        const double gv = gc ? (*gc)[n] : 0.0;
        const double yk = s.y[n];
        Fy[n] = dt * (a5.empty() ? 0.0 : a5[n]) * fv + ((a3.empty() ? 0.0 : a3[n]) * yk + fv) * dw;
        Fv[n] = dt * (a4.empty() ? 0.0 : a4[n]) * gv + ((a2.empty() ? 0.0 : a2[n]) * yk + gv) * dw;
    }

    Field next_boundary = g.zeros();
    if (!u.h.empty())
        for (std::size_t n = 0; n < g.size(); ++n)
            if (g.is_boundary(n)) next_boundary[n] = u.h[k + 1][n];

    if (g.scheme() == Scheme::Midpoint) {
        const Field a1 = coefficient(1, th);
        const double c = dt * dt / 4.0;
        const Field Ly = apply_L(s.y, a1);
        const Field lift = laplacian_apply(g, next_boundary);
        Field rhs = g.zeros();
        for (std::size_t n : in)
            rhs[n] = s.y[n] + dt * s.yhat[n] + c * Ly[n] + c * lift[n] + 0.5 * dt * Fv[n] + Fy[n];
        std::optional<ShiftedSolver> local;
        const ShiftedSolver& solver = fixed_solver_ ? *fixed_solver_ : local.emplace(g, c, a1);
        Field ynew = solver.solve(rhs);
        for (std::size_t n = 0; n < g.size(); ++n)
            if (g.is_boundary(n)) ynew[n] = next_boundary[n];
        const Field Lyn = apply_L(ynew, a1);
        for (std::size_t n : in) s.yhat[n] += 0.5 * dt * (Ly[n] + Lyn[n]) + Fv[n];
        s.y = std::move(ynew);
    } else {
        const Field a1k = coefficient(1, tk), a1n = coefficient(1, tn);
        const Field Ly = apply_L(s.y, a1k);
        for (std::size_t n : in) s.yhat[n] += 0.5 * dt * Ly[n] + Fv[n];
        for (std::size_t n : in) s.y[n] += dt * s.yhat[n] + Fy[n];
        for (std::size_t n = 0; n < g.size(); ++n)
            if (g.is_boundary(n)) s.y[n] = next_boundary[n];
        const Field Lyn = apply_L(s.y, a1n);
        for (std::size_t n : in) s.yhat[n] += 0.5 * dt * Lyn[n];
    }
    s.k = k + 1;
}

ForwardTrajectory ForwardSolver::solve(const Field& y0, const Field& yhat0, const ControlTriple& u,
                                       const BrownianPath* path, const ForwardOptions& opt) const {
    u.validate(*grid_, gamma0_);
    if (coeffs_->random && !path)
        throw SolverError("random coefficients need a Brownian path");
    if (path && path->steps() < grid_->steps())
        throw ContractViolation("Brownian path shorter than the time grid");
    ForwardTrajectory traj;
    ForwardState s = initial_state(y0, yhat0, u);
    IncrementCursor cursor(path);
    const int stride = std::max(1, opt.stride);
    auto record = [&] {
        traj.levels.push_back(s.k);
        traj.y.push_back(s.y);
        traj.yhat.push_back(s.yhat);
    };
    record();
    for (int k = 0; k < grid_->steps(); ++k) {
        step(s, u, cursor);
        double m = 0.0;
        for (std::size_t n = 0; n < s.y.size(); ++n)
            m = std::max({m, std::abs(s.y[n]), std::abs(s.yhat[n])});
        if (!(m <= opt.blowup_cap))
            throw SolverError("forward solution exceeded the blow-up cap at step " + std::to_string(s.k));
        if (s.k % stride == 0 || s.k == grid_->steps()) record();
    }
    return traj;
}

WellposednessProbe wellposedness_probe(const ForwardSolver& solver, const Field& y0,
                                       const Field& yhat0, const ControlTriple& u, int paths,
                                       std::uint64_t seed, int workers, int stride) {
    const Grid& g = solver.grid();
    WellposednessProbe out;
    auto l2 = [&](const Field& v) { return v.empty() ? 0.0 : l2_norm(g, v); };
    auto hm1 = [&](const Field& v) { return v.empty() ? 0.0 : hm1_norm(g, v); };
    double f2 = 0.0, g2 = 0.0, h2 = 0.0;
    for (const auto& v : u.f) f2 += g.dt() * std::pow(l2(v), 2);
    for (const auto& v : u.g) g2 += g.dt() * std::pow(hm1(v), 2);
    for (std::size_t j = 0; j < u.h.size(); ++j) {
        const double w = (j == 0 || j + 1 == u.h.size()) ? 0.5 * g.dt() : g.dt();
        for (const Face& face : solver.gamma0())
            for (const auto& fn : g.face_nodes(face))
                h2 += w * g.face_weight(face) * u.h[j][fn.boundary] * u.h[j][fn.boundary];
    }
    out.rhs = l2(y0) + hm1(yhat0) + std::sqrt(f2) + std::sqrt(g2) + std::sqrt(h2);
    if (!(out.rhs > 1e-14)) {
        out.degenerate = true;
        return out;
    }

    const int M = std::max(1, paths);
    std::vector<std::vector<double>> energy(static_cast<std::size_t>(M));
    ForwardOptions opt;
    opt.stride = stride;
    parallel_for(static_cast<std::size_t>(M), workers, [&](std::size_t i) {
        const BrownianPath path = sample_path(path_seed(seed, i), g.dt(), g.steps());
        const ForwardTrajectory tr = solver.solve(y0, yhat0, u, &path, opt);
        auto& e = energy[i];
        for (std::size_t l = 0; l < tr.y.size(); ++l)
            e.push_back(std::pow(l2_norm(g, tr.y[l]), 2) + std::pow(hm1_norm(g, tr.yhat[l]), 2));
    });
    double sup = 0.0;
    for (std::size_t l = 0; l < energy[0].size(); ++l) {
        double mean = 0.0;
        for (const auto& e : energy) mean += e[l];
        sup = std::max(sup, mean / M);
    }
    out.lhs = std::sqrt(sup);
    out.ratio = out.lhs / out.rhs;
    return out;
}

}  // namespace rswave
