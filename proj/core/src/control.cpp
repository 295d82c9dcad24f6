#include "rswave/control.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "rswave/error.hpp"
#include "rswave/parallel.hpp"
#include "rswave/spectral_filter.hpp"

namespace rswave {

ObservabilityReport observability_ratio(const Grid& grid, const CoefficientSet& coeffs,
                                        const std::vector<Face>& gamma0, const TerminalData& data,
                                        double floor) {
    ObservabilityReport rep;
    rep.T = grid.T();
    const AdjointSolver solver(grid, coeffs);
    const AdjointTrajectory tr = solver.solve(data);
    rep.lhs = std::pow(h01_norm(grid, tr.z.back()), 2) + std::pow(l2_norm(grid, tr.zhat.back()), 2);
    rep.rhs = observation_terms(grid, coeffs, tr, gamma0);
    rep.degenerate = !(rep.rhs.total() > floor);
    rep.ratio = rep.degenerate ? std::numeric_limits<double>::infinity() : rep.lhs / rep.rhs.total();
    return rep;
}

std::vector<ScanRow> tstar_scan(const Grid& base, const CoefficientSet& coeffs,
                                const std::vector<Face>& gamma0,
                                const std::vector<TerminalData>& family,
                                const std::vector<double>& T_grid, int workers) {
    std::vector<ScanRow> rows(T_grid.size());
    parallel_for(T_grid.size(), workers, [&](std::size_t i) {
        const double T = T_grid[i];
        const int steps = std::max(1, static_cast<int>(std::lround(T / base.dt())));
        const Grid g = base.with_horizon(T, steps);
        ScanRow row;
        row.T = T;
        for (std::size_t m = 0; m < family.size(); ++m) {
            const ObservabilityReport rep = observability_ratio(g, coeffs, gamma0, family[m]);
            row.ratios.push_back(rep.ratio);
            if (rep.degenerate || rep.lhs == 0.0) continue;
            if (row.worst_member < 0 || rep.ratio > row.worst_ratio) {
                row.worst_ratio = rep.ratio;
                row.worst_member = static_cast<int>(m);
            }
        }
        rows[i] = std::move(row);
    });
    return rows;
}

double pair_inner(const Grid& g, const DataPair& a, const DataPair& b) {
    return inner(g, a.first, b.first) + inner(g, a.second, b.second);
}

ControlTriple controls_from_adjoint(const Grid& g, const CoefficientSet& c,
                                    const std::vector<Face>& gamma0, const AdjointTrajectory& tr) {
    ControlTriple u;
    const int K = tr.tau_level;
    if (!c.a5.is_zero()) {
        u.f.resize(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            Field v = combo_a5zhat(g, c, tr, k);
            for (double& x : v) x = -x;
            u.f[k] = std::move(v);
        }
    }
    if (!c.a4.is_zero()) {
        u.g.resize(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            Field v = laplacian_apply(g, combo_a4z(g, c, tr, k));
            u.g[k] = std::move(v);  // -(-Δ_h) (a4 z) pairs as the H0¹ product
            for (double& x : u.g[k]) x = -x;
        }
    }
    if (!gamma0.empty()) {
        u.h.assign(static_cast<std::size_t>(K + 1), g.zeros());
        for (const Face& face : gamma0) {
            const std::size_t f = tr.face_index(face);
            const auto& nodes = g.face_nodes(face);
            for (int j = 0; j <= K; ++j)
                for (std::size_t i = 0; i < nodes.size(); ++i) u.h[j][nodes[i].boundary] = -tr.dual_trace[j][f][i];
        }
    }
    return u;
}

GramianApplication apply_gramian(const Grid& g, const CoefficientSet& c,
                                 const std::vector<Face>& gamma0, const TerminalData& xi) {
    const AdjointSolver adj(g, c);
    const AdjointTrajectory tr = adj.solve(xi);
    GramianApplication out;
    out.controls = controls_from_adjoint(g, c, gamma0, tr);
    out.observation = observation_terms(g, c, tr, gamma0);
    const ForwardSolver fwd(g, c, gamma0);
    ForwardOptions opt;
    opt.stride = g.steps();
    const ForwardTrajectory ft = fwd.solve(Field{}, Field{}, out.controls, nullptr, opt);
    out.output.first = zero_boundary(g, ft.final_yhat());
    out.output.second = zero_boundary(g, ft.final_y());
    for (double& v : out.output.second) v = -v;
    return out;
}

double terminal_mismatch(const Grid& g, const Field& y, const Field& yhat, const Field& y1,
                         const Field& yhat1) {
    Field dy = g.zeros(), dv = g.zeros();
    for (std::size_t n : g.interior()) {
        dy[n] = y[n] - (y1.empty() ? 0.0 : y1[n]);
        dv[n] = yhat[n] - (yhat1.empty() ? 0.0 : yhat1[n]);
    }
    return std::sqrt(std::pow(l2_norm(g, dy), 2) + std::pow(hm1_norm(g, dv), 2));
}

namespace {

struct PairOps {
    const Grid& g;
    const std::optional<SpectralFilter>& filter;

    DataPair precondition(const DataPair& r) const {
        return {poisson_solve(g, r.first), zero_boundary(g, r.second)};
    }
    DataPair project(const DataPair& r) const {
        if (!filter) return {zero_boundary(g, r.first), zero_boundary(g, r.second)};
        return {filter->apply(r.first), filter->apply(r.second)};
    }
    static void axpy(DataPair& y, double a, const DataPair& x) {
        for (std::size_t n = 0; n < y.first.size(); ++n) {
            y.first[n] += a * x.first[n];
            y.second[n] += a * x.second[n];
        }
    }
    static DataPair combine(const DataPair& x, double b, const DataPair& y) {
        DataPair out = x;
        axpy(out, b, y);
        return out;
    }
};

}  // namespace

HumResult hum_solve(const Grid& g, const CoefficientSet& c, const std::vector<Face>& gamma0,
                    const Field& y0, const Field& yhat0, const Field& y1, const Field& yhat1,
                    const HumOptions& opt) {
    HumResult res;
    const ForwardSolver fwd(g, c, gamma0);
    ForwardOptions fo;
    fo.stride = g.steps();
    const ForwardTrajectory free_run = fwd.solve(y0, yhat0, ControlTriple{}, nullptr, fo);
    res.uncontrolled_error = terminal_mismatch(g, free_run.final_y(), free_run.final_yhat(), y1, yhat1);

    // b = (ŷ1 - ŷ_free(T), -(y1 - y_free(T))) so that Gξ = b steers the state onto the target.
    DataPair b{g.zeros(), g.zeros()};
    for (std::size_t n : g.interior()) {
        b.first[n] = (yhat1.empty() ? 0.0 : yhat1[n]) - free_run.final_yhat()[n];
        b.second[n] = -((y1.empty() ? 0.0 : y1[n]) - free_run.final_y()[n]);
    }

    std::optional<SpectralFilter> filter;
    if (opt.filter) filter.emplace(g, opt.filter_fraction);
    const PairOps ops{g, filter};
    auto gram = [&](const DataPair& xi) {
        return apply_gramian(g, c, gamma0, {xi.first, xi.second}).output;
    };
    auto mnorm = [&](const DataPair& r) { return std::sqrt(std::max(0.0, pair_inner(g, r, ops.precondition(r)))); };

    DataPair x{g.zeros(), g.zeros()};
    DataPair r = ops.project(b);
    DataPair r_full = b;
    const double bnorm = mnorm(r);
    const double b_full = mnorm(b);
    if (!(b_full > 0.0)) {
        res.converged = true;
        res.y_final = free_run.final_y();
        res.yhat_final = free_run.final_yhat();
        res.achieved_error = res.uncontrolled_error;
        return res;
    }

    DataPair z = ops.precondition(r);
    DataPair Gz = gram(z);
    DataPair w = ops.project(Gz);
    DataPair p = z, q = w, q_full = Gz;
    double rho = pair_inner(g, z, w);

    int it = 0;
    bool converged = !(bnorm > 0.0);
    while (!converged && it < opt.max_iter) {
        ++it;
        const DataPair Mq = ops.precondition(q);
        const double qMq = pair_inner(g, q, Mq);
        if (!(qMq > 0.0)) break;
        const double alpha = rho / qMq;
        PairOps::axpy(x, alpha, p);
        PairOps::axpy(r, -alpha, q);
        PairOps::axpy(r_full, -alpha, q_full);
        PairOps::axpy(z, -alpha, Mq);
        const double rel = std::sqrt(std::max(0.0, pair_inner(g, r, z))) / bnorm;
        res.log.push_back({it, rel, mnorm(r_full)});
        if (rel <= opt.tol) {
            converged = true;
            break;
        }
        Gz = gram(z);
        w = ops.project(Gz);
        const double rho_new = pair_inner(g, z, w);
        const double beta = rho_new / rho;
        rho = rho_new;
        p = PairOps::combine(z, beta, p);
        q = PairOps::combine(w, beta, q);
        q_full = PairOps::combine(Gz, beta, q_full);
    }

    res.iterations = it;
    res.converged = converged;
    const AdjointTrajectory tr = AdjointSolver(g, c).solve({x.first, x.second});
    res.controls = controls_from_adjoint(g, c, gamma0, tr);
    const ForwardTrajectory run = fwd.solve(y0, yhat0, res.controls, nullptr, fo);
    res.y_final = run.final_y();
    res.yhat_final = run.final_yhat();
    res.achieved_error = terminal_mismatch(g, res.y_final, res.yhat_final, y1, yhat1);
    return res;
}

}  // namespace rswave
