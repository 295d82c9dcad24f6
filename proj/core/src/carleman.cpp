#include "rswave/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "rswave/error.hpp"
#include "rswave/parallel.hpp"

namespace rswave {

namespace {

constexpr double kExpBudget = 700.0;

template <int V>
PointCoefficients jet_coefficients(const CarlemanParams& p, const GeometrySpec& geom, double t,
                                   const double* x) {
    using J = Jet<V, 4>;
    constexpr int n = V - 1;
    const double lam = p.lambda, mu = p.mu, al = p.alpha, be = p.beta;

    const J tau = J::variable(0, t) - geom.T / 2.0;
    J spatial, sum_ed2;
    for (int i = 0; i < n; ++i) {
        const J d = J::variable(i + 1, x[i]) - geom.x0[i];
        const J e = exp(be * (d * d));
        spatial += e;
        sum_ed2 += e * (d * d);
    }
    const J E = exp(al * be * (tau * tau));
    const J phi = exp(mu * (spatial - static_cast<double>(n) * E));
    const J ell = lam * phi;

    const J ell_t = ell.derivative(0);
    const J ell_tt = ell_t.derivative(0);
    std::array<J, n> ell_x;
    J lap, grad2;
    for (int j = 0; j < n; ++j) {
        ell_x[j] = ell.derivative(j + 1);
        lap += ell_x[j].derivative(j + 1);
        grad2 += ell_x[j] * ell_x[j];
    }
    const J psi = -ell_tt + lap - (4.0 * n * lam * mu * al * al * be * be) * (phi * E * (tau * tau)) -
                  (2.0 * n * lam * mu * al * be) * (phi * E) - (4.0 * lam * mu * be * be) * (phi * sum_ed2) -
                  (2.0 * lam * mu * be) * (phi * spatial);
    const J A = ell_t * ell_t - ell_tt - grad2 + lap - psi;

    PointCoefficients pc;
    pc.Psi_jet = psi.value();
    pc.Psi_t = psi.derivative(0).value();
    double lap_psi = 0.0, div_A = 0.0;
    for (int j = 0; j < n; ++j) {
        const J psi_j = psi.derivative(j + 1);
        pc.Psi_x[j] = psi_j.value();
        lap_psi += psi_j.derivative(j + 1).value();
        div_A += (A * ell_x[j]).derivative(j + 1).value();
    }
    const double psi_tt = psi.derivative(0).derivative(0).value();
    pc.B = A.value() * psi.value() + (A * ell_t).derivative(0).value() - div_A +
           0.5 * (psi_tt - lap_psi);
    return pc;
}

/// Centered gradient inside, second-order one-sided on the boundary.
std::array<Field, 2> gradient(const Grid& g, const Field& f) {
    std::array<Field, 2> out{g.zeros(), g.zeros()};
    const int nx = g.cells(0);
    const int ny = g.dim() > 1 ? g.cells(1) : 0;
    for (int axis = 0; axis < g.dim(); ++axis) {
        const double h = g.h(axis);
        const int last = g.cells(axis);
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                const int c = axis == 0 ? i : j;
                auto at = [&](int s) {
                    return axis == 0 ? f[g.index(i + s, j)] : f[g.index(i, j + s)];
                };
                double v;
                if (c == 0) v = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
                else if (c == last) v = (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
                else v = (at(1) - at(-1)) / (2.0 * h);
                out[axis][g.index(i, j)] = v;
            }
    }
    return out;
}

/// Centered divergence of a vector field (valid where both neighbours exist).
double divergence_at(const Grid& g, const std::array<Field, 2>& V, std::size_t node) {
    const auto ij = g.multi_index(node);
    double div = 0.0;
    for (int axis = 0; axis < g.dim(); ++axis) {
        const std::size_t plus = axis == 0 ? g.index(ij[0] + 1, ij[1]) : g.index(ij[0], ij[1] + 1);
        const std::size_t minus = axis == 0 ? g.index(ij[0] - 1, ij[1]) : g.index(ij[0], ij[1] - 1);
        div += (V[axis][plus] - V[axis][minus]) / (2.0 * g.h(axis));
    }
    return div;
}

/// Nodes in the middle window [lo + L/8, hi - L/8] of every axis, and at least
/// two cells from the boundary. The window is fixed in physical space so that
/// nested grids compare the same region.
std::vector<std::size_t> window_nodes(const Grid& g) {
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto ij = g.multi_index(n);
        const auto x = g.point(n);
        bool ok = true;
        for (int axis = 0; axis < g.dim(); ++axis) {
            const double margin = (g.hi(axis) - g.lo(axis)) / 8.0;
            const double tol = 1e-9 * g.h(axis);
            ok = ok && ij[axis] >= 2 && ij[axis] <= g.cells(axis) - 2 && x[axis] >= g.lo(axis) + margin - tol &&
                 x[axis] <= g.hi(axis) - margin + tol;
        }
        if (ok) out.push_back(n);
    }
    return out;
}

bool in_time_window(const Grid& g, int k) {
    const double t = g.time(k), tol = 1e-9 * g.dt();
    return t >= g.T() / 8.0 - tol && t <= 7.0 * g.T() / 8.0 + tol;
}

struct TableEntry {
    PointCoefficients pc;
    double ell = 0.0;
    double theta = 0.0;  ///< e^{ell - shift}
};

struct CoefficientTable {
    int levels = 0;
    std::size_t nodes = 0;
    double shift = 0.0;
    std::vector<TableEntry> entries;
    const TableEntry& at(int k, std::size_t n) const { return entries[k * nodes + n]; }
};

CoefficientTable build_table(const Grid& g, const CarlemanParams& p, const GeometrySpec& geom) {
    CoefficientTable tab;
    tab.levels = g.steps() + 1;
    tab.nodes = g.size();
    tab.entries.resize(static_cast<std::size_t>(tab.levels) * tab.nodes);
    double max_ell = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < tab.levels; ++k)
        for (std::size_t n = 0; n < tab.nodes; ++n) {
            const auto x = g.point(n);
            auto& e = tab.entries[k * tab.nodes + n];
            e.pc = point_coefficients(p, geom, g.time(k), x.data());
            e.ell = eval_weight_point(p, geom, g.time(k), x.data()).ell;
            max_ell = std::max(max_ell, e.ell);
        }
    tab.shift = max_ell > 600.0 ? max_ell : 0.0;
    for (auto& e : tab.entries) e.theta = std::exp(e.ell - tab.shift);
    return tab;
}

/// Per-level quantities of the identity.
struct LevelState {
    Field v, vhat, I, M;
    std::array<Field, 2> gv;
    std::array<Field, 2> V;
};

LevelState level_state(const Grid& g, const CoefficientTable& tab, int k, const Field& u,
                       const Field& uhat) {
    const int n = g.dim();
    LevelState s;
    s.v = g.zeros();
    s.vhat = g.zeros();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const TableEntry& e = tab.at(k, i);
        s.v[i] = e.theta * u[i];
        s.vhat[i] = e.theta * uhat[i] + e.pc.ell_t * s.v[i];
    }
    s.gv = gradient(g, s.v);
    s.I = g.zeros();
    s.M = g.zeros();
    s.V = {g.zeros(), g.zeros()};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const PointCoefficients& c = tab.at(k, i).pc;
        const double v = s.v[i], vh = s.vhat[i];
        double lg = 0.0, g2 = 0.0;
        for (int j = 0; j < n; ++j) {
            lg += c.ell_x[j] * s.gv[j][i];
            g2 += s.gv[j][i] * s.gv[j][i];
        }
        s.I[i] = -2.0 * c.ell_t * vh + 2.0 * lg + c.Psi * v;
        s.M[i] = c.ell_t * g2 + c.ell_t * vh * vh - 2.0 * lg * vh - c.Psi * v * vh +
                 (c.A * c.ell_t + 0.5 * c.Psi_t) * v * v;
        for (int j = 0; j < n; ++j) {
            const double gj = s.gv[j][i];
            s.V[j][i] = 2.0 * lg * gj - c.ell_x[j] * g2 - 2.0 * c.ell_t * gj * vh + c.ell_x[j] * vh * vh +
                        c.Psi * v * gj - 0.5 * c.Psi_x[j] * v * v - c.A * v * v * c.ell_x[j];
        }
    }
    return s;
}

double bracket_at(const Grid& g, const PointCoefficients& c, const LevelState& s, std::size_t i) {
    const int n = g.dim();
    const double vh = s.vhat[i], v = s.v[i];
    double g2 = 0.0, hess = 0.0, cross = 0.0;
    for (int j = 0; j < n; ++j) {
        g2 += s.gv[j][i] * s.gv[j][i];
        cross += c.ell_tx[j] * s.gv[j][i];
        for (int k = 0; k < n; ++k) hess += c.ell_xx[j][k] * s.gv[j][i] * s.gv[k][i];
    }
    return (c.ell_tt + c.lap_ell - c.Psi) * vh * vh + (c.ell_tt - c.lap_ell + c.Psi) * g2 + 2.0 * hess -
           4.0 * cross * vh + c.B * v * v + s.I[i] * s.I[i];
}

/// dt-density of the quadratic-variation term for diffusions Dv, Dv̂ and ∇Dv.
double n_density(const Grid& g, const PointCoefficients& c, double Dv, double Dvh,
                 const std::array<Field, 2>& gDv, std::size_t i) {
    double lg = 0.0, g2 = 0.0;
    for (int j = 0; j < g.dim(); ++j) {
        lg += c.ell_x[j] * gDv[j][i];
        g2 += gDv[j][i] * gDv[j][i];
    }
    return c.ell_t * Dvh * Dvh - 2.0 * lg * Dvh - c.Psi * Dv * Dvh + c.ell_t * g2 +
           (c.A * c.ell_t + 0.5 * c.Psi_t) * Dv * Dv;
}

void check_input(const Grid& g, const IdentityInput& in) {
    const std::size_t L = static_cast<std::size_t>(g.steps() + 1);
    if (in.u.size() != L || in.uhat.size() != L) throw ConfigError("identity input needs one field per time level");
    if (!in.U.empty() && in.U.size() != L) throw ConfigError("U needs one field per time level");
    if (!in.Uhat.empty() && in.Uhat.size() != L) throw ConfigError("Uhat needs one field per time level");
    if (g.steps() < 3) throw ConfigError("identity check needs at least three steps");
}

IdentityResidual residual_with_table(const Grid& g, const CoefficientTable& tab, const IdentityInput& in) {
    check_input(g, in);
    const int K = g.steps();
    const double dt = g.dt();
    const auto deep = window_nodes(g);
    std::vector<LevelState> st;
    st.reserve(static_cast<std::size_t>(K + 1));
    for (int k = 0; k <= K; ++k) st.push_back(level_state(g, tab, k, in.u[k], in.uhat[k]));

    double res2 = 0.0, scale2 = 0.0;
    for (int k = 1; k < K; ++k) {
        if (!in_time_window(g, k)) continue;
        const Field lap_u = laplacian_apply(g, in.u[k]);
        for (std::size_t i : deep) {
            const TableEntry& e = tab.at(k, i);
            const double uhat_t = (in.uhat[k + 1][i] - in.uhat[k - 1][i]) / (2.0 * dt);
            const double M_t = (st[k + 1].M[i] - st[k - 1].M[i]) / (2.0 * dt);
            const double lhs = e.theta * st[k].I[i] * (uhat_t - lap_u[i]) + divergence_at(g, st[k].V, i) + M_t;
            const double rhs = bracket_at(g, e.pc, st[k], i);
            res2 += (lhs - rhs) * (lhs - rhs);
            scale2 += rhs * rhs;
        }
    }
    const double w = dt * g.cell_volume();
    return {std::sqrt(w * res2), std::sqrt(w * scale2)};
}

IntegratedResidual integrated_with_table(const Grid& g, const CoefficientTable& tab,
                                         const IdentityInput& in) {
    check_input(g, in);
    const int K = g.steps();
    const double dt = g.dt();
    const double vol = g.cell_volume();
    const auto deep = window_nodes(g);
    IntegratedResidual out;
    LevelState cur = level_state(g, tab, 0, in.u[0], in.uhat[0]);
    for (int k = 0; k < K; ++k) {
        LevelState next = level_state(g, tab, k + 1, in.u[k + 1], in.uhat[k + 1]);
        if (!in_time_window(g, k)) {
            cur = std::move(next);
            continue;
        }
        const Field lap_u = laplacian_apply(g, in.u[k]);
        Field Dv = g.zeros(), Dvh = g.zeros();
        const bool noisy = !in.U.empty() || !in.Uhat.empty();
        if (noisy)
            for (std::size_t i = 0; i < g.size(); ++i) {
                const TableEntry& e = tab.at(k, i);
                const double U = in.U.empty() ? 0.0 : in.U[k][i];
                const double Uh = in.Uhat.empty() ? 0.0 : in.Uhat[k][i];
                Dv[i] = e.theta * U;
                Dvh[i] = e.theta * Uh + e.pc.ell_t * e.theta * U;
            }
        const std::array<Field, 2> gDv = gradient(g, Dv);
        for (std::size_t i : deep) {
            const TableEntry& e = tab.at(k, i);
            const double lhs = e.theta * cur.I[i] * (in.uhat[k + 1][i] - in.uhat[k][i] - lap_u[i] * dt) +
                               divergence_at(g, cur.V, i) * dt + (next.M[i] - cur.M[i]);
            const double bracket = bracket_at(g, e.pc, cur, i);
            const double N = noisy ? n_density(g, e.pc, Dv[i], Dvh[i], gDv, i) : 0.0;
            out.residual += vol * (lhs - (bracket + N) * dt);
            out.scale += vol * std::abs(bracket) * dt;
        }
        cur = std::move(next);
    }
    return out;
}

}  // namespace

double psi_closed_form(const CarlemanParams& p, const GeometrySpec& geom, const WeightSample& w,
                       double t, const double* x) {
    const int n = geom.dim();
    const double lam = p.lambda, mu = p.mu, al = p.alpha, be = p.beta;
    const double tau = t - geom.T / 2.0;
    const double E = std::exp(al * be * tau * tau);
    double spatial = 0.0, sum_ed2 = 0.0, lap = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = x[i] - geom.x0[i];
        const double e = std::exp(be * d * d);
        spatial += e;
        sum_ed2 += e * d * d;
        lap += w.ell_xx[i][i];
    }
    const double lmp = lam * mu * w.phi;
    return -w.ell_tt + lap - 4.0 * n * lmp * al * al * be * be * E * tau * tau - 2.0 * n * lmp * al * be * E -
           4.0 * lmp * be * be * sum_ed2 - 2.0 * lmp * be * spatial;
}

PointCoefficients point_coefficients(const CarlemanParams& p, const GeometrySpec& geom, double t,
                                     const double* x) {
    PointCoefficients pc = geom.dim() == 1 ? jet_coefficients<2>(p, geom, t, x)
                                           : jet_coefficients<3>(p, geom, t, x);
    const WeightSample w = eval_weight_point(p, geom, t, x);
    const int n = geom.dim();
    pc.ell_t = w.ell_t;
    pc.ell_tt = w.ell_tt;
    pc.ell_x = w.ell_x;
    pc.ell_xx = w.ell_xx;
    pc.ell_tx = w.ell_tx;
    double grad2 = 0.0, sum_e2d2 = 0.0;
    pc.lap_ell = 0.0;
    for (int j = 0; j < n; ++j) {
        pc.lap_ell += w.ell_xx[j][j];
        grad2 += w.ell_x[j] * w.ell_x[j];
        const double d = x[j] - geom.x0[j];
        sum_e2d2 += std::exp(2.0 * p.beta * d * d) * d * d;
    }
    pc.Psi = psi_closed_form(p, geom, w, t, x);
    pc.A = w.ell_t * w.ell_t - w.ell_tt - grad2 + pc.lap_ell - pc.Psi;
    const double tau = t - geom.T / 2.0;
    const double lmb = p.lambda * p.mu * p.beta * w.phi;
    pc.A_leading = 4.0 * lmb * lmb *
                   (p.alpha * p.alpha * n * n * std::exp(2.0 * p.alpha * p.beta * tau * tau) * tau * tau - sum_e2d2);
    return pc;
}

TransformedTrajectory transform(const Grid& g, const AdjointTrajectory& tr,
                                const CutoffFunction& cutoff) {
    const int L = static_cast<int>(tr.z.size());
    if (cutoff.nodes != g.size() || cutoff.levels < L)
        throw ConfigError("cut-off and adjoint trajectory live on different grids");
    TransformedTrajectory out;
    out.u.resize(static_cast<std::size_t>(L));
    out.uhat.resize(static_cast<std::size_t>(L));
    for (int k = 0; k < L; ++k) {
        out.u[k] = g.zeros();
        out.uhat[k] = g.zeros();
        for (std::size_t n = 0; n < g.size(); ++n) {
            const CutoffSample& c = cutoff.at(k, n);
            out.u[k][n] = c.chi * tr.z[k][n];
            out.uhat[k][n] = c.chi_t * tr.z[k][n] + c.chi * tr.zhat[k][n];
        }
    }
    for (int k = 0; k + 1 < L; ++k)
        for (std::size_t n = 0; n < g.size(); ++n) {
            const double r = (out.u[k + 1][n] - out.u[k][n]) / g.dt() - 0.5 * (out.uhat[k][n] + out.uhat[k + 1][n]);
            out.max_residual = std::max(out.max_residual, std::abs(r));
        }
    return out;
}

IdentityIngredients assemble_ingredients(const Grid& g, const CarlemanParams& p,
                                         const GeometrySpec& geom, const WeightField& w,
                                         const CutoffFunction& cutoff,
                                         const TransformedTrajectory& ut,
                                         const AdjointTrajectory& tr, const CoefficientSet& c) {
    const int L = static_cast<int>(ut.u.size());
    if (w.nodes != g.size() || w.levels < L) throw ConfigError("weights and trajectory live on different grids");
    IdentityIngredients out;
    double max_ell = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < L; ++k)
        for (std::size_t n = 0; n < g.size(); ++n) max_ell = std::max(max_ell, w.at(k, n).ell);
    out.theta_shift = max_ell > 600.0 ? max_ell : 0.0;

    const int dim = g.dim();
    for (int k = 0; k < L; ++k) {
        const double t = g.time(k);
        const Field a4 = c.a4.sample(g, t), a5 = c.a5.sample(g, t);
        Field Psi = g.zeros(), A = g.zeros(), B = g.zeros(), v = g.zeros(), vh = g.zeros();
        Field K = g.zeros(), Kh = g.zeros(), theta = g.zeros();
        std::vector<PointCoefficients> pcs(g.size());
        for (std::size_t n = 0; n < g.size(); ++n) {
            const auto x = g.point(n);
            pcs[n] = point_coefficients(p, geom, t, x.data());
            const PointCoefficients& pc = pcs[n];
            const CutoffSample& cs = cutoff.at(k, n);
            const double th = std::exp(w.at(k, n).ell - out.theta_shift);
            theta[n] = th;
            Psi[n] = pc.Psi;
            A[n] = pc.A;
            B[n] = pc.B;
            v[n] = th * ut.u[k][n];
            vh[n] = th * ut.uhat[k][n] + pc.ell_t * v[n];
            const double z = tr.z[k][n], zh = tr.zhat[k][n];
            K[n] = th * cs.chi * a4[n] * z;
            Kh[n] = th * cs.chi_t * a5[n] * z + th * cs.chi * a5[n] * zh + th * cs.chi * pc.ell_t * a5[n] * z;
        }
        const auto gv = gradient(g, v);
        Field M = g.zeros(), Ndt = g.zeros(), Dv = g.zeros(), Dvh = g.zeros();
        std::array<Field, 2> V{g.zeros(), g.zeros()};
        for (std::size_t n = 0; n < g.size(); ++n) {
            Dv[n] = -a4[n] * v[n] + K[n];
            Dvh[n] = -a5[n] * vh[n] + Kh[n];
        }
        const auto gDv = gradient(g, Dv);
        for (std::size_t n = 0; n < g.size(); ++n) {
            const PointCoefficients& pc = pcs[n];
            double lg = 0.0, g2 = 0.0;
            for (int j = 0; j < dim; ++j) {
                lg += pc.ell_x[j] * gv[j][n];
                g2 += gv[j][n] * gv[j][n];
            }
            M[n] = pc.ell_t * g2 + pc.ell_t * vh[n] * vh[n] - 2.0 * lg * vh[n] - pc.Psi * v[n] * vh[n] +
                   (pc.A * pc.ell_t + 0.5 * pc.Psi_t) * v[n] * v[n];
            for (int j = 0; j < dim; ++j) {
                const double gj = gv[j][n];
                V[j][n] = 2.0 * lg * gj - pc.ell_x[j] * g2 - 2.0 * pc.ell_t * gj * vh[n] + pc.ell_x[j] * vh[n] * vh[n] +
                          pc.Psi * v[n] * gj - 0.5 * pc.Psi_x[j] * v[n] * v[n] - pc.A * v[n] * v[n] * pc.ell_x[j];
            }
            Ndt[n] = n_density(g, pc, Dv[n], Dvh[n], gDv, n);
        }
        out.Psi.push_back(std::move(Psi));
        out.A.push_back(std::move(A));
        out.B.push_back(std::move(B));
        out.M.push_back(std::move(M));
        out.N_dt.push_back(std::move(Ndt));
        out.v.push_back(std::move(v));
        out.vhat.push_back(std::move(vh));
        out.K.push_back(std::move(K));
        out.Khat.push_back(std::move(Kh));
        out.V.push_back(std::move(V));
    }
    return out;
}

IdentityResidual identity_residual(const Grid& g, const CarlemanParams& p,
                                   const GeometrySpec& geom, const IdentityInput& in) {
    if (!in.U.empty() || !in.Uhat.empty())
        throw ConfigError("the pointwise residual is defined for deterministic input only");
    return residual_with_table(g, build_table(g, p, geom), in);
}

IntegratedResidual integrated_identity(const Grid& g, const CarlemanParams& p,
                                       const GeometrySpec& geom, const IdentityInput& in) {
    return integrated_with_table(g, build_table(g, p, geom), in);
}

ExpectedResidual expected_identity_residual(const Grid& g, const CarlemanParams& p,
                                            const GeometrySpec& geom,
                                            const std::vector<Field>& m,
                                            const std::vector<Field>& m_t, const Field& q,
                                            int paths, std::uint64_t seed, int workers) {
    if (paths < 2) throw ContractViolation("expected residual needs at least two paths");
    const std::size_t L = static_cast<std::size_t>(g.steps() + 1);
    if (m.size() != L || m_t.size() != L || q.size() != g.size())
        throw ConfigError("mean, its derivative and q must live on the grid");
    const CoefficientTable tab = build_table(g, p, geom);
    std::vector<double> values(static_cast<std::size_t>(paths)), scales(values.size());
    parallel_for(values.size(), workers, [&](std::size_t i) {
        const BrownianPath path = sample_path(path_seed(seed, i), g.dt(), g.steps());
        IdentityInput in;
        in.uhat = m_t;
        in.U.assign(L, q);
        in.u.resize(L);
        double W = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
            in.u[k] = m[k];
            for (std::size_t n = 0; n < g.size(); ++n) in.u[k][n] += q[n] * W;
            if (k < path.increments.size()) W += path.increments[k];
        }
        const IntegratedResidual r = integrated_with_table(g, tab, in);
        values[i] = r.residual;
        scales[i] = r.scale;
    });
    ExpectedResidual out;
    out.estimate = mc_mean(values);
    for (double s : scales) out.scale += s;
    out.scale /= static_cast<double>(paths);
    return out;
}

PositivityReport positivity_checks(const Grid& g, const CarlemanParams& p,
                                   const GeometrySpec& geom, int samples, std::uint64_t seed,
                                   bool with_zd3) {
    const int n = geom.dim();
    const double be = p.beta, al = p.alpha, mu = p.mu;
    PositivityReport rep;
    rep.bv2_min_margin = std::numeric_limits<double>::infinity();
    rep.zd1_min_margin = std::numeric_limits<double>::infinity();
    rep.zd3_min_ratio = std::numeric_limits<double>::infinity();
    rep.zd3_evaluated = with_zd3;
    std::uint64_t counter = 0;

    for (int k = 0; k <= g.steps(); ++k) {
        const double t = g.time(k);
        const double tau = t - geom.T / 2.0;
        for (std::size_t node = 0; node < g.size(); ++node) {
            const auto x = g.point(node);
            if (!level_set_membership(p, geom, p.c1, t, std::span<const double>(x.data(), static_cast<std::size_t>(n))))
                continue;
            ++rep.nodes_checked;

            // Every exponential is scaled by e^{-beta m}; quadratic terms then carry
            // e^{-2 beta m} and linear ones the extra factor s.
            std::array<double, 2> d{};
            double m = al * tau * tau;
            for (int i = 0; i < n; ++i) {
                d[i] = x[i] - geom.x0[i];
                m = std::max(m, d[i] * d[i]);
            }
            const double s = std::exp(-be * m);
            const double Eh = std::exp(be * (al * tau * tau - m));
            std::array<double, 2> eh{}, sx{}, sxx{};
            double sum_e = 0.0, sum_ed2 = 0.0, sum_e2 = 0.0, sum_e2d2 = 0.0;
            for (int i = 0; i < n; ++i) {
                eh[i] = std::exp(be * (d[i] * d[i] - m));
                sum_e += eh[i];
                sum_ed2 += eh[i] * d[i] * d[i];
                sum_e2 += eh[i] * eh[i];
                sum_e2d2 += eh[i] * eh[i] * d[i] * d[i];
                sx[i] = 2.0 * be * eh[i] * d[i];
                sxx[i] = 2.0 * be * eh[i] + 4.0 * be * be * eh[i] * d[i] * d[i];
            }
            const double st = -2.0 * n * al * be * Eh * tau;
            const double stt = -2.0 * n * al * be * Eh - 4.0 * n * al * al * be * be * Eh * tau * tau;

            // Quadratic form in (v̂, ∇v) divided by λμφ e^{2βm}.
            const double ltt = s * stt + mu * st * st;
            double lap = 0.0;
            for (int i = 0; i < n; ++i) lap += s * sxx[i] + mu * sx[i] * sx[i];
            const double X = s * (4.0 * n * al * al * be * be * Eh * tau * tau + 2.0 * n * al * be * Eh +
                                  4.0 * be * be * sum_ed2 + 2.0 * be * sum_e);
            const double cbound = s * (4.0 * p.c0 * be * be + 2.0 * be * (1.0 - al)) * sum_e;
            Eigen::Matrix3d Q = Eigen::Matrix3d::Zero();
            Q(0, 0) = 2.0 * ltt + X - cbound;
            for (int j = 0; j < n; ++j) {
                Q(0, j + 1) = Q(j + 1, 0) = -2.0 * mu * st * sx[j];
                for (int l = 0; l < n; ++l) {
                    const double ljl = (j == l ? s * sxx[j] : 0.0) + mu * sx[j] * sx[l];
                    Q(j + 1, l + 1) = 2.0 * ljl + (j == l ? -X - cbound : 0.0);
                }
            }
            const int dimq = n + 1;
            const Eigen::MatrixXd Qn = Q.topLeftCorner(dimq, dimq);
            const double qscale = Qn.norm() + cbound;
            bool violated = false;
            for (int r = 0; r < samples; ++r) {
                Eigen::VectorXd wv(dimq);
                for (int j = 0; j < dimq; ++j) wv(j) = standard_normal(seed, counter++);
                const double val = wv.dot(Qn * wv);
                if (val < -1e-12 * qscale * wv.squaredNorm()) violated = true;
            }
            if (violated) ++rep.bv2_violations;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Qn, Eigen::EigenvaluesOnly);
            const double margin = es.eigenvalues()(0) / std::max(qscale, std::numeric_limits<double>::min());
            rep.bv2_min_margin = std::min(rep.bv2_min_margin, margin);

            // zd1 chain divided by e^{2βm}.
            const double lhs1 = sum_e2d2 - al * al * n * n * Eh * Eh * tau * tau;
            const double rhs1 = p.c0 * p.c1 / std::sqrt(static_cast<double>(n)) * s *
                                (std::sqrt(sum_e2) + std::sqrt(static_cast<double>(n)) * Eh);
            if (lhs1 < rhs1) ++rep.zd1_violations;
            rep.zd1_min_margin = std::min(rep.zd1_min_margin, (lhs1 - rhs1) / std::max({std::abs(lhs1), rhs1, std::numeric_limits<double>::min()}));

            if (with_zd3) {
                const WeightSample w = eval_weight_point(p, geom, t, x.data());
                const double log_bound = std::log(16.0 * p.c0 * p.c0 * p.c1 * p.c1 / n) +
                                         3.0 * std::log(p.lambda) + 4.0 * std::log(mu) + 4.0 * std::log(be) +
                                         3.0 * mu * w.sigma + std::log(sum_e2) + 2.0 * be * m;
                if (w.saturated || log_bound > kExpBudget || 3.0 * mu * w.sigma > kExpBudget) {
                    ++rep.zd3_skipped;
                    continue;
                }
                const PointCoefficients pc = point_coefficients(p, geom, t, x.data());
                const double ratio = pc.B / std::exp(log_bound);
                if (!std::isfinite(ratio)) {
                    ++rep.zd3_skipped;
                    continue;
                }
                if (!(ratio >= 1.0)) ++rep.zd3_violations;
                rep.zd3_min_ratio = std::min(rep.zd3_min_ratio, ratio);
            }
        }
    }
    return rep;
}

CarlemanRatio carleman_ratio(const Grid& g, const CarlemanParams& p, const GeometrySpec& geom,
                             const AdjointTrajectory& tr, const CoefficientSet& c,
                             const std::vector<Face>& gamma0, double floor) {
    const int L = static_cast<int>(tr.z.size());
    const int K = L - 1;
    const int dim = g.dim();
    const double lam = p.lambda, mu = p.mu;
    const CutoffFunction cutoff = build_cutoff(p, geom, g);
    const TransformedTrajectory ut = transform(g, tr, cutoff);

    const double log_u0 = std::log(lam * lam * lam * std::pow(mu, 4.0));
    const double log_u1 = std::log(lam * mu);
    const double log_c0 = std::log(lam * std::pow(mu, 1.5) * lam * lam * std::pow(mu, 2.5));
    const double log_c1 = std::log(lam * std::pow(mu, 1.5));

    // log(φθ²) per level and node.
    std::vector<Field> lw(static_cast<std::size_t>(L));
    double L0 = -std::numeric_limits<double>::infinity();
    double resolution = 0.0;
    for (int k = 0; k < L; ++k) {
        lw[k] = g.zeros();
        for (std::size_t n = 0; n < g.size(); ++n) {
            const auto x = g.point(n);
            const WeightSample w = eval_weight_point(p, geom, g.time(k), x.data());
            const double log_phi = mu * w.sigma;
            lw[k][n] = log_phi + 2.0 * w.ell;
            double jump = std::abs(w.ell_t) * g.dt();
            for (int j = 0; j < dim; ++j) jump = std::max(jump, std::abs(w.ell_x[j]) * g.h(j));
            const CutoffSample& cs = cutoff.at(k, n);
            jump = std::max(jump, std::abs(cs.chi_t) * g.dt());
            for (int j = 0; j < dim; ++j) jump = std::max(jump, std::abs(cs.chi_x[j]) * g.h(j));
            resolution = std::max(resolution, jump);
            const double top = lw[k][n] + std::max({log_u0 + 2.0 * log_phi, log_u1, log_c0 + 2.0 * log_phi, log_c1, 0.0});
            L0 = std::max(L0, top);
        }
    }

    CarlemanRatio out;
    out.log_scale = L0;
    out.resolution = resolution;
    auto term = [&](double lwv, double extra) { return std::exp(lwv + extra - L0); };
    for (int k = 0; k < L; ++k) {
        const double dtk = (k == 0 || k == K) ? 0.5 * g.dt() : g.dt();
        const double t = g.time(k);
        const Field a4 = c.a4.sample(g, t), a5 = c.a5.sample(g, t);
        Field a4z = g.zeros();
        for (std::size_t n = 0; n < g.size(); ++n) a4z[n] = a4[n] * tr.z[k][n];
        const auto gu = gradient(g, ut.u[k]);
        const auto gz = gradient(g, tr.z[k]);
        const auto ga4z = gradient(g, a4z);
        double lhs = 0.0, energy = 0.0, combo = 0.0;
        for (std::size_t n = 0; n < g.size(); ++n) {
            const CutoffSample& cs = cutoff.at(k, n);
            const auto ij = g.multi_index(n);
            double qw = 1.0;  // trapezoid weight in space
            for (int j = 0; j < dim; ++j)
                if (ij[j] == 0 || ij[j] == g.cells(j)) qw *= 0.5;
            const auto x = g.point(n);
            const double log_phi = mu * eval_weight_point(p, geom, t, x.data()).sigma;
            double gu2 = 0.0, gz2 = 0.0, ga2 = 0.0;
            for (int j = 0; j < dim; ++j) {
                gu2 += gu[j][n] * gu[j][n];
                gz2 += gz[j][n] * gz[j][n];
                ga2 += ga4z[j][n] * ga4z[j][n];
            }
            const double u = ut.u[k][n], uh = ut.uhat[k][n], z = tr.z[k][n], zh = tr.zhat[k][n];
            const double big = term(lw[k][n], log_u0 + 2.0 * log_phi);
            const double base = term(lw[k][n], 0.0);
            lhs += qw * (big * u * u + term(lw[k][n], log_u1) * (gu2 + uh * uh));
            energy += qw * cs.Theta * (big * z * z + base * (gz2 + zh * zh));
            const double a5zh = a5[n] * zh;
            combo += qw * (cs.Theta + cs.chi * cs.chi) *
                     (term(lw[k][n], log_c0 + 2.0 * log_phi) * a4z[n] * a4z[n] +
                      term(lw[k][n], log_c1) * (ga2 + a5zh * a5zh));
        }
        const double w = dtk * g.cell_volume();
        out.lhs += w * lhs;
        out.rhs_energy += w * energy;
        out.rhs_combo += w * combo;

        for (const Face& face : gamma0) {
            const std::size_t f = tr.face_index(face);
            const auto& nodes = g.face_nodes(face);
            double acc = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                const double dn = tr.trace[k][f][i];
                acc += term(lw[k][nodes[i].boundary], log_u1) * dn * dn;
            }
            out.rhs_trace += dtk * g.face_weight(face) * acc;
        }
    }
    out.rhs = out.rhs_energy + out.rhs_combo + out.rhs_trace;
    out.degenerate = !(out.rhs > floor) || out.lhs == 0.0;
    out.ratio = out.degenerate ? 0.0 : out.lhs / out.rhs;
    return out;
}

}  // namespace rswave
