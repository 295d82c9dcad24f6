#include "rswave/discrete_ops.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <numbers>

#include "rswave/error.hpp"

namespace rswave {

Field laplacian_apply(const Grid& g, const Field& u) {
    Field out(g.size(), 0.0);
    if (g.dim() == 1) {
        const double w = 1.0 / (g.h(0) * g.h(0));
        for (int i = 1; i < g.cells(0); ++i)
            out[i] = w * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
        return out;
    }
    const double wx = 1.0 / (g.h(0) * g.h(0));
    const double wy = 1.0 / (g.h(1) * g.h(1));
    const std::size_t sx = 1, sy = static_cast<std::size_t>(g.nodes(0));
    for (std::size_t n : g.interior()) {
        out[n] = wx * (u[n - sx] - 2.0 * u[n] + u[n + sx]) +
                 wy * (u[n - sy] - 2.0 * u[n] + u[n + sy]);
    }
    return out;
}

Field zero_boundary(const Grid& g, Field u) {
    for (std::size_t n = 0; n < g.size(); ++n)
        if (g.is_boundary(n)) u[n] = 0.0;
    return u;
}

double inner(const Grid& g, const Field& u, const Field& v) {
    double s = 0.0;
    for (std::size_t n : g.interior()) s += u[n] * v[n];
    return s * g.cell_volume();
}

double h01_inner(const Grid& g, const Field& u, const Field& v) {
    double s = 0.0;
    if (g.dim() == 1) {
        const double w = 1.0 / (g.h(0) * g.h(0));
        for (int i = 0; i < g.cells(0); ++i) s += w * (u[i + 1] - u[i]) * (v[i + 1] - v[i]);
        return s * g.cell_volume();
    }
    const double wx = 1.0 / (g.h(0) * g.h(0));
    const double wy = 1.0 / (g.h(1) * g.h(1));
    for (int j = 1; j < g.cells(1); ++j)
        for (int i = 0; i < g.cells(0); ++i) {
            const auto a = g.index(i, j), b = g.index(i + 1, j);
            s += wx * (u[b] - u[a]) * (v[b] - v[a]);
        }
    for (int i = 1; i < g.cells(0); ++i)
        for (int j = 0; j < g.cells(1); ++j) {
            const auto a = g.index(i, j), b = g.index(i, j + 1);
            s += wy * (u[b] - u[a]) * (v[b] - v[a]);
        }
    return s * g.cell_volume();
}

double l2_norm(const Grid& g, const Field& u) { return std::sqrt(inner(g, u, u)); }

double h01_norm(const Grid& g, const Field& u) { return std::sqrt(h01_inner(g, u, u)); }

double hm1_norm(const Grid& g, const Field& u) {
    const Field w = poisson_solve(g, u);
    return std::sqrt(std::max(0.0, inner(g, u, w)));
}

Norms norms(const Grid& g, const Field& u) {
    return {l2_norm(g, u), h01_norm(g, u), hm1_norm(g, u)};
}

Field poisson_solve(const Grid& g, const Field& f, double rel_tol, CgStats* stats) {
    const auto& in = g.interior();
    Field x = g.zeros();
    Field r = zero_boundary(g, f);
    auto dot = [&](const Field& a, const Field& b) {
        double s = 0.0;
        for (std::size_t n : in) s += a[n] * b[n];
        return s;
    };
    const double bnorm = std::sqrt(dot(r, r));
    if (stats) *stats = {0, 0.0};
    if (bnorm == 0.0) return x;

    Field p = r;
    double rr = dot(r, r);
    const int cap = 10 * static_cast<int>(in.size()) + 100;
    for (int it = 1; it <= cap; ++it) {
        Field ap = laplacian_apply(g, p);
        for (std::size_t n : in) ap[n] = -ap[n];
        const double alpha = rr / dot(p, ap);
        for (std::size_t n : in) {
            x[n] += alpha * p[n];
            r[n] -= alpha * ap[n];
        }
        const double rr_new = dot(r, r);
        const double rel = std::sqrt(rr_new) / bnorm;
        if (rel <= rel_tol) {
            if (stats) *stats = {it, rel};
            return x;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t n : in) p[n] = r[n] + beta * p[n];
    }
    throw SolverError("poisson_solve: conjugate gradient did not reach tolerance");
}

double smallest_dirichlet_eigenvalue(const Grid& g) {
    double lam = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double s = std::sin(std::numbers::pi / (2.0 * g.cells(a)));
        lam += 4.0 / (g.h(a) * g.h(a)) * s * s;
    }
    return lam;
}

std::vector<double> normal_trace(const Grid& g, const Field& u, const Face& face) {
    const auto& nodes = g.face_nodes(face);
    const double inv = 1.0 / (2.0 * g.face_spacing(face));
    std::vector<double> out(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto& fn = nodes[k];
        out[k] = inv * (3.0 * u[fn.boundary] - 4.0 * u[fn.first] + u[fn.second]);
    }
    return out;
}

struct ShiftedSolver::Impl {
    const Grid* grid = nullptr;
    // 1D tridiagonal factors
    std::vector<double> diag, upper, lower_mult;
    // 2D sparse factorization over interior unknowns
    std::vector<std::ptrdiff_t> slot;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

ShiftedSolver::ShiftedSolver(const Grid& g, double c, const Field& a)
    : impl_(std::make_unique<Impl>()) {
    impl_->grid = &g;
    auto coef = [&](std::size_t n) { return a.empty() ? 0.0 : a[n]; };
    if (g.dim() == 1) {
        const int m = g.cells(0) - 1;
        const double w = c / (g.h(0) * g.h(0));
        auto& d = impl_->diag;
        auto& up = impl_->upper;
        auto& lm = impl_->lower_mult;
        d.resize(m);
        up.assign(m, -w);
        lm.assign(m, 0.0);
        for (int i = 0; i < m; ++i) d[i] = 1.0 + 2.0 * w - c * coef(i + 1);
        for (int i = 1; i < m; ++i) {
            lm[i] = -w / d[i - 1];
            d[i] -= lm[i] * up[i - 1];
        }
        for (double v : d)
            if (!(std::abs(v) > 0.0)) throw SolverError("shifted operator is singular");
        return;
    }
    const auto& in = g.interior();
    impl_->slot.assign(g.size(), -1);
    for (std::size_t k = 0; k < in.size(); ++k) impl_->slot[in[k]] = static_cast<std::ptrdiff_t>(k);
    const double wx = c / (g.h(0) * g.h(0));
    const double wy = c / (g.h(1) * g.h(1));
    const std::size_t sy = static_cast<std::size_t>(g.nodes(0));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * in.size());
    for (std::size_t k = 0; k < in.size(); ++k) {
        const std::size_t n = in[k];
        const auto row = static_cast<int>(k);
        trip.emplace_back(row, row, 1.0 + 2.0 * wx + 2.0 * wy - c * coef(n));
        const std::pair<std::size_t, double> nb[] = {
            {n - 1, wx}, {n + 1, wx}, {n - sy, wy}, {n + sy, wy}};
        for (const auto& [m, w] : nb)
            if (impl_->slot[m] >= 0) trip.emplace_back(row, static_cast<int>(impl_->slot[m]), -w);
    }
    Eigen::SparseMatrix<double> A(static_cast<int>(in.size()), static_cast<int>(in.size()));
    A.setFromTriplets(trip.begin(), trip.end());
    impl_->ldlt.compute(A);
    if (impl_->ldlt.info() != Eigen::Success) throw SolverError("shifted operator factorization failed");
}

ShiftedSolver::~ShiftedSolver() = default;
ShiftedSolver::ShiftedSolver(ShiftedSolver&&) noexcept = default;
ShiftedSolver& ShiftedSolver::operator=(ShiftedSolver&&) noexcept = default;

Field ShiftedSolver::solve(const Field& r) const {
    const Grid& g = *impl_->grid;
    Field out = g.zeros();
    if (g.dim() == 1) {
        const auto& d = impl_->diag;
        const auto& up = impl_->upper;
        const auto& lm = impl_->lower_mult;
        const int m = static_cast<int>(d.size());
        std::vector<double> y(m);
        for (int i = 0; i < m; ++i) y[i] = r[i + 1] - (i > 0 ? lm[i] * y[i - 1] : 0.0);
        for (int i = m - 1; i >= 0; --i)
            y[i] = (y[i] - (i + 1 < m ? up[i] * y[i + 1] : 0.0)) / d[i];
        for (int i = 0; i < m; ++i) out[i + 1] = y[i];
        return out;
    }
    const auto& in = g.interior();
    Eigen::VectorXd b(static_cast<Eigen::Index>(in.size()));
    for (std::size_t k = 0; k < in.size(); ++k) b[static_cast<Eigen::Index>(k)] = r[in[k]];
    const Eigen::VectorXd x = impl_->ldlt.solve(b);
    for (std::size_t k = 0; k < in.size(); ++k) out[in[k]] = x[static_cast<Eigen::Index>(k)];
    return out;
}

}  // namespace rswave
