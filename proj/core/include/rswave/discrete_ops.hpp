#pragma once

#include <memory>
#include <vector>

#include "rswave/grid.hpp"

namespace rswave {

/// 2n+1-point Laplacian on interior nodes using the boundary values stored in `u`.
/// Boundary entries of the result are zero.
Field laplacian_apply(const Grid& g, const Field& u);

/// Copy of `u` with every boundary node set to zero.
Field zero_boundary(const Grid& g, Field u);

/// Weighted node sum over interior nodes: the discrete L2 inner product.
double inner(const Grid& g, const Field& u, const Field& v);
/// Discrete H0^1 inner product built from one-sided edge differences.
/// For Dirichlet fields inner(-laplacian_apply(u), v) == h01_inner(u, v).
double h01_inner(const Grid& g, const Field& u, const Field& v);

double l2_norm(const Grid& g, const Field& u);
double h01_norm(const Grid& g, const Field& u);
double hm1_norm(const Grid& g, const Field& u);

struct Norms {
    double l2 = 0.0;
    double h01 = 0.0;
    double hm1 = 0.0;
};

Norms norms(const Grid& g, const Field& u);

struct CgStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Solves -Δ_h u = f on interior nodes with u = 0 on the boundary by conjugate
/// gradients. Throws SolverError when the iteration cap is reached first.
Field poisson_solve(const Grid& g, const Field& f, double rel_tol = 1e-10,
                    CgStats* stats = nullptr);

/// Smallest eigenvalue of -Δ_h with Dirichlet conditions (closed form on a box).
double smallest_dirichlet_eigenvalue(const Grid& g);

/// Outward normal derivative on a face by the second-order one-sided stencil
/// (3u_b - 4u_1 + u_2) / (2h). One value per entry of `g.face_nodes(face)`.
std::vector<double> normal_trace(const Grid& g, const Field& u, const Face& face);

/// Solves (I - c (Δ_h + diag(a))) u = r on interior nodes with zero Dirichlet
/// data. Tridiagonal elimination in 1D, sparse Cholesky in 2D.
class ShiftedSolver {
public:
    /// `a` may be empty (treated as zero) or a full-grid field.
    ShiftedSolver(const Grid& g, double c, const Field& a);
    ~ShiftedSolver();
    ShiftedSolver(ShiftedSolver&&) noexcept;
    ShiftedSolver& operator=(ShiftedSolver&&) noexcept;

    /// Boundary entries of `r` are ignored; boundary entries of the result are zero.
    Field solve(const Field& r) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rswave
