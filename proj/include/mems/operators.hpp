#pragma once

// Discrete mechanical operators: the linear beam/membrane operator
// beta u'''' - tau u'' with clamped or pinned boundary closure, the
// quasilinear curvature operator, the self-stretching term, and the
// principal eigenpair by inverse power iteration.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "mems/core.hpp"

namespace mems {

// Banded symmetric positive definite matrix acting on interior nodes.
// Clamped: ghost reflection consistent with u = u_x = 0 (u_g = u_1);
// pinned: odd reflection from u = u_xx = 0 (u_g = -u_1).
class BeamOperator {
public:
    BeamOperator(const Grid1D& grid, double beta, double tau, BoundaryCondition bc);

    const Eigen::SparseMatrix<double>& matrix() const { return mat_; }
    const Grid1D& grid() const { return grid_; }
    double beta() const { return beta_; }
    double tau() const { return tau_; }
    BoundaryCondition bc() const { return bc_; }

    // A u at the interior nodes of a full nodal vector.
    Eigen::VectorXd apply(const Eigen::VectorXd& interior) const { return mat_ * interior; }

private:
    Grid1D grid_;
    double beta_, tau_;
    BoundaryCondition bc_;
    Eigen::SparseMatrix<double> mat_;
};

struct Eigenpair {
    double mu1 = 0.0;
    Profile zeta1;  // positive interior values, ||zeta1||_1 = 1
};

// beta u'''' - (tau + a ||u_x||_2^2) u'' at the interior nodes; the
// boundary entries of the returned profile are zero.
Profile apply_beam(const DeflectionField& u, double beta, double tau, double a,
                   BoundaryCondition bc = BoundaryCondition::clamped);

// Quasilinear curvature operator evaluated by composing centered
// differences of the nested quotient profiles:
//   K(u) = beta d2x[ u_xx / q^{5/2} ] + (5/2) eps^2 beta dx[ u_x u_xx^2 / q^{7/2} ]
//          - tau dx[ u_x / q^{1/2} ],   q = 1 + eps^2 u_x^2.
Profile apply_curvature(const DeflectionField& u, double beta, double tau, double epsilon,
                        BoundaryCondition bc = BoundaryCondition::clamped);

// Principal eigenpair of the BeamOperator on the given grid; converged
// when successive eigenvalue estimates differ by < 1e-12 relative.
Eigenpair principal_eigenpair(double beta, double tau, BoundaryCondition bc,
                              const Grid1D& grid);

// Generic principal (smallest real) eigenvalue of a dense matrix by
// inverse power iteration with shift; used for linearized stability.
double smallest_eigenvalue(const Eigen::MatrixXd& mat, int max_iter = 500,
                           double tol = 1e-12);

}  // namespace mems
