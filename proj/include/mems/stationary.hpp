#pragma once

// Stationary solves for the free-boundary model and its vanishing
// aspect-ratio reductions: damped Newton, pseudo-arclength
// continuation with fold detection, linearized stability.

#include <Eigen/Dense>

#include "mems/core.hpp"

namespace mems {

// Continuation stops once min u drops below -1 + kContinuationGuard;
// the transformed elliptic coefficients blow up beyond that.
constexpr double kContinuationGuard = 1e-3;

struct StationaryOptions {
    int neta = 48;               // eta resolution of the elliptic subproblem
    double newton_tol = 1e-10;   // residual infinity-norm
    int max_newton = 60;
    double fd_step = 1e-7;       // Jacobian finite-difference step
    bool compute_stability = true;
    double continuation_step = 0.05;  // initial arclength step
    int continuation_max_points = 400;
};

struct BranchPoint {
    double s = 0.0;
    double lambda = 0.0;
    DeflectionField u;
    double min_u = 0.0;
    double Em = 0.0;
    double Ee = 0.0;
    double principal_ev = 0.0;
    bool stable = false;
    double residual_norm = 0.0;
};

struct BranchDiagram {
    std::vector<BranchPoint> points;
    std::vector<int> fold_indices;
    double lambda_stat = 0.0;  // lambda at the first fold (0 if none)
    bool reached_touchdown_guard = false;
    // linear-in-s extrapolation of lambda to min u = -1 (endpoint summary,
    // not a solved point)
    double endpoint_lambda = 0.0;
};

// lambda * N(u) for the selected right-hand-side kind (free-boundary
// g_eps via the elliptic module, or the local/nonlocal reductions).
Profile rhs_nonlinearity(const DeflectionField& u, const Params& p,
                         const StationaryOptions& opt = {});

// apply_beam(u) + lambda N(u) at the interior nodes.
Profile stationary_residual(const DeflectionField& u, const Params& p,
                            const StationaryOptions& opt = {});

// Newton Jacobian: analytic beam part plus finite-difference columns
// of the nonlinear part (dense; the free-boundary RHS is nonlocal).
Eigen::MatrixXd stationary_jacobian(const DeflectionField& u, const Params& p,
                                    const StationaryOptions& opt = {});

// Damped Newton at fixed lambda. Throws SolverError on divergence.
BranchPoint solve_stationary(const Params& p, const DeflectionField& guess,
                             const StationaryOptions& opt = {});

// Principal eigenvalue of the linearization at bp; sign writes bp.stable.
double linearized_stability(BranchPoint& bp, const Params& p,
                            const StationaryOptions& opt = {});

// Pseudo-arclength predictor-corrector from (lambda, u) = (0, 0).
BranchDiagram continue_branch(const Params& p, int n_interior, double step,
                              int max_points, const StationaryOptions& opt = {});

// lambda at the first fold, refined by bisection on corrector
// solvability to relative width 1e-8.
double pull_in_voltage(const Params& p, int n_interior,
                       const StationaryOptions& opt = {});

// Mechanical energy (beta/2)||u_xx||^2 + (tau/2)||u_x||^2.
double mechanical_energy(const DeflectionField& u, const Params& p);

// Electrostatic energy for the active model: elliptic solve for the
// free-boundary kind, closed form int dx/(1+u) otherwise.
double model_electrostatic_energy(const DeflectionField& u, const Params& p, int neta);

void write_branch_csv(const BranchDiagram& d, const std::string& path);

}  // namespace mems
