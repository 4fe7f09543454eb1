#pragma once

// Transformed electrostatic potential on the fixed rectangle
// Omega = (-1,1) x (0,1), boundary trace nonlinearity g_eps(u), and
// electrostatic-energy diagnostics.
//
// The moving-domain Laplace problem eps^2 psi_xx + psi_zz = 0 on
// Omega(u) = { -1 < z < u(x) } is pulled back through
//   psi(x, z) = Phi(x, eta) + eta,   eta = (1+z)/(1+u(x)),
// which yields a zero-Dirichlet problem for Phi with variable
// coefficients singular at touchdown (1+u -> 0).

#include <Eigen/SparseCore>

#include "mems/core.hpp"

namespace mems {

// Refuse assembly this close to touchdown; coefficients ~ (1+u)^-2.
constexpr double kTouchdownGuard = 1e-8;

struct PotentialField {
    Grid2D grid;
    // row-major over all (nx+2) x (neta+2) nodes, zero on the boundary
    std::vector<double> values;

    double at(int i, int j) const { return values[i * (grid.neta + 2) + j]; }
    double& at(int i, int j) { return values[i * (grid.neta + 2) + j]; }
};

struct EllipticSystem {
    Grid2D grid;
    Eigen::SparseMatrix<double> op;  // interior unknowns, row-major ordering
    Eigen::VectorXd rhs;
    // geometry records used by the trace/energy routines
    std::vector<double> w;    // 1 + u at the x-nodes
    std::vector<double> wx;   // u_x
    std::vector<double> wxx;  // u_xx
    double epsilon = 0.0;
};

// Chain-rule coefficients of the pulled-back operator, second-order
// centered stencils (four-point stencil for the mixed derivative).
EllipticSystem assemble_transformed(const DeflectionField& u, double epsilon, int neta);

// Sparse direct solve; relative residual < 1e-10 enforced.
PotentialField solve_potential(const EllipticSystem& sys);

// Samples of psi(x, z) on the mapped grid z = (1+u(x)) eta - 1,
// row-major like PotentialField.
struct MappedPotential {
    Grid2D grid;                 // (x, eta) indexing; z = (1+u) eta - 1
    std::vector<double> z;       // mapped vertical coordinate per node
    std::vector<double> values;  // psi at the mapped nodes
};

MappedPotential reconstruct_psi(const PotentialField& phi, const DeflectionField& u);

// g_eps(u)(x) = (1 + eps^2 u_x^2) |psi_z(x, u(x))|^2 with the trace
// psi_z = (1 + Phi_eta(x,1))/(1+u); one-sided second-order difference
// for Phi_eta at eta = 1.
Profile compute_g(const DeflectionField& u, double epsilon, int neta);

// Variant reusing an already assembled/solved potential.
Profile compute_g(const EllipticSystem& sys, const PotentialField& phi);

// Dirichlet integral of the reconstructed psi over Omega(u) with the
// area Jacobian (1+u).
double electrostatic_energy(const DeflectionField& u, double epsilon, int neta);
double electrostatic_energy(const EllipticSystem& sys, const PotentialField& phi);

struct EnergyBounds {
    double lower = 0.0;  // int dx/(1+u)
    double upper = 0.0;  // int (1 + eps^2 u_x^2)/(1+u) dx
};

EnergyBounds energy_bounds(const DeflectionField& u, double epsilon);

// |E_e(u) - (2 - int u (1+eps^2 u_x^2) psi_z(x,u(x)) dx)|
double energy_identity_residual(const DeflectionField& u, double epsilon, int neta);

// CSV dump of Phi (columns x, eta, value) or reconstructed psi
// (columns x, z, value).
void write_potential_csv(const PotentialField& phi, const std::string& path);
void write_psi_csv(const MappedPotential& psi, const std::string& path);

}  // namespace mems
