#pragma once

// Grids, parameters, field containers and discrete norms shared by all
// solvers. Everything here is immutable after construction and safe to
// share across threads.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mems {

// Thrown when the geometry degenerates (min u too close to -1): the
// transformed elliptic coefficients blow up like (1+u)^-2.
class SingularGeometryError : public std::runtime_error {
public:
    explicit SingularGeometryError(const std::string& what)
        : std::runtime_error(what) {}
};

// Thrown on linear/nonlinear solver breakdown or non-convergence.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

enum class BoundaryCondition { clamped, pinned };

enum class RhsKind {
    free_boundary,  // nonlocal g_eps(u) from the elliptic subproblem
    small_gap,      // 1/(1+u)^2
    capacitive,     // 1/[(1+u)^2 (1+chi * int dx/(1+u))]
    fringing,       // (1+delta |u_x|^2)/(1+u)^2
    force_law       // mu/(1+u)^m
};

struct Params {
    double epsilon = 0.1;  // aspect ratio, > 0 for the free-boundary model
    double lambda = 0.0;   // voltage parameter
    double beta = 1.0;     // bending coefficient
    double tau = 0.0;      // tension coefficient
    double gamma = 0.0;    // inertia coefficient
    double a = 0.0;        // self-stretching coefficient
    BoundaryCondition bc = BoundaryCondition::clamped;
    RhsKind rhs = RhsKind::free_boundary;
    double chi = 0.0;    // capacitive coupling ratio
    double delta = 0.0;  // fringing-field correction weight
    double mu = 1.0;     // force-law weight
    double m = 4.0;      // force-law exponent

    void validate() const;
};

// Uniform nodes on [-1,1]: x_0 = -1, x_{n+1} = 1, n interior nodes.
struct Grid1D {
    int n = 0;
    double h = 0.0;
    std::vector<double> x;  // n+2 nodes including endpoints

    Grid1D() = default;
    explicit Grid1D(int n_interior);
    int num_nodes() const { return n + 2; }
};

// Tensor grid on the fixed rectangle Omega = [-1,1] x [0,1]; x-nodes
// coincide with the Grid1D nodes of matching n.
struct Grid2D {
    int nx = 0;
    int neta = 0;
    double hx = 0.0;
    double heta = 0.0;
    std::vector<double> x;    // nx+2 nodes
    std::vector<double> eta;  // neta+2 nodes

    Grid2D() = default;
    Grid2D(int nx_interior, int neta_interior);
};

constexpr int kMinGridNodes = 8;

std::pair<Grid1D, Grid2D> make_grids(int n, int neta);

// Plate deflection sampled at the Grid1D nodes. Admissible states keep
// min u > -1 and vanish at +-1.
struct DeflectionField {
    Grid1D grid;
    std::vector<double> values;  // grid.num_nodes() entries

    DeflectionField() = default;
    explicit DeflectionField(const Grid1D& g)
        : grid(g), values(g.num_nodes(), 0.0) {}
    DeflectionField(const Grid1D& g, std::vector<double> v);

    double min() const;
    // Rejects min u <= -1 or nonzero boundary values.
    void validate() const;
};

// Generic nodal samples of a function of x on a Grid1D (residuals,
// eigenfunctions, g_eps(u), ...).
struct Profile {
    Grid1D grid;
    std::vector<double> values;

    Profile() = default;
    explicit Profile(const Grid1D& g) : grid(g), values(g.num_nodes(), 0.0) {}
    Profile(const Grid1D& g, std::vector<double> v);
};

struct Norms {
    double l2 = 0.0;
    double h1_seminorm = 0.0;
    double h2_seminorm = 0.0;
    double min_u = 0.0;
};

// Trapezoidal L2 norm, difference-quotient H1/H2 seminorms, nodal min.
Norms discrete_norms(const DeflectionField& u);

// Trapezoidal quadrature of nodal samples over [-1,1].
double trapz(const Grid1D& grid, const std::vector<double>& f);

// Centered first/second difference quotients at the nodes; one-sided
// second-order stencils at the endpoints.
std::vector<double> diff1(const Grid1D& grid, const std::vector<double>& f);
std::vector<double> diff2(const Grid1D& grid, const std::vector<double>& f);

}  // namespace mems
