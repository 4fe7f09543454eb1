#include "mems/elliptic.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <vector>

namespace mems {

namespace {

void check_admissible(const DeflectionField& u) {
    if (u.min() <= -1.0 + kTouchdownGuard) {
        throw SingularGeometryError("elliptic: min u <= -1 + 1e-8, geometry singular");
    }
}

}  // namespace

EllipticSystem assemble_transformed(const DeflectionField& u, double epsilon, int neta) {
    check_admissible(u);
    const int n = u.grid.n;
    Grid2D g2(n, neta);

    EllipticSystem sys;
    sys.grid = g2;
    sys.epsilon = epsilon;
    sys.w.resize(n + 2);
    for (int i = 0; i <= n + 1; ++i) sys.w[i] = 1.0 + u.values[i];
    sys.wx = diff1(u.grid, u.values);
    sys.wxx = diff2(u.grid, u.values);

    const double hx = g2.hx, he = g2.heta;
    const int N = n * neta;
    auto idx = [n](int i, int j) { return (j - 1) * n + (i - 1); };

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(N) * 9);
    sys.rhs = Eigen::VectorXd::Zero(N);

    const double e2 = epsilon * epsilon;
    for (int j = 1; j <= neta; ++j) {
        const double eta = g2.eta[j];
        for (int i = 1; i <= n; ++i) {
            const double w = sys.w[i];
            const double r = sys.wx[i] / w;   // w'/w
            const double rr = sys.wxx[i] / w; // w''/w
            const double etax = -eta * r;
            const double A = e2;
            const double B = 2.0 * e2 * etax;
            const double C = e2 * etax * etax + 1.0 / (w * w);
            const double D = e2 * eta * (2.0 * r * r - rr);
            if (!std::isfinite(A) || !std::isfinite(B) || !std::isfinite(C) ||
                !std::isfinite(D)) {
                throw SingularGeometryError("elliptic: non-finite coefficient");
            }
            const int k = idx(i, j);
            auto add = [&](int ii, int jj, double v) {
                if (ii >= 1 && ii <= n && jj >= 1 && jj <= neta) {
                    trip.emplace_back(k, idx(ii, jj), v);
                }
                // Phi = 0 on the boundary: dropped terms contribute nothing
            };
            add(i - 1, j, A / (hx * hx));
            add(i + 1, j, A / (hx * hx));
            add(i, j, -2.0 * A / (hx * hx));
            add(i, j - 1, C / (he * he));
            add(i, j + 1, C / (he * he));
            add(i, j, -2.0 * C / (he * he));
            const double m = B / (4.0 * hx * he);
            add(i + 1, j + 1, m);
            add(i - 1, j - 1, m);
            add(i + 1, j - 1, -m);
            add(i - 1, j + 1, -m);
            add(i, j + 1, D / (2.0 * he));
            add(i, j - 1, -D / (2.0 * he));
            sys.rhs[k] = -D;
        }
    }
    sys.op.resize(N, N);
    sys.op.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

namespace {

// The sparsity pattern of the transformed operator depends only on the grid
// shape, so the symbolic analysis can be shared across solves (evolution
// refactorizes every step); one cached analysis per thread and shape.
struct AnalyzedLU {
    int nx = -1, neta = -1;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool analyzed = false;
};

}  // namespace

PotentialField solve_potential(const EllipticSystem& sys) {
    thread_local AnalyzedLU cache;
    Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu = cache.lu;
    if (!cache.analyzed || cache.nx != sys.grid.nx || cache.neta != sys.grid.neta) {
        lu.analyzePattern(sys.op);
        cache.nx = sys.grid.nx;
        cache.neta = sys.grid.neta;
        cache.analyzed = true;
    }
    lu.factorize(sys.op);
    if (lu.info() != Eigen::Success) {
        throw SolverError("solve_potential: factorization failed (near-touchdown conditioning?)");
    }
    Eigen::VectorXd sol = lu.solve(sys.rhs);
    if (lu.info() != Eigen::Success) {
        throw SolverError("solve_potential: back-substitution failed");
    }
    const double rhs_norm = sys.rhs.norm();
    if (rhs_norm > 0.0) {
        const double rel = (sys.op * sol - sys.rhs).norm() / rhs_norm;
        if (!(rel < 1e-10)) {
            throw SolverError("solve_potential: relative residual " + std::to_string(rel) +
                              " exceeds 1e-10");
        }
    }

    PotentialField phi;
    phi.grid = sys.grid;
    phi.values.assign(static_cast<size_t>(sys.grid.nx + 2) * (sys.grid.neta + 2), 0.0);
    const int n = sys.grid.nx, neta = sys.grid.neta;
    for (int j = 1; j <= neta; ++j) {
        for (int i = 1; i <= n; ++i) {
            phi.at(i, j) = sol[(j - 1) * n + (i - 1)];
        }
    }
    return phi;
}

MappedPotential reconstruct_psi(const PotentialField& phi, const DeflectionField& u) {
    if (phi.grid.nx != u.grid.n) {
        throw std::invalid_argument("reconstruct_psi: incompatible grids");
    }
    MappedPotential out;
    out.grid = phi.grid;
    const int nx = phi.grid.nx + 2, ne = phi.grid.neta + 2;
    out.z.resize(static_cast<size_t>(nx) * ne);
    out.values.resize(static_cast<size_t>(nx) * ne);
    for (int i = 0; i < nx; ++i) {
        const double w = 1.0 + u.values[i];
        for (int j = 0; j < ne; ++j) {
            const double eta = phi.grid.eta[j];
            out.z[i * ne + j] = w * eta - 1.0;
            out.values[i * ne + j] = phi.at(i, j) + eta;
        }
    }
    return out;
}

namespace {

// Phi_eta(x, 1) by the three-point one-sided second-order stencil,
// using Phi(x, 1) = 0.
std::vector<double> trace_phi_eta_top(const PotentialField& phi) {
    const int nx = phi.grid.nx + 2;
    const int jt = phi.grid.neta + 1;
    const double he = phi.grid.heta;
    std::vector<double> t(nx);
    for (int i = 0; i < nx; ++i) {
        t[i] = (3.0 * phi.at(i, jt) - 4.0 * phi.at(i, jt - 1) + phi.at(i, jt - 2)) /
               (2.0 * he);
    }
    return t;
}

}  // namespace

Profile compute_g(const EllipticSystem& sys, const PotentialField& phi) {
    Grid1D g1(sys.grid.nx);
    Profile g(g1);
    auto pe = trace_phi_eta_top(phi);
    const double e2 = sys.epsilon * sys.epsilon;
    for (int i = 0; i <= sys.grid.nx + 1; ++i) {
        const double psz = (1.0 + pe[i]) / sys.w[i];
        g.values[i] = (1.0 + e2 * sys.wx[i] * sys.wx[i]) * psz * psz;
    }
    return g;
}

Profile compute_g(const DeflectionField& u, double epsilon, int neta) {
    auto sys = assemble_transformed(u, epsilon, neta);
    auto phi = solve_potential(sys);
    return compute_g(sys, phi);
}

double electrostatic_energy(const EllipticSystem& sys, const PotentialField& phi) {
    const int nx = sys.grid.nx + 2, ne = sys.grid.neta + 2;
    const double hx = sys.grid.hx, he = sys.grid.heta;
    const double e2 = sys.epsilon * sys.epsilon;

    auto phi_at = [&](int i, int j) { return phi.at(i, j); };
    double total = 0.0;
    for (int i = 0; i < nx; ++i) {
        const double w = sys.w[i];
        for (int j = 0; j < ne; ++j) {
            double px, pe;
            if (i == 0)
                px = (-3.0 * phi_at(0, j) + 4.0 * phi_at(1, j) - phi_at(2, j)) / (2.0 * hx);
            else if (i == nx - 1)
                px = (3.0 * phi_at(i, j) - 4.0 * phi_at(i - 1, j) + phi_at(i - 2, j)) /
                     (2.0 * hx);
            else
                px = (phi_at(i + 1, j) - phi_at(i - 1, j)) / (2.0 * hx);
            if (j == 0)
                pe = (-3.0 * phi_at(i, 0) + 4.0 * phi_at(i, 1) - phi_at(i, 2)) / (2.0 * he);
            else if (j == ne - 1)
                pe = (3.0 * phi_at(i, j) - 4.0 * phi_at(i, j - 1) + phi_at(i, j - 2)) /
                     (2.0 * he);
            else
                pe = (phi_at(i, j + 1) - phi_at(i, j - 1)) / (2.0 * he);

            const double etax = -sys.grid.eta[j] * sys.wx[i] / w;
            const double psix = px + (pe + 1.0) * etax;
            const double psiz = (pe + 1.0) / w;
            double cell = (e2 * psix * psix + psiz * psiz) * w;
            // trapezoidal weights
            if (i == 0 || i == nx - 1) cell *= 0.5;
            if (j == 0 || j == ne - 1) cell *= 0.5;
            total += cell;
        }
    }
    return total * hx * he;
}

double electrostatic_energy(const DeflectionField& u, double epsilon, int neta) {
    auto sys = assemble_transformed(u, epsilon, neta);
    auto phi = solve_potential(sys);
    return electrostatic_energy(sys, phi);
}

EnergyBounds energy_bounds(const DeflectionField& u, double epsilon) {
    const auto& g = u.grid;
    auto ux = diff1(g, u.values);
    std::vector<double> lo(g.num_nodes()), up(g.num_nodes());
    const double e2 = epsilon * epsilon;
    for (int i = 0; i < g.num_nodes(); ++i) {
        const double w = 1.0 + u.values[i];
        lo[i] = 1.0 / w;
        up[i] = (1.0 + e2 * ux[i] * ux[i]) / w;
    }
    return {trapz(g, lo), trapz(g, up)};
}

double energy_identity_residual(const DeflectionField& u, double epsilon, int neta) {
    auto sys = assemble_transformed(u, epsilon, neta);
    auto phi = solve_potential(sys);
    const double ee = electrostatic_energy(sys, phi);

    auto pe = trace_phi_eta_top(phi);
    const double e2 = epsilon * epsilon;
    std::vector<double> integrand(u.grid.num_nodes());
    for (int i = 0; i < u.grid.num_nodes(); ++i) {
        const double psz = (1.0 + pe[i]) / sys.w[i];
        integrand[i] = u.values[i] * (1.0 + e2 * sys.wx[i] * sys.wx[i]) * psz;
    }
    const double rhs = 2.0 - trapz(u.grid, integrand);
    return std::abs(ee - rhs);
}

void write_potential_csv(const PotentialField& phi, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "x,eta,value\n" << std::setprecision(17);
    for (int i = 0; i < phi.grid.nx + 2; ++i) {
        for (int j = 0; j < phi.grid.neta + 2; ++j) {
            out << phi.grid.x[i] << ',' << phi.grid.eta[j] << ',' << phi.at(i, j) << '\n';
        }
    }
}

void write_psi_csv(const MappedPotential& psi, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "x,z,value\n" << std::setprecision(17);
    const int ne = psi.grid.neta + 2;
    for (int i = 0; i < psi.grid.nx + 2; ++i) {
        for (int j = 0; j < ne; ++j) {
            out << psi.grid.x[i] << ',' << psi.z[i * ne + j] << ',' << psi.values[i * ne + j]
                << '\n';
        }
    }
}

}  // namespace mems
