#pragma once

// Time integration of the damped parabolic (gamma = 0) and hyperbolic
// (gamma > 0) evolutions with the stiff linear operator implicit and
// the nonlinearity explicit; touchdown detection, energy ledger,
// singularity functional, and the vanishing-epsilon / vanishing-gamma
// limit studies.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mems/core.hpp"

namespace mems {

// Stop the evolution (touchdown) once min u < -1 + kTouchdownStop.
constexpr double kTouchdownStop = 1e-3;

struct EvolutionState {
    double t = 0.0;
    DeflectionField u;
    Profile v;  // gamma * du/dt; all zeros when gamma = 0
};

struct TouchdownReport {
    bool touched = false;
    double Tm_estimate = 0.0;  // touchdown time (bisection-refined) or final t
    std::vector<int> touchdown_nodes;       // argmin nodes at the stop
    std::vector<std::pair<double, double>> min_history;  // (t, min u)
};

struct EnergyLedger {
    std::vector<double> times;
    std::vector<double> total;        // E(u) = Em - lambda * Ee
    std::vector<double> kinetic;      // (gamma^2/2) ||du/dt||^2
    std::vector<double> dissipation;  // cumulative int ||du/dt||^2
    std::vector<double> balance;      // |E + kinetic + dissipation - E(0)|
};

struct EvolutionResult {
    std::vector<EvolutionState> snapshots;
    EvolutionState final_state;
    TouchdownReport touchdown;
    EnergyLedger ledger;
};

struct EvolutionOptions {
    int neta = 48;          // eta resolution for the free-boundary forcing
    int snapshot_every = 0; // 0: keep only initial/final snapshots
    // invoked once per recorded step with the state and the cached
    // nonlinearity N(u); used by the limit studies
    std::function<void(const EvolutionState&, const Profile&)> observer;
};

// One implicit-explicit step. gamma = 0: (I + dt A) u+ = u - dt F(u);
// gamma > 0: damping and A implicit on the velocity update, nonlinear
// forcing explicit; reduces to the parabolic scheme as gamma -> 0.
EvolutionState step(const EvolutionState& state, double dt, const Params& p,
                    const EvolutionOptions& opt = {});

// Integrate from `init` (or rest, u = 0) until t = T or touchdown.
EvolutionResult evolve(const Params& p, double T, double dt, int n_interior,
                       const EvolutionOptions& opt = {});
EvolutionResult evolve_from(const Params& p, double T, double dt,
                            const EvolutionState& init,
                            const EvolutionOptions& opt = {});

// E(u) = (beta/2)||u_xx||^2 + (tau/2)||u_x||^2 - lambda * Ee(u).
double energy_total(const DeflectionField& u, const Params& p, int neta = 48);

// E_alpha(u) = int phi1 (u + (alpha/2) u^2) dx with phi1 the
// L1-normalized principal eigenfunction of -u'' (beta = 0, tau = 1).
double singularity_functional(const DeflectionField& u, double alpha);

struct ConvergenceReport {
    std::vector<double> params;         // the epsilon or gamma values
    std::vector<double> err_primary;    // sup-t Sobolev trajectory distance
    std::vector<double> err_secondary;  // sup-t g-error or potential distance

    bool strictly_decreasing() const;
};

// Free-boundary trajectories at each epsilon against the small-gap
// (epsilon = 0) trajectory on the shared grid: sup-t H1 distance and
// sup-t L2 norm of g_eps(u) - (1+u)^-2.
ConvergenceReport limit_study_epsilon(const Params& p, const std::vector<double>& eps_list,
                                      double T0, double dt, int n_interior,
                                      const EvolutionOptions& opt = {});

// Trajectories at each gamma against the gamma = 0 trajectory:
// sup-t H2 distance of u and sup-t L2 distance of the transformed
// potential (zero for the explicit-potential reductions).
ConvergenceReport limit_study_gamma(const Params& p, const std::vector<double>& gamma_list,
                                    double T, double dt, int n_interior,
                                    const EvolutionOptions& opt = {});

// CSV columns: t, min_u, E_total, kinetic, dissipation, balance_residual.
void write_ledger_csv(const EnergyLedger& ledger,
                      const std::vector<std::pair<double, double>>& min_history,
                      const std::string& path);

}  // namespace mems
