#pragma once

// Independent shooting oracle for the second-order vanishing
// aspect-ratio model and the pull-in voltage sweep harness.

#include <string>
#include <vector>

#include "mems/core.hpp"

namespace mems {

// Shooting for -tau u'' = -lambda/(1+u)^2, u(+-1) = 0, built on the
// scaled problem w'' = (1+w)^{-2}, w(0) = m, w'(0) = 0: if x*(m) is
// the first root of w, then lambda(m) = tau x*(m)^2 and
// u(x) = w(x*(m) |x|) solves the original equation.
struct ShootingResult {
    std::vector<double> roots_m;               // centre deflections u(0)
    std::vector<DeflectionField> solutions;    // sampled on Grid1D(n)
    double fold_lambda = 0.0;                  // max over m of lambda(m)
};

// lambda(m) for a single shot.
double shooting_lambda(double m, double tau, double tol = 1e-12);

// Fold of lambda(m) by golden-section maximization.
double shooting_fold(double tau, double tol = 1e-12);

ShootingResult shooting_oracle(double lambda, double tau, int n_interior,
                               bool want_fold = true);

struct SweepRow {
    double epsilon = 0.0;
    double gamma = 0.0;
    double beta = 0.0;
    double tau = 0.0;
    double lambda_stat = 0.0;
    double lambda_dyn = 0.0;
    std::string status;  // "ok" or the failure text
};

struct SweepTable {
    std::vector<SweepRow> rows;
    double resolution = 0.0;  // relative lambda bisection width
};

struct RunConfig {
    Params base;                        // rhs kind, beta, tau, bc, ...
    std::vector<double> eps_values;     // row grid: epsilon x gamma
    std::vector<double> gamma_values;
    int n = 31;
    int neta = 24;
    double dt = 2e-3;
    double T_long = 50.0;               // finite-horizon proxy for "global"
    double lambda_resolution = 0.01;    // relative width of the dyn bisection
    std::string out_path;               // CSV destination ("" = no file)
    int workers = 1;
};

// For each (epsilon, gamma) tuple: lambda_stat from the continuation
// fold, lambda_dyn by bisection between global-up-to-T_long and
// touchdown-before-T_long from rest. Rows are computed by a bounded
// worker pool and written incrementally in index order; the CSV is
// finalized with an atomic rename.
SweepTable sweep_pull_in(const RunConfig& cfg);

void write_sweep_csv(const SweepTable& table, const std::string& path);

}  // namespace mems
