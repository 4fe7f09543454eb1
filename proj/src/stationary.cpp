#include "mems/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "mems/elliptic.hpp"
#include "mems/operators.hpp"

namespace mems {

namespace {

Eigen::VectorXd interior(const std::vector<double>& full) {
    const int n = static_cast<int>(full.size()) - 2;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = full[i + 1];
    return v;
}

DeflectionField from_interior(const Grid1D& g, const Eigen::VectorXd& v) {
    DeflectionField u(g);
    for (int i = 0; i < g.n; ++i) u.values[i + 1] = v[i];
    return u;
}

double inf_norm(const Profile& r) {
    double m = 0.0;
    for (double v : r.values) m = std::max(m, std::abs(v));
    return m;
}

void check_gap(const DeflectionField& u) {
    if (u.min() <= -1.0 + kTouchdownGuard) {
        throw SingularGeometryError("stationary: min u at the touchdown guard");
    }
}

// dN/du as a dense matrix for the local/capacitive RHS kinds.
Eigen::MatrixXd local_rhs_jacobian(const DeflectionField& u, const Params& p) {
    const Grid1D& g = u.grid;
    const int n = g.n;
    const double h = g.h;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);

    switch (p.rhs) {
        case RhsKind::small_gap: {
            for (int i = 0; i < n; ++i) {
                const double w = 1.0 + u.values[i + 1];
                J(i, i) = -2.0 / (w * w * w);
            }
            break;
        }
        case RhsKind::force_law: {
            for (int i = 0; i < n; ++i) {
                const double w = 1.0 + u.values[i + 1];
                J(i, i) = -p.m * p.mu * std::pow(w, -p.m - 1.0);
            }
            break;
        }
        case RhsKind::fringing: {
            auto ux = diff1(g, u.values);
            for (int i = 0; i < n; ++i) {
                const double w = 1.0 + u.values[i + 1];
                const double uxi = ux[i + 1];
                J(i, i) = -2.0 * (1.0 + p.delta * uxi * uxi) / (w * w * w);
                const double c = 2.0 * p.delta * uxi / (w * w) / (2.0 * h);
                if (i + 1 < n) J(i, i + 1) += c;
                if (i - 1 >= 0) J(i, i - 1) -= c;
            }
            break;
        }
        case RhsKind::capacitive: {
            std::vector<double> inv(g.num_nodes());
            for (int i = 0; i < g.num_nodes(); ++i) inv[i] = 1.0 / (1.0 + u.values[i]);
            const double S = 1.0 + p.chi * trapz(g, inv);
            for (int i = 0; i < n; ++i) {
                const double wi = 1.0 + u.values[i + 1];
                J(i, i) = -2.0 / (wi * wi * wi) / S;
                for (int j = 0; j < n; ++j) {
                    const double wj = 1.0 + u.values[j + 1];
                    const double dS = -p.chi * h / (wj * wj);
                    J(i, j) -= dS / (wi * wi * S * S);
                }
            }
            break;
        }
        case RhsKind::free_boundary:
            throw std::logic_error("local_rhs_jacobian: free-boundary kind is nonlocal");
    }
    return J;
}

// dN/du by forward-difference columns; each column of the
// free-boundary kind costs one elliptic solve.
Eigen::MatrixXd fd_rhs_jacobian(const DeflectionField& u, const Params& p,
                                const StationaryOptions& opt) {
    const int n = u.grid.n;
    Profile base = rhs_nonlinearity(u, p, opt);
    Eigen::MatrixXd J(n, n);
    for (int j = 0; j < n; ++j) {
        DeflectionField up = u;
        double d = opt.fd_step * (1.0 + std::abs(u.values[j + 1]));
        if (u.values[j + 1] + d <= -1.0 + 2.0 * kTouchdownGuard) d = -d;
        up.values[j + 1] += d;
        Profile pert = rhs_nonlinearity(up, p, opt);
        for (int i = 0; i < n; ++i) {
            J(i, j) = (pert.values[i + 1] - base.values[i + 1]) / d;
        }
    }
    return J;
}

}  // namespace

Profile rhs_nonlinearity(const DeflectionField& u, const Params& p,
                         const StationaryOptions& opt) {
    check_gap(u);
    const Grid1D& g = u.grid;
    Profile N(g);
    switch (p.rhs) {
        case RhsKind::free_boundary:
            return compute_g(u, p.epsilon, opt.neta);
        case RhsKind::small_gap: {
            for (int i = 0; i < g.num_nodes(); ++i) {
                const double w = 1.0 + u.values[i];
                N.values[i] = 1.0 / (w * w);
            }
            break;
        }
        case RhsKind::capacitive: {
            std::vector<double> inv(g.num_nodes());
            for (int i = 0; i < g.num_nodes(); ++i) inv[i] = 1.0 / (1.0 + u.values[i]);
            const double S = 1.0 + p.chi * trapz(g, inv);
            for (int i = 0; i < g.num_nodes(); ++i) N.values[i] = inv[i] * inv[i] / S;
            break;
        }
        case RhsKind::fringing: {
            auto ux = diff1(g, u.values);
            for (int i = 0; i < g.num_nodes(); ++i) {
                const double w = 1.0 + u.values[i];
                N.values[i] = (1.0 + p.delta * ux[i] * ux[i]) / (w * w);
            }
            break;
        }
        case RhsKind::force_law: {
            for (int i = 0; i < g.num_nodes(); ++i) {
                N.values[i] = p.mu * std::pow(1.0 + u.values[i], -p.m);
            }
            break;
        }
    }
    return N;
}

Profile stationary_residual(const DeflectionField& u, const Params& p,
                            const StationaryOptions& opt) {
    Profile r = apply_beam(u, p.beta, p.tau, p.a, p.bc);
    Profile N = rhs_nonlinearity(u, p, opt);
    for (int i = 1; i <= u.grid.n; ++i) r.values[i] += p.lambda * N.values[i];
    r.values.front() = 0.0;
    r.values.back() = 0.0;
    return r;
}

Eigen::MatrixXd stationary_jacobian(const DeflectionField& u, const Params& p,
                                    const StationaryOptions& opt) {
    const Grid1D& g = u.grid;
    double tension = p.tau;
    if (p.a != 0.0) {
        auto ux = diff1(g, u.values);
        std::vector<double> ux2(ux.size());
        for (size_t i = 0; i < ux.size(); ++i) ux2[i] = ux[i] * ux[i];
        tension += p.a * trapz(g, ux2);
    }
    BeamOperator A(g, p.beta, tension, p.bc);
    Eigen::MatrixXd J = Eigen::MatrixXd(A.matrix());
    if (p.lambda != 0.0) {
        Eigen::MatrixXd dN = (p.rhs == RhsKind::free_boundary)
                                 ? fd_rhs_jacobian(u, p, opt)
                                 : local_rhs_jacobian(u, p);
        J += p.lambda * dN;
    }
    return J;
}

namespace {

// One damped Newton solve at fixed lambda; returns the solution
// interior vector and leaves the final Jacobian in J_out when asked.
Eigen::VectorXd newton_fixed_lambda(const Params& p, const DeflectionField& guess,
                                    const StationaryOptions& opt,
                                    Eigen::MatrixXd* J_out) {
    const Grid1D& g = guess.grid;
    DeflectionField u = guess;
    check_gap(u);

    Profile r = stationary_residual(u, p, opt);
    double rn = inf_norm(r);
    Eigen::MatrixXd J;
    for (int it = 0; it < opt.max_newton; ++it) {
        if (rn < opt.newton_tol) {
            if (J_out) *J_out = stationary_jacobian(u, p, opt);
            return interior(u.values);
        }
        J = stationary_jacobian(u, p, opt);
        Eigen::VectorXd rhs = -interior(r.values);
        Eigen::VectorXd d = J.partialPivLu().solve(rhs);
        if (!d.allFinite()) throw SolverError("solve_stationary: singular Jacobian");

        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 12; ++bt, alpha *= 0.5) {
            DeflectionField trial = from_interior(g, interior(u.values) + alpha * d);
            if (trial.min() <= -1.0 + 2.0 * kTouchdownGuard) continue;
            Profile rt;
            try {
                rt = stationary_residual(trial, p, opt);
            } catch (const SingularGeometryError&) {
                continue;
            }
            const double rtn = inf_norm(rt);
            if (rtn < rn * (1.0 - 1e-4 * alpha) || rtn < opt.newton_tol) {
                u = trial;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw SolverError("solve_stationary: line search stalled at residual " +
                              std::to_string(rn));
        }
    }
    throw SolverError("solve_stationary: no convergence after iteration cap");
}

}  // namespace

double mechanical_energy(const DeflectionField& u, const Params& p) {
    auto ux = diff1(u.grid, u.values);
    auto uxx = diff2(u.grid, u.values);
    std::vector<double> i1(ux.size()), i2(ux.size());
    for (size_t i = 0; i < ux.size(); ++i) {
        i1[i] = ux[i] * ux[i];
        i2[i] = uxx[i] * uxx[i];
    }
    return 0.5 * p.beta * trapz(u.grid, i2) + 0.5 * p.tau * trapz(u.grid, i1);
}

double model_electrostatic_energy(const DeflectionField& u, const Params& p, int neta) {
    if (p.rhs == RhsKind::free_boundary) {
        return electrostatic_energy(u, p.epsilon, neta);
    }
    std::vector<double> inv(u.grid.num_nodes());
    for (int i = 0; i < u.grid.num_nodes(); ++i) inv[i] = 1.0 / (1.0 + u.values[i]);
    return trapz(u.grid, inv);
}

double linearized_stability(BranchPoint& bp, const Params& p,
                            const StationaryOptions& opt) {
    Params q = p;
    q.lambda = bp.lambda;
    Eigen::MatrixXd J = stationary_jacobian(bp.u, q, opt);
    bp.principal_ev = smallest_eigenvalue(J);
    bp.stable = bp.principal_ev > 0.0;
    return bp.principal_ev;
}

BranchPoint solve_stationary(const Params& p, const DeflectionField& guess,
                             const StationaryOptions& opt) {
    p.validate();
    Eigen::MatrixXd J;
    Eigen::VectorXd sol = newton_fixed_lambda(p, guess, opt, &J);

    BranchPoint bp;
    bp.lambda = p.lambda;
    bp.u = from_interior(guess.grid, sol);
    bp.min_u = bp.u.min();
    bp.Em = mechanical_energy(bp.u, p);
    bp.Ee = model_electrostatic_energy(bp.u, p, opt.neta);
    bp.residual_norm = inf_norm(stationary_residual(bp.u, p, opt));
    bp.principal_ev = smallest_eigenvalue(J);
    bp.stable = bp.principal_ev > 0.0;
    return bp;
}

namespace {

struct ContinuationState {
    Eigen::VectorXd u;  // interior values
    double lambda = 0.0;
};

// Bordered corrector: Newton on the residual augmented with the
// arclength normalization  theta t_u . (u - u_pred) + t_l (l - l_pred) = 0.
bool arclength_corrector(const Params& base, const Grid1D& g,
                         const StationaryOptions& opt, const Eigen::VectorXd& tu,
                         double tl, double theta, ContinuationState& state) {
    const int n = g.n;
    const Eigen::VectorXd u_pred = state.u;
    const double l_pred = state.lambda;

    for (int it = 0; it < opt.max_newton; ++it) {
        if (state.lambda < -1e-12) return false;
        DeflectionField u = from_interior(g, state.u);
        if (u.min() <= -1.0 + 2.0 * kTouchdownGuard) return false;

        Params p = base;
        p.lambda = std::max(state.lambda, 0.0);
        Profile r, N;
        try {
            r = stationary_residual(u, p, opt);
            N = rhs_nonlinearity(u, p, opt);
        } catch (const SingularGeometryError&) {
            return false;
        }
        const double arc = theta * tu.dot(state.u - u_pred) + tl * (state.lambda - l_pred);
        const double rn = inf_norm(r);
        // scale the residual tolerance with the forcing: deep on the branch
        // the nonlinearity is O((1+u)^-2) and an absolute tolerance would sit
        // below the rounding floor of the residual evaluation
        const double scale = 1.0 + p.lambda * inf_norm(N);
        if (rn < opt.newton_tol * scale && std::abs(arc) < opt.newton_tol * 10.0) {
            return true;
        }

        Eigen::MatrixXd M(n + 1, n + 1);
        try {
            M.topLeftCorner(n, n) = stationary_jacobian(u, p, opt);
        } catch (const SingularGeometryError&) {
            return false;
        }
        M.topRightCorner(n, 1) = interior(N.values);
        M.bottomLeftCorner(1, n) = theta * tu.transpose();
        M(n, n) = tl;

        Eigen::VectorXd rhs(n + 1);
        rhs.head(n) = -interior(r.values);
        rhs[n] = -arc;
        Eigen::VectorXd d = M.partialPivLu().solve(rhs);
        if (!d.allFinite()) return false;

        // stiff operators (beta/h^4) put the rounding floor of the residual
        // above an absolute tolerance; a vanishing Newton update means the
        // iterate is converged to working precision
        const double step_scale =
            1.0 + state.u.lpNorm<Eigen::Infinity>() + std::abs(state.lambda);
        if (d.lpNorm<Eigen::Infinity>() < 1e-12 * step_scale) {
            state.u += d.head(n);
            state.lambda += d[n];
            return true;
        }

        // damp the update so the iterate stays above the ground plate
        double alpha = 1.0;
        bool admissible = false;
        for (int bt = 0; bt < 30; ++bt, alpha *= 0.5) {
            DeflectionField trial = from_interior(g, state.u + alpha * d.head(n));
            if (trial.min() > -1.0 + 2.0 * kTouchdownGuard) {
                admissible = true;
                break;
            }
        }
        if (!admissible) return false;
        state.u += alpha * d.head(n);
        state.lambda += alpha * d[n];
    }
    return false;
}

BranchPoint make_point(const Params& base, const Grid1D& g, const ContinuationState& st,
                       double s, const StationaryOptions& opt, bool with_stability) {
    BranchPoint bp;
    bp.s = s;
    bp.lambda = st.lambda;
    bp.u = from_interior(g, st.u);
    bp.min_u = bp.u.min();
    Params p = base;
    p.lambda = st.lambda;
    bp.Em = mechanical_energy(bp.u, p);
    bp.Ee = model_electrostatic_energy(bp.u, p, opt.neta);
    bp.residual_norm = inf_norm(stationary_residual(bp.u, p, opt));
    if (with_stability) linearized_stability(bp, base, opt);
    return bp;
}

}  // namespace

BranchDiagram continue_branch(const Params& p, int n_interior, double step,
                              int max_points, const StationaryOptions& opt) {
    p.validate();
    if (step <= 0.0) throw std::invalid_argument("continue_branch: step must be positive");
    if (max_points < 2) throw std::invalid_argument("continue_branch: max_points < 2");
    Grid1D g(n_interior);
    const int n = g.n;
    const double theta = g.h;  // L2-weighted arclength metric

    BranchDiagram diag;
    ContinuationState cur{Eigen::VectorXd::Zero(n), 0.0};
    diag.points.push_back(make_point(p, g, cur, 0.0, opt, opt.compute_stability));

    Eigen::VectorXd tu = Eigen::VectorXd::Zero(n);
    double tl = 1.0;  // tangent out of (0, 0): pure lambda direction
    double ds = step;
    const double ds_min = step * std::pow(2.0, -14);
    double s = 0.0;
    int folds_seen = 0;
    double prev_dl = 1.0;

    while (static_cast<int>(diag.points.size()) < max_points) {
        ContinuationState pred{cur.u + ds * tu, cur.lambda + ds * tl};
        ContinuationState trial = pred;
        bool ok = arclength_corrector(p, g, opt, tu, tl, theta, trial);
        if (ok) {
            // the arclength constraint is a hyperplane, so a stiff corrector
            // can converge to a distant point on it and silently retrace the
            // branch; reject anything far from the predicted neighborhood
            const double dist = std::sqrt(theta * (trial.u - cur.u).squaredNorm() +
                                          (trial.lambda - cur.lambda) *
                                              (trial.lambda - cur.lambda));
            if (dist > 3.0 * ds) ok = false;
            // and reject steps that reverse orientation along the branch
            const double along = theta * tu.dot(trial.u - cur.u) +
                                 tl * (trial.lambda - cur.lambda);
            if (along <= 0.0) ok = false;
        }
        if (!ok) {
            ds *= 0.5;
            if (ds < ds_min) {
                if (diag.points.size() > 2) break;
                throw SolverError("continue_branch: corrector failed below minimum step");
            }
            continue;
        }

        s += ds;
        const double dl = trial.lambda - cur.lambda;
        // secant tangent for the next prediction
        Eigen::VectorXd du = trial.u - cur.u;
        const double nrm = std::sqrt(theta * du.squaredNorm() + dl * dl);
        tu = du / nrm;
        tl = dl / nrm;
        cur = trial;
        diag.points.push_back(make_point(p, g, cur, s, opt, opt.compute_stability));

        const int k = static_cast<int>(diag.points.size()) - 1;
        if (dl * prev_dl < 0.0) {
            diag.fold_indices.push_back(k - 1);
            if (++folds_seen == 1) {
                // quadratic fit of lambda(s) through the three points
                // bracketing the sign change
                const auto& a = diag.points[k - 2];
                const auto& b = diag.points[k - 1];
                const auto& c = diag.points[k];
                const double s1 = a.s - b.s, s2 = c.s - b.s;
                const double f1 = a.lambda - b.lambda, f2 = c.lambda - b.lambda;
                const double det = s1 * s2 * (s1 - s2);
                if (det != 0.0) {
                    const double qa = (f1 * s2 - f2 * s1) / det;
                    const double qb = (f2 * s1 * s1 - f1 * s2 * s2) / det;
                    diag.lambda_stat =
                        (qa != 0.0) ? b.lambda - qb * qb / (4.0 * qa) : b.lambda;
                } else {
                    diag.lambda_stat = b.lambda;
                }
            }
        }
        prev_dl = dl;

        if (diag.points.back().min_u < -1.0 + kContinuationGuard) {
            diag.reached_touchdown_guard = true;
            break;
        }
        if (folds_seen > 0 && cur.lambda < 1e-4) break;

        if (ds < step) ds = std::min(step, ds * 1.4);
    }

    // linear extrapolation of lambda to min u = -1 from the last two points
    if (diag.points.size() >= 2) {
        const auto& a = diag.points[diag.points.size() - 2];
        const auto& b = diag.points.back();
        const double dm = b.min_u - a.min_u;
        diag.endpoint_lambda =
            (dm != 0.0) ? b.lambda + (b.lambda - a.lambda) / dm * (-1.0 - b.min_u)
                        : b.lambda;
    }
    return diag;
}

double pull_in_voltage(const Params& p, int n_interior, const StationaryOptions& opt) {
    StationaryOptions fast = opt;
    fast.compute_stability = false;

    BranchDiagram diag = continue_branch(p, n_interior, opt.continuation_step,
                                         opt.continuation_max_points, fast);
    if (diag.fold_indices.empty()) {
        throw SolverError("pull_in_voltage: no fold found within max_points");
    }

    // best solvable point: max lambda along the sampled branch
    const Grid1D g(n_interior);
    int best = 0;
    for (size_t i = 0; i < diag.points.size(); ++i) {
        if (diag.points[i].lambda > diag.points[best].lambda) best = static_cast<int>(i);
    }
    double lo = diag.points[best].lambda;
    DeflectionField guess = diag.points[best].u;

    auto solvable = [&](double lambda, DeflectionField& out) {
        Params q = p;
        q.lambda = lambda;
        try {
            Eigen::VectorXd sol = newton_fixed_lambda(q, guess, fast, nullptr);
            out = from_interior(g, sol);
            return true;
        } catch (const SolverError&) {
            return false;
        } catch (const SingularGeometryError&) {
            return false;
        }
    };

    // grow an unsolvable upper bound
    double hi = lo * 1.02 + 1e-12;
    DeflectionField sol = guess;
    int grow = 0;
    while (solvable(hi, sol)) {
        lo = hi;
        guess = sol;
        hi *= 1.02;
        if (++grow > 500) {
            throw SolverError("pull_in_voltage: no unsolvable lambda found");
        }
    }

    while (hi - lo > 1e-8 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (solvable(mid, sol)) {
            lo = mid;
            guess = sol;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void write_branch_csv(const BranchDiagram& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "s,lambda,min_u,Em,Ee,principal_ev,stable,fold_flag\n" << std::setprecision(17);
    for (size_t i = 0; i < d.points.size(); ++i) {
        const auto& bp = d.points[i];
        const bool fold = std::find(d.fold_indices.begin(), d.fold_indices.end(),
                                    static_cast<int>(i)) != d.fold_indices.end();
        out << bp.s << ',' << bp.lambda << ',' << bp.min_u << ',' << bp.Em << ','
            << bp.Ee << ',' << bp.principal_ev << ',' << (bp.stable ? 1 : 0) << ','
            << (fold ? 1 : 0) << '\n';
    }
}

}  // namespace mems
