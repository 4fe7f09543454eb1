#include "mems/evolution.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <fstream>
#include <iomanip>

#include "mems/elliptic.hpp"
#include "mems/operators.hpp"
#include "mems/stationary.hpp"

namespace mems {

namespace {

Eigen::VectorXd interior(const std::vector<double>& full) {
    const int n = static_cast<int>(full.size()) - 2;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = full[i + 1];
    return v;
}

double l2sq(const Grid1D& g, const std::vector<double>& f) {
    std::vector<double> f2(f.size());
    for (size_t i = 0; i < f.size(); ++i) f2[i] = f[i] * f[i];
    return trapz(g, f2);
}

struct ForcingEval {
    Profile N;   // model nonlinearity N(u)
    double Ee;   // matching electrostatic energy
};

ForcingEval eval_forcing(const DeflectionField& u, const Params& p,
                         const EvolutionOptions& opt) {
    ForcingEval out;
    if (p.rhs == RhsKind::free_boundary) {
        auto sys = assemble_transformed(u, p.epsilon, opt.neta);
        auto phi = solve_potential(sys);
        out.N = compute_g(sys, phi);
        out.Ee = electrostatic_energy(sys, phi);
    } else {
        StationaryOptions sopt;
        sopt.neta = opt.neta;
        out.N = rhs_nonlinearity(u, p, sopt);
        std::vector<double> inv(u.grid.num_nodes());
        for (int i = 0; i < u.grid.num_nodes(); ++i) inv[i] = 1.0 / (1.0 + u.values[i]);
        out.Ee = trapz(u.grid, inv);
    }
    return out;
}

// Factorized implicit operator for a fixed step size.
class ImexStepper {
public:
    ImexStepper(const Grid1D& g, const Params& p, double dt) : grid_(g), p_(p), dt_(dt) {
        BeamOperator A(g, p.beta, p.tau, p.bc);
        A_ = A.matrix();
        Eigen::SparseMatrix<double> I(g.n, g.n);
        I.setIdentity();
        Eigen::SparseMatrix<double> M;
        if (p.gamma > 0.0) {
            M = (p.gamma * p.gamma / dt + 1.0) * I + dt * A_;
        } else {
            M = I + dt * A_;
        }
        lu_.compute(M);
        if (lu_.info() != Eigen::Success) {
            throw SolverError("evolution: implicit operator factorization failed");
        }
    }

    // Advance (u, w) with the cached forcing N(u); w = du/dt at nodes.
    void advance(const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                 const Eigen::VectorXd& F, Eigen::VectorXd& u_new,
                 Eigen::VectorXd& w_new) const {
        if (p_.gamma > 0.0) {
            const double g2 = p_.gamma * p_.gamma;
            Eigen::VectorXd rhs = (g2 / dt_) * w - F - A_ * u;
            w_new = lu_.solve(rhs);
            u_new = u + dt_ * w_new;
        } else {
            u_new = lu_.solve(u - dt_ * F);
            w_new = (u_new - u) / dt_;
        }
    }

private:
    Grid1D grid_;
    Params p_;
    double dt_;
    Eigen::SparseMatrix<double> A_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

// lambda N(u) plus the explicit self-stretching contribution.
Eigen::VectorXd explicit_forcing(const DeflectionField& u, const Profile& N,
                                 const Params& p) {
    Eigen::VectorXd F = p.lambda * interior(N.values);
    if (p.a != 0.0) {
        Profile s = apply_beam(u, 0.0, 0.0, p.a, p.bc);
        F += interior(s.values);
    }
    return F;
}

DeflectionField field_from(const Grid1D& g, const Eigen::VectorXd& v) {
    DeflectionField u(g);
    for (int i = 0; i < g.n; ++i) u.values[i + 1] = v[i];
    return u;
}

Profile profile_from(const Grid1D& g, const Eigen::VectorXd& v, double scale) {
    Profile w(g);
    for (int i = 0; i < g.n; ++i) w.values[i + 1] = scale * v[i];
    return w;
}

}  // namespace

EvolutionState step(const EvolutionState& state, double dt, const Params& p,
                    const EvolutionOptions& opt) {
    if (dt <= 0.0) throw std::invalid_argument("step: dt must be positive");
    p.validate();
    const Grid1D& g = state.u.grid;
    ImexStepper st(g, p, dt);
    ForcingEval fe = eval_forcing(state.u, p, opt);
    Eigen::VectorXd F = explicit_forcing(state.u, fe.N, p);

    Eigen::VectorXd u = interior(state.u.values);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(g.n);
    if (p.gamma > 0.0) w = interior(state.v.values) / p.gamma;
    Eigen::VectorXd u_new, w_new;
    st.advance(u, w, F, u_new, w_new);

    EvolutionState out;
    out.t = state.t + dt;
    out.u = field_from(g, u_new);
    out.v = profile_from(g, w_new, p.gamma > 0.0 ? p.gamma : 0.0);
    if (out.u.min() < -1.0 + kTouchdownStop) {
        throw SingularGeometryError("step: touchdown reached (min u < -1 + 1e-3)");
    }
    return out;
}

EvolutionResult evolve_from(const Params& p, double T, double dt,
                            const EvolutionState& init, const EvolutionOptions& opt) {
    if (T <= 0.0 || dt <= 0.0) throw std::invalid_argument("evolve: need T, dt > 0");
    p.validate();
    const Grid1D& g = init.u.grid;
    const int n = g.n;

    ImexStepper st(g, p, dt);

    Eigen::VectorXd u = interior(init.u.values);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    if (p.gamma > 0.0 && init.v.values.size() == static_cast<size_t>(g.num_nodes())) {
        w = interior(init.v.values) / p.gamma;
    }
    double t = init.t;

    EvolutionResult res;
    res.snapshots.push_back({t, field_from(g, u), profile_from(g, w, p.gamma)});

    auto w_norm_sq = [&](const Eigen::VectorXd& wv) {
        Profile pw = profile_from(g, wv, 1.0);
        return l2sq(g, pw.values);
    };

    ForcingEval fe = eval_forcing(field_from(g, u), p, opt);
    double dissipation = 0.0;
    double wsq = w_norm_sq(w);
    const double g2 = p.gamma * p.gamma;
    double E0 = 0.0;
    auto record = [&](double tt, const DeflectionField& uu, double wsq_now) {
        Params q = p;
        const double Em = mechanical_energy(uu, q);
        const double E = Em - p.lambda * fe.Ee;
        const double kin = 0.5 * g2 * wsq_now;
        if (res.ledger.times.empty()) E0 = E + kin;
        res.ledger.times.push_back(tt);
        res.ledger.total.push_back(E);
        res.ledger.kinetic.push_back(kin);
        res.ledger.dissipation.push_back(dissipation);
        res.ledger.balance.push_back(std::abs(E + kin + dissipation - E0));
        res.touchdown.min_history.emplace_back(tt, uu.min());
    };
    record(t, field_from(g, u), wsq);
    if (opt.observer) opt.observer(res.snapshots.front(), fe.N);

    const double thr = -1.0 + kTouchdownStop;
    long step_count = 0;
    while (t < T - 0.5 * dt) {
        Eigen::VectorXd F = explicit_forcing(field_from(g, u), fe.N, p);
        Eigen::VectorXd u_new, w_new;
        st.advance(u, w, F, u_new, w_new);
        DeflectionField u_field = field_from(g, u_new);

        if (u_field.min() < thr) {
            // bisection-refine the touchdown time within this step
            double lo = 0.0, hi = dt;
            Eigen::VectorXd us, ws;
            for (int it = 0; it < 50 && hi - lo > 1e-14 * dt; ++it) {
                const double mid = 0.5 * (lo + hi);
                ImexStepper probe(g, p, mid);
                probe.advance(u, w, F, us, ws);
                if (field_from(g, us).min() < thr) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            ImexStepper last(g, p, hi);
            last.advance(u, w, F, us, ws);
            u = us;
            w = ws;
            t += hi;
            res.touchdown.touched = true;
            res.touchdown.Tm_estimate = t;
            break;
        }

        const double wsq_new = w_norm_sq(w_new);
        dissipation += 0.5 * dt * (wsq + wsq_new);
        u = u_new;
        w = w_new;
        wsq = wsq_new;
        t += dt;
        ++step_count;

        bool singular = false;
        try {
            fe = eval_forcing(u_field, p, opt);
        } catch (const SingularGeometryError&) {
            // geometry unusable before the threshold tripped: report as
            // touchdown at the current time
            singular = true;
        }
        record(t, u_field, wsq);
        EvolutionState snap{t, u_field, profile_from(g, w, p.gamma)};
        if (opt.observer) opt.observer(snap, fe.N);
        if (opt.snapshot_every > 0 && step_count % opt.snapshot_every == 0) {
            res.snapshots.push_back(snap);
        }
        if (singular) {
            res.touchdown.touched = true;
            res.touchdown.Tm_estimate = t;
            break;
        }
    }

    res.final_state = {t, field_from(g, u), profile_from(g, w, p.gamma)};
    if (!res.touchdown.touched) res.touchdown.Tm_estimate = t;
    const DeflectionField& uf = res.final_state.u;
    const double umin = uf.min();
    for (int i = 0; i < g.num_nodes(); ++i) {
        if (uf.values[i] <= umin + 1e-12) res.touchdown.touchdown_nodes.push_back(i);
    }
    if (res.snapshots.back().t != t) res.snapshots.push_back(res.final_state);
    return res;
}

EvolutionResult evolve(const Params& p, double T, double dt, int n_interior,
                       const EvolutionOptions& opt) {
    Grid1D g(n_interior);
    EvolutionState init;
    init.u = DeflectionField(g);
    init.v = Profile(g);
    return evolve_from(p, T, dt, init, opt);
}

double energy_total(const DeflectionField& u, const Params& p, int neta) {
    return mechanical_energy(u, p) - p.lambda * model_electrostatic_energy(u, p, neta);
}

double singularity_functional(const DeflectionField& u, double alpha) {
    if (alpha < 0.0 || alpha >= 1.0) {
        throw std::invalid_argument("singularity_functional: alpha must lie in [0, 1)");
    }
    Eigenpair ep = principal_eigenpair(0.0, 1.0, BoundaryCondition::clamped, u.grid);
    std::vector<double> integrand(u.grid.num_nodes());
    for (int i = 0; i < u.grid.num_nodes(); ++i) {
        const double ui = u.values[i];
        integrand[i] = ep.zeta1.values[i] * (ui + 0.5 * alpha * ui * ui);
    }
    return trapz(u.grid, integrand);
}

bool ConvergenceReport::strictly_decreasing() const {
    for (size_t i = 1; i < params.size(); ++i) {
        if (!(err_primary[i] < err_primary[i - 1])) return false;
        if (!(err_secondary[i] < err_secondary[i - 1])) return false;
    }
    return true;
}

namespace {

double sobolev_distance(const Grid1D& g, const DeflectionField& a,
                        const DeflectionField& b, bool include_h2) {
    DeflectionField d(g);
    for (int i = 0; i < g.num_nodes(); ++i) d.values[i] = a.values[i] - b.values[i];
    Norms nm = discrete_norms(d);
    double s = nm.l2 * nm.l2 + nm.h1_seminorm * nm.h1_seminorm;
    if (include_h2) s += nm.h2_seminorm * nm.h2_seminorm;
    return std::sqrt(s);
}

}  // namespace

ConvergenceReport limit_study_epsilon(const Params& p, const std::vector<double>& eps_list,
                                      double T0, double dt, int n_interior,
                                      const EvolutionOptions& opt) {
    if (eps_list.empty()) throw std::invalid_argument("limit_study_epsilon: empty list");
    Grid1D g(n_interior);

    // epsilon = 0 baseline: explicit small-gap nonlinearity
    Params p0 = p;
    p0.rhs = RhsKind::small_gap;
    p0.epsilon = 0.0;
    std::vector<DeflectionField> base;
    EvolutionOptions bopt = opt;
    bopt.observer = [&](const EvolutionState& s, const Profile&) { base.push_back(s.u); };
    EvolutionResult rb = evolve(p0, T0, dt, n_interior, bopt);
    if (rb.touchdown.touched) {
        throw SolverError("limit_study_epsilon: baseline run touched down before T0");
    }

    ConvergenceReport rep;
    for (double eps : eps_list) {
        Params pe = p;
        pe.rhs = RhsKind::free_boundary;
        pe.epsilon = eps;
        double sup_h1 = 0.0, sup_g = 0.0;
        size_t k = 0;
        EvolutionOptions eopt = opt;
        eopt.observer = [&](const EvolutionState& s, const Profile& N) {
            if (k < base.size()) {
                sup_h1 = std::max(sup_h1, sobolev_distance(g, s.u, base[k], false));
            }
            std::vector<double> diff(g.num_nodes());
            for (int i = 0; i < g.num_nodes(); ++i) {
                const double w = 1.0 + s.u.values[i];
                diff[i] = N.values[i] - 1.0 / (w * w);
            }
            sup_g = std::max(sup_g, std::sqrt(l2sq(g, diff)));
            ++k;
        };
        EvolutionResult re = evolve(pe, T0, dt, n_interior, eopt);
        if (re.touchdown.touched) {
            throw SolverError("limit_study_epsilon: run at epsilon = " +
                              std::to_string(eps) + " touched down before T0");
        }
        rep.params.push_back(eps);
        rep.err_primary.push_back(sup_h1);
        rep.err_secondary.push_back(sup_g);
    }
    return rep;
}

ConvergenceReport limit_study_gamma(const Params& p, const std::vector<double>& gamma_list,
                                    double T, double dt, int n_interior,
                                    const EvolutionOptions& opt) {
    if (gamma_list.empty()) throw std::invalid_argument("limit_study_gamma: empty list");
    if (p.beta <= 0.0) {
        throw std::invalid_argument("limit_study_gamma: requires beta > 0");
    }
    Grid1D g(n_interior);
    const int phi_every = 10;  // potential-distance sampling cadence

    Params p0 = p;
    p0.gamma = 0.0;
    std::vector<DeflectionField> base;
    EvolutionOptions bopt = opt;
    bopt.observer = [&](const EvolutionState& s, const Profile&) { base.push_back(s.u); };
    EvolutionResult rb = evolve(p0, T, dt, n_interior, bopt);
    if (rb.touchdown.touched) {
        throw SolverError("limit_study_gamma: baseline run touched down before T");
    }

    auto phi_field = [&](const DeflectionField& u) {
        auto sys = assemble_transformed(u, p.epsilon, opt.neta);
        return solve_potential(sys);
    };

    ConvergenceReport rep;
    for (double gamma : gamma_list) {
        Params pg = p;
        pg.gamma = gamma;
        double sup_h2 = 0.0, sup_phi = 0.0;
        size_t k = 0;
        EvolutionOptions eopt = opt;
        eopt.observer = [&](const EvolutionState& s, const Profile&) {
            if (k < base.size()) {
                sup_h2 = std::max(sup_h2, sobolev_distance(g, s.u, base[k], true));
                if (p.rhs == RhsKind::free_boundary && k % phi_every == 0) {
                    PotentialField pa = phi_field(s.u);
                    PotentialField pb = phi_field(base[k]);
                    double acc = 0.0;
                    for (int i = 0; i < pa.grid.nx + 2; ++i) {
                        for (int j = 0; j < pa.grid.neta + 2; ++j) {
                            const double d = pa.at(i, j) - pb.at(i, j);
                            double cell = d * d;
                            if (i == 0 || i == pa.grid.nx + 1) cell *= 0.5;
                            if (j == 0 || j == pa.grid.neta + 1) cell *= 0.5;
                            acc += cell;
                        }
                    }
                    sup_phi = std::max(
                        sup_phi, std::sqrt(acc * pa.grid.hx * pa.grid.heta));
                }
            }
            ++k;
        };
        EvolutionResult re = evolve(pg, T, dt, n_interior, eopt);
        if (re.touchdown.touched) {
            throw SolverError("limit_study_gamma: run at gamma = " +
                              std::to_string(gamma) + " touched down before T");
        }
        rep.params.push_back(gamma);
        rep.err_primary.push_back(sup_h2);
        rep.err_secondary.push_back(sup_phi);
    }
    return rep;
}

void write_ledger_csv(const EnergyLedger& ledger,
                      const std::vector<std::pair<double, double>>& min_history,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "t,min_u,E_total,kinetic,dissipation,balance_residual\n"
        << std::setprecision(17);
    for (size_t i = 0; i < ledger.times.size(); ++i) {
        const double mu =
            (i < min_history.size()) ? min_history[i].second : 0.0;
        out << ledger.times[i] << ',' << mu << ',' << ledger.total[i] << ','
            << ledger.kinetic[i] << ',' << ledger.dissipation[i] << ','
            << ledger.balance[i] << '\n';
    }
}

}  // namespace mems
