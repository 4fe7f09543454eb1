#include "mems.h"

#include <algorithm>
#include <cstring>
#include <string>
#include <vector>

#include "mems/core.hpp"
#include "mems/elliptic.hpp"
#include "mems/evolution.hpp"
#include "mems/harness.hpp"
#include "mems/operators.hpp"
#include "mems/stationary.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Runs fn, translating exceptions into error codes.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return MEMS_ERR_ARG;
    } catch (const std::exception& e) {
        set_error(e.what());
        return MEMS_ERR_NUMERIC;
    }
}

mems::Params convert(const mems_params* p) {
    if (!p) throw std::invalid_argument("params pointer is null");
    mems::Params q;
    q.epsilon = p->epsilon;
    q.lambda = p->lambda;
    q.beta = p->beta;
    q.tau = p->tau;
    q.gamma = p->gamma;
    q.a = p->a;
    q.chi = p->chi;
    q.delta = p->delta;
    q.mu = p->mu;
    q.m = p->m;
    switch (p->bc) {
        case MEMS_BC_CLAMPED: q.bc = mems::BoundaryCondition::clamped; break;
        case MEMS_BC_PINNED: q.bc = mems::BoundaryCondition::pinned; break;
        default: throw std::invalid_argument("unknown boundary condition code");
    }
    switch (p->rhs) {
        case MEMS_RHS_FREE_BOUNDARY: q.rhs = mems::RhsKind::free_boundary; break;
        case MEMS_RHS_SMALL_GAP: q.rhs = mems::RhsKind::small_gap; break;
        case MEMS_RHS_CAPACITIVE: q.rhs = mems::RhsKind::capacitive; break;
        case MEMS_RHS_FRINGING: q.rhs = mems::RhsKind::fringing; break;
        case MEMS_RHS_FORCE_LAW: q.rhs = mems::RhsKind::force_law; break;
        default: throw std::invalid_argument("unknown rhs kind code");
    }
    q.validate();
    return q;
}

}  // namespace

struct mems_branch {
    mems::BranchDiagram diagram;
};

struct mems_evolution {
    mems::EvolutionResult result;
};

extern "C" {

void mems_params_init(mems_params* p) {
    if (!p) return;
    std::memset(p, 0, sizeof(*p));
    p->epsilon = 0.1;
    p->beta = 1.0;
    p->mu = 1.0;
    p->m = 4.0;
    p->bc = MEMS_BC_CLAMPED;
    p->rhs = MEMS_RHS_FREE_BOUNDARY;
}

const char* mems_last_error(void) { return g_last_error.c_str(); }

int mems_potential_csv(const mems_params* p, int n, int neta, double amp,
                       const char* phi_csv, const char* psi_csv) {
    return guarded([&] {
        mems::Params q = convert(p);
        auto [g1, g2] = mems::make_grids(n, neta);
        mems::DeflectionField u(g1);
        for (int i = 0; i < g1.num_nodes(); ++i) {
            const double x = g1.x[i];
            u.values[i] = amp * (1.0 - x * x) * (1.0 - x * x);
        }
        u.validate();
        auto sys = mems::assemble_transformed(u, q.epsilon, neta);
        auto phi = mems::solve_potential(sys);
        if (phi_csv) mems::write_potential_csv(phi, phi_csv);
        if (psi_csv) mems::write_psi_csv(mems::reconstruct_psi(phi, u), psi_csv);
        return MEMS_OK;
    });
}

int mems_stationary_solve(const mems_params* p, int n, int neta,
                          mems_stationary_summary* out, double* u_out) {
    return guarded([&] {
        mems::Params q = convert(p);
        mems::StationaryOptions opt;
        opt.neta = neta;
        mems::Grid1D g(n);
        mems::BranchPoint bp = mems::solve_stationary(q, mems::DeflectionField(g), opt);
        if (out) {
            out->lambda = bp.lambda;
            out->min_u = bp.min_u;
            out->Em = bp.Em;
            out->Ee = bp.Ee;
            out->principal_ev = bp.principal_ev;
            out->stable = bp.stable ? 1 : 0;
        }
        if (u_out) {
            for (int i = 0; i < g.num_nodes(); ++i) u_out[i] = bp.u.values[i];
        }
        return MEMS_OK;
    });
}

int mems_continue(const mems_params* p, int n, int neta, double step,
                  int max_points, mems_branch** out) {
    return guarded([&] {
        if (!out) throw std::invalid_argument("output handle pointer is null");
        mems::Params q = convert(p);
        mems::StationaryOptions opt;
        opt.neta = neta;
        auto* b = new mems_branch{mems::continue_branch(q, n, step, max_points, opt)};
        *out = b;
        return MEMS_OK;
    });
}

void mems_branch_free(mems_branch* b) { delete b; }

int mems_branch_size(const mems_branch* b) {
    return b ? static_cast<int>(b->diagram.points.size()) : 0;
}

int mems_branch_num_folds(const mems_branch* b) {
    return b ? static_cast<int>(b->diagram.fold_indices.size()) : 0;
}

double mems_branch_lambda_stat(const mems_branch* b) {
    return b ? b->diagram.lambda_stat : 0.0;
}

int mems_branch_point(const mems_branch* b, int i, double* s, double* lambda,
                      double* min_u, double* Em, double* Ee, double* principal_ev,
                      int* stable, int* fold_flag) {
    return guarded([&] {
        if (!b || i < 0 || i >= static_cast<int>(b->diagram.points.size())) {
            throw std::invalid_argument("branch point index out of range");
        }
        const auto& bp = b->diagram.points[i];
        if (s) *s = bp.s;
        if (lambda) *lambda = bp.lambda;
        if (min_u) *min_u = bp.min_u;
        if (Em) *Em = bp.Em;
        if (Ee) *Ee = bp.Ee;
        if (principal_ev) *principal_ev = bp.principal_ev;
        if (stable) *stable = bp.stable ? 1 : 0;
        if (fold_flag) {
            const auto& f = b->diagram.fold_indices;
            *fold_flag = std::find(f.begin(), f.end(), i) != f.end() ? 1 : 0;
        }
        return MEMS_OK;
    });
}

int mems_branch_write_csv(const mems_branch* b, const char* path) {
    return guarded([&] {
        if (!b || !path) throw std::invalid_argument("null branch handle or path");
        mems::write_branch_csv(b->diagram, path);
        return MEMS_OK;
    });
}

int mems_pull_in_voltage(const mems_params* p, int n, int neta, double* out) {
    return guarded([&] {
        if (!out) throw std::invalid_argument("output pointer is null");
        mems::Params q = convert(p);
        mems::StationaryOptions opt;
        opt.neta = neta;
        *out = mems::pull_in_voltage(q, n, opt);
        return MEMS_OK;
    });
}

int mems_eigen(double beta, double tau, int bc, int n, double* mu1, double* zeta_out) {
    return guarded([&] {
        if (!mu1) throw std::invalid_argument("mu1 pointer is null");
        mems::BoundaryCondition b;
        switch (bc) {
            case MEMS_BC_CLAMPED: b = mems::BoundaryCondition::clamped; break;
            case MEMS_BC_PINNED: b = mems::BoundaryCondition::pinned; break;
            default: throw std::invalid_argument("unknown boundary condition code");
        }
        mems::Grid1D g(n);
        mems::Eigenpair ep = mems::principal_eigenpair(beta, tau, b, g);
        *mu1 = ep.mu1;
        if (zeta_out) {
            for (int i = 0; i < g.num_nodes(); ++i) zeta_out[i] = ep.zeta1.values[i];
        }
        return MEMS_OK;
    });
}

int mems_evolve(const mems_params* p, double T, double dt, int n, int neta,
                mems_evolution** out) {
    return guarded([&] {
        if (!out) throw std::invalid_argument("output handle pointer is null");
        mems::Params q = convert(p);
        mems::EvolutionOptions opt;
        opt.neta = neta;
        auto* e = new mems_evolution{mems::evolve(q, T, dt, n, opt)};
        *out = e;
        return MEMS_OK;
    });
}

void mems_evolution_free(mems_evolution* e) { delete e; }

int mems_evolution_summary(const mems_evolution* e, int* touched, double* tm,
                           double* final_min_u, int* num_records) {
    return guarded([&] {
        if (!e) throw std::invalid_argument("null evolution handle");
        if (touched) *touched = e->result.touchdown.touched ? 1 : 0;
        if (tm) *tm = e->result.touchdown.Tm_estimate;
        if (final_min_u) *final_min_u = e->result.final_state.u.min();
        if (num_records) *num_records = static_cast<int>(e->result.ledger.times.size());
        return MEMS_OK;
    });
}

int mems_evolution_record(const mems_evolution* e, int i, double* t, double* min_u,
                          double* total, double* kinetic, double* dissipation,
                          double* balance) {
    return guarded([&] {
        if (!e || i < 0 || i >= static_cast<int>(e->result.ledger.times.size())) {
            throw std::invalid_argument("ledger record index out of range");
        }
        const auto& L = e->result.ledger;
        if (t) *t = L.times[i];
        if (min_u) *min_u = e->result.touchdown.min_history[i].second;
        if (total) *total = L.total[i];
        if (kinetic) *kinetic = L.kinetic[i];
        if (dissipation) *dissipation = L.dissipation[i];
        if (balance) *balance = L.balance[i];
        return MEMS_OK;
    });
}

int mems_evolution_final_u(const mems_evolution* e, double* u_out, int len) {
    return guarded([&] {
        if (!e || !u_out) throw std::invalid_argument("null handle or buffer");
        const auto& u = e->result.final_state.u;
        if (len < u.grid.num_nodes()) {
            throw std::invalid_argument("buffer too small for the deflection field");
        }
        for (int i = 0; i < u.grid.num_nodes(); ++i) u_out[i] = u.values[i];
        return MEMS_OK;
    });
}

int mems_evolution_write_csv(const mems_evolution* e, const char* path) {
    return guarded([&] {
        if (!e || !path) throw std::invalid_argument("null evolution handle or path");
        mems::write_ledger_csv(e->result.ledger, e->result.touchdown.min_history, path);
        return MEMS_OK;
    });
}

int mems_limit_epsilon(const mems_params* p, const double* eps_list, int count,
                       double T0, double dt, int n, int neta, double* err1,
                       double* err2) {
    return guarded([&] {
        if (!eps_list || count <= 0 || !err1 || !err2) {
            throw std::invalid_argument("bad limit-study arguments");
        }
        mems::Params q = convert(p);
        mems::EvolutionOptions opt;
        opt.neta = neta;
        std::vector<double> eps(eps_list, eps_list + count);
        auto rep = mems::limit_study_epsilon(q, eps, T0, dt, n, opt);
        for (int i = 0; i < count; ++i) {
            err1[i] = rep.err_primary[i];
            err2[i] = rep.err_secondary[i];
        }
        return MEMS_OK;
    });
}

int mems_limit_gamma(const mems_params* p, const double* gamma_list, int count,
                     double T, double dt, int n, int neta, double* err1,
                     double* err2) {
    return guarded([&] {
        if (!gamma_list || count <= 0 || !err1 || !err2) {
            throw std::invalid_argument("bad limit-study arguments");
        }
        mems::Params q = convert(p);
        mems::EvolutionOptions opt;
        opt.neta = neta;
        std::vector<double> gammas(gamma_list, gamma_list + count);
        auto rep = mems::limit_study_gamma(q, gammas, T, dt, n, opt);
        for (int i = 0; i < count; ++i) {
            err1[i] = rep.err_primary[i];
            err2[i] = rep.err_secondary[i];
        }
        return MEMS_OK;
    });
}

int mems_shooting(double lambda, double tau, int n, double* fold, double* roots_m,
                  int max_roots, int* num_roots) {
    return guarded([&] {
        auto res = mems::shooting_oracle(lambda, tau, n, fold != nullptr);
        if (fold) *fold = res.fold_lambda;
        if (num_roots) *num_roots = static_cast<int>(res.roots_m.size());
        if (roots_m) {
            const int k = std::min<int>(max_roots, static_cast<int>(res.roots_m.size()));
            for (int i = 0; i < k; ++i) roots_m[i] = res.roots_m[i];
        }
        return MEMS_OK;
    });
}

int mems_sweep(const mems_params* p, const double* eps_list, int neps,
               const double* gamma_list, int ngamma, int n, int neta, double dt,
               double t_long, double resolution, int workers, const char* out_csv) {
    return guarded([&] {
        if (!eps_list || neps <= 0 || !gamma_list || ngamma <= 0) {
            throw std::invalid_argument("sweep: empty parameter range");
        }
        mems::RunConfig cfg;
        cfg.base = convert(p);
        cfg.eps_values.assign(eps_list, eps_list + neps);
        cfg.gamma_values.assign(gamma_list, gamma_list + ngamma);
        cfg.n = n;
        cfg.neta = neta;
        cfg.dt = dt;
        cfg.T_long = t_long;
        cfg.lambda_resolution = resolution;
        cfg.workers = workers;
        if (out_csv) cfg.out_path = out_csv;
        auto table = mems::sweep_pull_in(cfg);
        for (const auto& row : table.rows) {
            if (row.status != "ok") {
                throw mems::SolverError("sweep row failed: " + row.status);
            }
        }
        return MEMS_OK;
    });
}

}  // extern "C"
