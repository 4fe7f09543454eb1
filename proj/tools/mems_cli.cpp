// Command-line front end for the plate-deflection solver library.
// Links only the C API (mems.h). Exit codes: 0 success, 1 numerical
// failure, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mems.h"

namespace {

int model_code(const std::string& name) {
    if (name == "fb" || name == "free_boundary") return MEMS_RHS_FREE_BOUNDARY;
    if (name == "small_gap") return MEMS_RHS_SMALL_GAP;
    if (name == "capacitive") return MEMS_RHS_CAPACITIVE;
    if (name == "fringing") return MEMS_RHS_FRINGING;
    if (name == "force_law") return MEMS_RHS_FORCE_LAW;
    throw CLI::ValidationError("--model", "unknown model '" + name + "'");
}

int bc_code(const std::string& name) {
    if (name == "clamped") return MEMS_BC_CLAMPED;
    if (name == "pinned") return MEMS_BC_PINNED;
    throw CLI::ValidationError("--bc", "unknown boundary condition '" + name + "'");
}

// Shared model/grid options; attached to every subcommand.
struct ModelOpts {
    std::string model = "fb";
    std::string bc = "clamped";
    double eps = 0.1, lambda = 0.0, beta = 1.0, tau = 0.0, gamma = 0.0;
    double a = 0.0, chi = 0.0, delta = 0.0, mu = 1.0, m_exp = 4.0;
    int n = 63, neta = 48;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", model, "fb|small_gap|capacitive|fringing|force_law");
        cmd->add_option("--bc", bc, "clamped|pinned");
        cmd->add_option("--eps", eps, "aspect ratio");
        cmd->add_option("--lambda", lambda, "voltage parameter");
        cmd->add_option("--beta", beta, "bending coefficient");
        cmd->add_option("--tau", tau, "tension coefficient");
        cmd->add_option("--gamma", gamma, "inertia coefficient");
        cmd->add_option("--a", a, "self-stretching coefficient");
        cmd->add_option("--chi", chi, "capacitive coupling ratio");
        cmd->add_option("--delta", delta, "fringing-field weight");
        cmd->add_option("--mu", mu, "force-law weight");
        cmd->add_option("--m-exp", m_exp, "force-law exponent");
        cmd->add_option("--n", n, "interior x-nodes");
        cmd->add_option("--neta", neta, "interior eta-nodes");
    }

    mems_params params() const {
        mems_params p;
        mems_params_init(&p);
        p.rhs = model_code(model);
        p.bc = bc_code(bc);
        p.epsilon = eps;
        p.lambda = lambda;
        p.beta = beta;
        p.tau = tau;
        p.gamma = gamma;
        p.a = a;
        p.chi = chi;
        p.delta = delta;
        p.mu = mu;
        p.m = m_exp;
        return p;
    }
};

int report(int rc) {
    if (rc != MEMS_OK) std::cerr << "error: " << mems_last_error() << "\n";
    return rc;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Electrostatic plate deflection solver"};
    app.set_config("--config", "", "flat key=value configuration file");
    app.require_subcommand(1);
    app.option_defaults()->configurable();

    ModelOpts mo;

    // potential
    auto* cmd_pot = app.add_subcommand("potential", "solve the transformed potential");
    mo.attach(cmd_pot);
    double amp = -0.3;
    std::string phi_out = "phi.csv", psi_out;
    cmd_pot->add_option("--amp", amp, "deflection amplitude of amp*(1-x^2)^2");
    cmd_pot->add_option("--phi-out", phi_out, "transformed potential CSV");
    cmd_pot->add_option("--psi-out", psi_out, "mapped potential CSV");

    // stationary
    auto* cmd_stat = app.add_subcommand("stationary", "Newton solve at fixed lambda");
    mo.attach(cmd_stat);
    std::string stat_out;
    cmd_stat->add_option("--out", stat_out, "deflection CSV (x,u)");

    // continue
    auto* cmd_cont = app.add_subcommand("continue", "pseudo-arclength continuation");
    mo.attach(cmd_cont);
    double step = 0.05;
    int max_points = 400;
    std::string branch_out = "branch.csv";
    cmd_cont->add_option("--step", step, "initial arclength step");
    cmd_cont->add_option("--max-points", max_points, "maximum branch points");
    cmd_cont->add_option("--out", branch_out, "branch diagram CSV");

    // evolve
    auto* cmd_evo = app.add_subcommand("evolve", "time evolution from rest");
    mo.attach(cmd_evo);
    double T = 10.0, dt = 1e-3;
    int snapshot_every = 1;
    std::string ledger_out = "ledger.csv", u_out;
    cmd_evo->add_option("--T", T, "final time");
    cmd_evo->add_option("--dt", dt, "time step");
    cmd_evo->add_option("--snapshot-every", snapshot_every, "ledger CSV row cadence");
    cmd_evo->add_option("--out", ledger_out, "energy ledger CSV");
    cmd_evo->add_option("--u-out", u_out, "final deflection CSV (x,u)");

    // eigen
    auto* cmd_eig = app.add_subcommand("eigen", "principal eigenpair of the operator");
    mo.attach(cmd_eig);
    std::string zeta_out;
    cmd_eig->add_option("--out", zeta_out, "eigenfunction CSV (x,zeta)");

    // limit-eps
    auto* cmd_leps = app.add_subcommand("limit-eps", "vanishing aspect-ratio study");
    mo.attach(cmd_leps);
    std::string eps_list = "0.2,0.1,0.05", limit_out;
    double T0 = 0.5;
    double dt_eps = 1e-3;
    cmd_leps->add_option("--eps-list", eps_list, "comma-separated epsilon values");
    cmd_leps->add_option("--T0", T0, "comparison horizon");
    cmd_leps->add_option("--dt", dt_eps, "time step");
    cmd_leps->add_option("--out", limit_out, "report CSV");

    // limit-gamma
    auto* cmd_lgam = app.add_subcommand("limit-gamma", "vanishing inertia study");
    mo.attach(cmd_lgam);
    std::string gamma_list = "0.2,0.1,0.05", gamma_out;
    double Tg = 0.5;
    double dt_gam = 1e-3;
    cmd_lgam->add_option("--gamma-list", gamma_list, "comma-separated gamma values");
    cmd_lgam->add_option("--T", Tg, "comparison horizon");
    cmd_lgam->add_option("--dt", dt_gam, "time step");
    cmd_lgam->add_option("--out", gamma_out, "report CSV");

    // sweep
    auto* cmd_sweep = app.add_subcommand("sweep", "pull-in voltage sweep");
    mo.attach(cmd_sweep);
    std::string sweep_eps = "0.1", sweep_gammas = "0.0", sweep_out = "sweep.csv";
    double t_long = 50.0, resolution = 0.01, sweep_dt = 2e-3;
    int workers = 1;
    cmd_sweep->add_option("--eps-list", sweep_eps, "comma-separated epsilon values");
    cmd_sweep->add_option("--gamma-list", sweep_gammas, "comma-separated gamma values");
    cmd_sweep->add_option("--dt", sweep_dt, "time step for the dynamic runs");
    cmd_sweep->add_option("--T-long", t_long, "finite horizon standing in for 'global'");
    cmd_sweep->add_option("--resolution", resolution, "relative lambda bisection width");
    cmd_sweep->add_option("--workers", workers, "worker thread count");
    cmd_sweep->add_option("--out", sweep_out, "sweep table CSV");

    // oracle
    auto* cmd_orc = app.add_subcommand("oracle", "shooting oracle for the second-order model");
    mo.attach(cmd_orc);
    bool want_fold = true;
    cmd_orc->add_flag("--fold,!--no-fold", want_fold, "also locate the fold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    std::cout << std::setprecision(12);
    mems_params p = mo.params();

    if (*cmd_pot) {
        return report(mems_potential_csv(&p, mo.n, mo.neta, amp,
                                         phi_out.empty() ? nullptr : phi_out.c_str(),
                                         psi_out.empty() ? nullptr : psi_out.c_str()));
    }

    if (*cmd_stat) {
        mems_stationary_summary s;
        std::vector<double> u(mo.n + 2);
        const int rc = mems_stationary_solve(&p, mo.n, mo.neta, &s, u.data());
        if (rc != MEMS_OK) return report(rc);
        std::cout << "lambda " << s.lambda << " min_u " << s.min_u << " Em " << s.Em
                  << " Ee " << s.Ee << " principal_ev " << s.principal_ev << " stable "
                  << s.stable << "\n";
        if (!stat_out.empty()) {
            std::ofstream f(stat_out);
            f << "x,u\n" << std::setprecision(17);
            const double h = 2.0 / (mo.n + 1);
            for (int i = 0; i < mo.n + 2; ++i) f << (-1.0 + i * h) << ',' << u[i] << '\n';
        }
        return 0;
    }

    if (*cmd_cont) {
        mems_branch* b = nullptr;
        int rc = mems_continue(&p, mo.n, mo.neta, step, max_points, &b);
        if (rc != MEMS_OK) return report(rc);
        rc = mems_branch_write_csv(b, branch_out.c_str());
        if (rc == MEMS_OK) {
            std::cout << "points " << mems_branch_size(b) << " folds "
                      << mems_branch_num_folds(b) << " lambda_stat "
                      << mems_branch_lambda_stat(b) << "\n";
        }
        mems_branch_free(b);
        return report(rc);
    }

    if (*cmd_evo) {
        mems_evolution* e = nullptr;
        int rc = mems_evolve(&p, T, dt, mo.n, mo.neta, &e);
        if (rc != MEMS_OK) return report(rc);
        int touched = 0, records = 0;
        double tm = 0.0, min_u = 0.0;
        mems_evolution_summary(e, &touched, &tm, &min_u, &records);
        std::cout << (touched ? "touchdown at t = " : "completed at t = ") << tm
                  << " min_u " << min_u << "\n";
        if (!ledger_out.empty()) {
            std::ofstream f(ledger_out);
            f << "t,min_u,E_total,kinetic,dissipation,balance_residual\n"
              << std::setprecision(17);
            const int cadence = snapshot_every > 0 ? snapshot_every : 1;
            for (int i = 0; i < records; ++i) {
                if (i % cadence != 0 && i != records - 1) continue;
                double t, mu, tot, kin, dis, bal;
                mems_evolution_record(e, i, &t, &mu, &tot, &kin, &dis, &bal);
                f << t << ',' << mu << ',' << tot << ',' << kin << ',' << dis << ','
                  << bal << '\n';
            }
        }
        if (!u_out.empty()) {
            std::vector<double> u(mo.n + 2);
            mems_evolution_final_u(e, u.data(), mo.n + 2);
            std::ofstream f(u_out);
            f << "x,u\n" << std::setprecision(17);
            const double h = 2.0 / (mo.n + 1);
            for (int i = 0; i < mo.n + 2; ++i) f << (-1.0 + i * h) << ',' << u[i] << '\n';
        }
        mems_evolution_free(e);
        return 0;
    }

    if (*cmd_eig) {
        double mu1 = 0.0;
        std::vector<double> zeta(mo.n + 2);
        const int rc = mems_eigen(mo.beta, mo.tau, p.bc, mo.n, &mu1, zeta.data());
        if (rc != MEMS_OK) return report(rc);
        std::cout << "mu1 " << mu1 << "\n";
        if (!zeta_out.empty()) {
            std::ofstream f(zeta_out);
            f << "x,zeta\n" << std::setprecision(17);
            const double h = 2.0 / (mo.n + 1);
            for (int i = 0; i < mo.n + 2; ++i) {
                f << (-1.0 + i * h) << ',' << zeta[i] << '\n';
            }
        }
        return 0;
    }

    if (*cmd_leps || *cmd_lgam) {
        const bool eps_mode = static_cast<bool>(*cmd_leps);
        auto list = parse_list(eps_mode ? eps_list : gamma_list);
        std::vector<double> e1(list.size()), e2(list.size());
        const int rc =
            eps_mode ? mems_limit_epsilon(&p, list.data(), (int)list.size(), T0, dt_eps,
                                          mo.n, mo.neta, e1.data(), e2.data())
                     : mems_limit_gamma(&p, list.data(), (int)list.size(), Tg, dt_gam,
                                        mo.n, mo.neta, e1.data(), e2.data());
        if (rc != MEMS_OK) return report(rc);
        const char* name = eps_mode ? "epsilon" : "gamma";
        std::cout << name << ",err_trajectory,err_secondary\n";
        for (size_t i = 0; i < list.size(); ++i) {
            std::cout << list[i] << ',' << e1[i] << ',' << e2[i] << "\n";
        }
        const std::string& out = eps_mode ? limit_out : gamma_out;
        if (!out.empty()) {
            std::ofstream f(out);
            f << name << ",err_trajectory,err_secondary\n" << std::setprecision(17);
            for (size_t i = 0; i < list.size(); ++i) {
                f << list[i] << ',' << e1[i] << ',' << e2[i] << '\n';
            }
        }
        return 0;
    }

    if (*cmd_sweep) {
        auto eps = parse_list(sweep_eps);
        auto gms = parse_list(sweep_gammas);
        const int rc = mems_sweep(&p, eps.data(), (int)eps.size(), gms.data(),
                                  (int)gms.size(), mo.n, mo.neta, sweep_dt, t_long,
                                  resolution, workers, sweep_out.c_str());
        if (rc == MEMS_OK) std::cout << "sweep written to " << sweep_out << "\n";
        return report(rc);
    }

    if (*cmd_orc) {
        double fold = 0.0;
        std::vector<double> roots(16);
        int nroots = 0;
        const int rc = mems_shooting(mo.lambda, mo.tau, mo.n,
                                     want_fold ? &fold : nullptr, roots.data(), 16,
                                     &nroots);
        if (rc != MEMS_OK) return report(rc);
        if (want_fold) std::cout << "fold_lambda " << fold << "\n";
        std::cout << "solutions " << nroots;
        for (int i = 0; i < nroots; ++i) std::cout << " m" << i << " " << roots[i];
        std::cout << "\n";
        return 0;
    }

    return 2;
}
