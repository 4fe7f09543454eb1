#ifndef MEMS_H
#define MEMS_H

/* C interface to the plate-deflection solver library.
 *
 * All functions return MEMS_OK (0) on success, MEMS_ERR_NUMERIC (1) on
 * solver failure, or MEMS_ERR_ARG (2) on invalid arguments; the last
 * error message for the calling thread is available from
 * mems_last_error(). Handles are opaque and must be released with the
 * matching *_free function.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MEMS_OK 0
#define MEMS_ERR_NUMERIC 1
#define MEMS_ERR_ARG 2

#define MEMS_BC_CLAMPED 0
#define MEMS_BC_PINNED 1

#define MEMS_RHS_FREE_BOUNDARY 0
#define MEMS_RHS_SMALL_GAP 1
#define MEMS_RHS_CAPACITIVE 2
#define MEMS_RHS_FRINGING 3
#define MEMS_RHS_FORCE_LAW 4

typedef struct {
    double epsilon; /* aspect ratio (> 0 for the free-boundary model) */
    double lambda;  /* voltage parameter */
    double beta;    /* bending coefficient */
    double tau;     /* tension coefficient */
    double gamma;   /* inertia coefficient */
    double a;       /* self-stretching coefficient */
    double chi;     /* capacitive coupling ratio */
    double delta;   /* fringing-field weight */
    double mu;      /* force-law weight */
    double m;       /* force-law exponent */
    int bc;         /* MEMS_BC_* */
    int rhs;        /* MEMS_RHS_* */
} mems_params;

/* Defaults: epsilon 0.1, beta 1, others 0 except mu 1, m 4; clamped,
 * free-boundary. */
void mems_params_init(mems_params* p);

/* Message describing the most recent failure on this thread. */
const char* mems_last_error(void);

/* --- potential ------------------------------------------------------ */

/* Solve the transformed potential for the deflection u(x) =
 * amp * (1 - x^2)^2 and write CSVs (pass NULL to skip a file).
 * phi_csv: columns x,eta,value; psi_csv: columns x,z,value. */
int mems_potential_csv(const mems_params* p, int n, int neta, double amp,
                       const char* phi_csv, const char* psi_csv);

/* --- stationary ------------------------------------------------------ */

typedef struct {
    double lambda;
    double min_u;
    double Em;
    double Ee;
    double principal_ev;
    int stable;
} mems_stationary_summary;

/* Newton solve at fixed lambda from the zero guess. u_out (length
 * n + 2, including the boundary nodes) may be NULL. */
int mems_stationary_solve(const mems_params* p, int n, int neta,
                          mems_stationary_summary* out, double* u_out);

/* --- continuation ----------------------------------------------------- */

typedef struct mems_branch mems_branch;

int mems_continue(const mems_params* p, int n, int neta, double step,
                  int max_points, mems_branch** out);
void mems_branch_free(mems_branch* b);

int mems_branch_size(const mems_branch* b);
int mems_branch_num_folds(const mems_branch* b);
double mems_branch_lambda_stat(const mems_branch* b);
/* s, lambda, min_u, Em, Ee, principal_ev, stable, fold_flag of point i */
int mems_branch_point(const mems_branch* b, int i, double* s, double* lambda,
                      double* min_u, double* Em, double* Ee, double* principal_ev,
                      int* stable, int* fold_flag);
int mems_branch_write_csv(const mems_branch* b, const char* path);

int mems_pull_in_voltage(const mems_params* p, int n, int neta, double* out);

/* --- eigenpair -------------------------------------------------------- */

/* zeta_out (length n + 2) may be NULL. */
int mems_eigen(double beta, double tau, int bc, int n, double* mu1, double* zeta_out);

/* --- evolution -------------------------------------------------------- */

typedef struct mems_evolution mems_evolution;

int mems_evolve(const mems_params* p, double T, double dt, int n, int neta,
                mems_evolution** out);
void mems_evolution_free(mems_evolution* e);

int mems_evolution_summary(const mems_evolution* e, int* touched, double* tm,
                           double* final_min_u, int* num_records);
/* t, min_u, E_total, kinetic, dissipation, balance of ledger record i */
int mems_evolution_record(const mems_evolution* e, int i, double* t, double* min_u,
                          double* total, double* kinetic, double* dissipation,
                          double* balance);
/* final deflection, length n + 2 */
int mems_evolution_final_u(const mems_evolution* e, double* u_out, int len);
int mems_evolution_write_csv(const mems_evolution* e, const char* path);

/* --- limit studies ---------------------------------------------------- */

/* err1/err2: one entry per list member (trajectory distance and
 * secondary distance). */
int mems_limit_epsilon(const mems_params* p, const double* eps_list, int count,
                       double T0, double dt, int n, int neta, double* err1,
                       double* err2);
int mems_limit_gamma(const mems_params* p, const double* gamma_list, int count,
                     double T, double dt, int n, int neta, double* err1,
                     double* err2);

/* --- shooting oracle --------------------------------------------------- */

/* roots_m holds up to max_roots centre deflections; *num_roots receives
 * the count. fold may be NULL to skip the fold search. */
int mems_shooting(double lambda, double tau, int n, double* fold, double* roots_m,
                  int max_roots, int* num_roots);

/* --- sweep ------------------------------------------------------------- */

int mems_sweep(const mems_params* p, const double* eps_list, int neps,
               const double* gamma_list, int ngamma, int n, int neta, double dt,
               double t_long, double resolution, int workers, const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* MEMS_H */
