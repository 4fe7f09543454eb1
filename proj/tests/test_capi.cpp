#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "mems.h"

TEST_CASE("default parameters validate") {
    mems_params p;
    mems_params_init(&p);
    CHECK(p.epsilon == 0.1);
    CHECK(p.beta == 1.0);
    CHECK(p.rhs == MEMS_RHS_FREE_BOUNDARY);
    CHECK(p.bc == MEMS_BC_CLAMPED);
}

TEST_CASE("argument errors set the thread error message") {
    mems_params p;
    mems_params_init(&p);
    p.bc = 42;
    mems_stationary_summary s;
    CHECK(mems_stationary_solve(&p, 31, 16, &s, nullptr) == MEMS_ERR_ARG);
    CHECK(std::strlen(mems_last_error()) > 0);

    CHECK(mems_pull_in_voltage(nullptr, 31, 16, nullptr) == MEMS_ERR_ARG);
}

TEST_CASE("eigen through the C API") {
    double mu1 = 0.0;
    std::vector<double> zeta(65);
    REQUIRE(mems_eigen(0.0, 1.0, MEMS_BC_CLAMPED, 63, &mu1, zeta.data()) == MEMS_OK);
    CHECK(mu1 == doctest::Approx(M_PI * M_PI / 4.0).epsilon(1e-3));
    for (int i = 1; i <= 63; ++i) CHECK(zeta[i] > 0.0);
}

TEST_CASE("stationary solve and continuation") {
    mems_params p;
    mems_params_init(&p);
    p.rhs = MEMS_RHS_SMALL_GAP;
    p.beta = 0.0;
    p.tau = 1.0;
    p.lambda = 0.1;

    mems_stationary_summary s;
    std::vector<double> u(65);
    REQUIRE(mems_stationary_solve(&p, 63, 16, &s, u.data()) == MEMS_OK);
    CHECK(s.min_u < 0.0);
    CHECK(s.stable == 1);
    CHECK(u.front() == 0.0);
    CHECK(u.back() == 0.0);

    mems_branch* b = nullptr;
    REQUIRE(mems_continue(&p, 63, 16, 0.05, 150, &b) == MEMS_OK);
    CHECK(mems_branch_size(b) > 10);
    CHECK(mems_branch_num_folds(b) == 1);
    const double fold = mems_branch_lambda_stat(b);
    CHECK(fold > 0.3);
    CHECK(fold < 0.4);

    double sarc, lambda, min_u, Em, Ee, ev;
    int stable, fold_flag;
    REQUIRE(mems_branch_point(b, 0, &sarc, &lambda, &min_u, &Em, &Ee, &ev, &stable,
                              &fold_flag) == MEMS_OK);
    CHECK(lambda == 0.0);
    CHECK(Ee == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(mems_branch_point(b, 99999, nullptr, nullptr, nullptr, nullptr, nullptr,
                            nullptr, nullptr, nullptr) == MEMS_ERR_ARG);

    const char* path = "capi_branch.csv";
    REQUIRE(mems_branch_write_csv(b, path) == MEMS_OK);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "s,lambda,min_u,Em,Ee,principal_ev,stable,fold_flag");
    in.close();
    std::remove(path);
    mems_branch_free(b);

    double lam = 0.0;
    REQUIRE(mems_pull_in_voltage(&p, 63, 16, &lam) == MEMS_OK);
    CHECK(lam == doctest::Approx(0.35).epsilon(1e-2));
}

TEST_CASE("evolution through the C API") {
    mems_params p;
    mems_params_init(&p);
    p.rhs = MEMS_RHS_SMALL_GAP;
    p.beta = 0.0;
    p.tau = 1.0;
    p.lambda = 1.0;  // supercritical

    mems_evolution* e = nullptr;
    REQUIRE(mems_evolve(&p, 10.0, 2e-3, 63, 16, &e) == MEMS_OK);
    int touched = 0, records = 0;
    double tm = 0.0, min_u = 0.0;
    REQUIRE(mems_evolution_summary(e, &touched, &tm, &min_u, &records) == MEMS_OK);
    CHECK(touched == 1);
    CHECK(tm < 10.0);
    CHECK(records > 10);

    double t, mu, tot, kin, dis, bal;
    REQUIRE(mems_evolution_record(e, 0, &t, &mu, &tot, &kin, &dis, &bal) == MEMS_OK);
    CHECK(t == 0.0);
    CHECK(mu == 0.0);
    CHECK(tot == doctest::Approx(-2.0).epsilon(1e-10));

    std::vector<double> u(65);
    REQUIRE(mems_evolution_final_u(e, u.data(), 65) == MEMS_OK);
    CHECK(mems_evolution_final_u(e, u.data(), 10) == MEMS_ERR_ARG);

    const char* path = "capi_ledger.csv";
    REQUIRE(mems_evolution_write_csv(e, path) == MEMS_OK);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,min_u,E_total,kinetic,dissipation,balance_residual");
    in.close();
    std::remove(path);
    mems_evolution_free(e);
}

TEST_CASE("shooting and potential through the C API") {
    double fold = 0.0;
    double roots[8];
    int nroots = 0;
    REQUIRE(mems_shooting(0.25, 1.0, 63, &fold, roots, 8, &nroots) == MEMS_OK);
    CHECK(fold == doctest::Approx(0.35).epsilon(1e-2));
    CHECK(nroots == 2);

    mems_params p;
    mems_params_init(&p);
    p.epsilon = 0.3;
    const char* path = "capi_phi.csv";
    REQUIRE(mems_potential_csv(&p, 31, 16, -0.3, path, nullptr) == MEMS_OK);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,eta,value");
    in.close();
    std::remove(path);
}
