#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mems/harness.hpp"

using namespace mems;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("shooting fold is reproducible and below the ceiling") {
    const double f1 = shooting_fold(1.0, 1e-10);
    const double f2 = shooting_fold(1.0, 1e-12);
    CHECK(std::abs(f1 - f2) < 1e-8);
    CHECK(f2 <= M_PI * M_PI / 4.0);
    CHECK(f2 > 0.3);
    // linear scaling in tau
    CHECK(shooting_fold(2.0) == doctest::Approx(2.0 * f2).epsilon(1e-8));
}

TEST_CASE("shooting oracle at lambda zero") {
    ShootingResult r = shooting_oracle(0.0, 1.0, 31, false);
    REQUIRE(r.solutions.size() == 1);
    for (double v : r.solutions[0].values) CHECK(v == 0.0);
}

TEST_CASE("two solutions below the fold") {
    const double fold = shooting_fold(1.0);
    ShootingResult r = shooting_oracle(0.8 * fold, 1.0, 63, false);
    REQUIRE(r.roots_m.size() == 2);
    CHECK(r.roots_m[0] < r.roots_m[1]);
    for (const auto& u : r.solutions) {
        CHECK(u.values.front() == 0.0);
        CHECK(u.values.back() == 0.0);
        CHECK(u.min() > -1.0);
        CHECK(u.min() < 0.0);
    }
    // centre value equals the shooting parameter
    CHECK(r.solutions[0].values[32] == doctest::Approx(r.roots_m[0]).epsilon(1e-8));

    // slightly below the fold the two roots approach each other
    ShootingResult near = shooting_oracle(0.995 * fold, 1.0, 63, false);
    REQUIRE(near.roots_m.size() == 2);
    CHECK(near.roots_m[1] - near.roots_m[0] <
          r.roots_m[1] - r.roots_m[0]);
}

TEST_CASE("invalid shooting arguments") {
    CHECK_THROWS_AS(shooting_oracle(0.1, 0.0, 31, false), std::invalid_argument);
    CHECK_THROWS_AS(shooting_oracle(-0.1, 1.0, 31, false), std::invalid_argument);
    CHECK_THROWS_AS(shooting_lambda(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("sweep on the membrane reproduces the stationary threshold") {
    RunConfig cfg;
    cfg.base.rhs = RhsKind::small_gap;
    cfg.base.beta = 0.0;
    cfg.base.tau = 1.0;
    cfg.base.epsilon = 0.0;
    cfg.eps_values = {0.0};
    cfg.gamma_values = {0.0};
    cfg.n = 31;
    cfg.neta = 16;
    cfg.dt = 5e-3;
    cfg.T_long = 30.0;
    cfg.lambda_resolution = 0.04;
    cfg.out_path = "test_sweep_out.csv";

    SweepTable t = sweep_pull_in(cfg);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].status == "ok");
    CHECK(std::abs(t.rows[0].lambda_dyn - t.rows[0].lambda_stat) <=
          cfg.lambda_resolution * t.rows[0].lambda_stat + 1e-12);
    CHECK(std::filesystem::exists(cfg.out_path));
    CHECK(!std::filesystem::exists(cfg.out_path + ".tmp"));
    std::remove(cfg.out_path.c_str());
}

TEST_CASE("sweep output is deterministic across worker counts") {
    RunConfig cfg;
    cfg.base.rhs = RhsKind::small_gap;
    cfg.base.beta = 1.0;
    cfg.base.tau = 0.0;
    cfg.base.epsilon = 0.0;
    cfg.eps_values = {0.0};
    cfg.gamma_values = {0.0, 0.5};
    cfg.n = 23;
    cfg.neta = 16;
    cfg.dt = 5e-3;
    cfg.T_long = 15.0;
    cfg.lambda_resolution = 0.05;

    cfg.workers = 1;
    cfg.out_path = "test_sweep_w1.csv";
    SweepTable t1 = sweep_pull_in(cfg);
    cfg.workers = 3;
    cfg.out_path = "test_sweep_w3.csv";
    SweepTable t3 = sweep_pull_in(cfg);

    CHECK(slurp("test_sweep_w1.csv") == slurp("test_sweep_w3.csv"));
    REQUIRE(t1.rows.size() == t3.rows.size());
    for (size_t i = 0; i < t1.rows.size(); ++i) {
        CHECK(t1.rows[i].lambda_dyn == t3.rows[i].lambda_dyn);
        CHECK(t1.rows[i].lambda_stat == t3.rows[i].lambda_stat);
        CHECK(t1.rows[i].status == "ok");
        // damping never raises the dynamic threshold
        CHECK(t1.rows[i].lambda_dyn <=
              t1.rows[i].lambda_stat * (1.0 + cfg.lambda_resolution));
    }
    std::remove("test_sweep_w1.csv");
    std::remove("test_sweep_w3.csv");
}

TEST_CASE("empty sweep range is rejected before any run") {
    RunConfig cfg;
    cfg.base.rhs = RhsKind::small_gap;
    cfg.base.beta = 0.0;
    cfg.base.tau = 1.0;
    cfg.eps_values = {};
    cfg.gamma_values = {0.0};
    CHECK_THROWS_AS(sweep_pull_in(cfg), std::invalid_argument);
}
