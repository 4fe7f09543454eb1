#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mems/harness.hpp"
#include "mems/operators.hpp"
#include "mems/stationary.hpp"

using namespace mems;

namespace {

Params small_gap_membrane() {
    Params p;
    p.rhs = RhsKind::small_gap;
    p.beta = 0.0;
    p.tau = 1.0;
    p.epsilon = 0.0;
    return p;
}

double inf_norm(const Profile& r) {
    double m = 0.0;
    for (double v : r.values) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST_CASE("zero residual at lambda zero") {
    Grid1D g(63);
    DeflectionField u(g);
    Params p = small_gap_membrane();
    p.lambda = 0.0;
    Profile r = stationary_residual(u, p);
    for (double v : r.values) CHECK(v == 0.0);

    BranchPoint bp = solve_stationary(p, u);
    CHECK(bp.min_u == 0.0);
    CHECK(bp.stable);
}

TEST_CASE("fringing with delta zero equals small gap") {
    Grid1D g(63);
    DeflectionField u(g);
    for (int i = 0; i < g.num_nodes(); ++i) {
        const double s = 1.0 - g.x[i] * g.x[i];
        u.values[i] = -0.3 * s * s;
    }
    Params p = small_gap_membrane();
    p.lambda = 0.2;
    Params pf = p;
    pf.rhs = RhsKind::fringing;
    pf.delta = 0.0;
    Profile a = stationary_residual(u, p);
    Profile b = stationary_residual(u, pf);
    for (int i = 0; i < g.num_nodes(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("small-lambda expansion of the membrane solution") {
    Params p = small_gap_membrane();
    p.lambda = 1e-3;
    Grid1D g(127);
    BranchPoint bp = solve_stationary(p, DeflectionField(g));
    for (int i = 0; i < g.num_nodes(); ++i) {
        const double lead = -(p.lambda / (2.0 * p.tau)) * (1.0 - g.x[i] * g.x[i]);
        CHECK(std::abs(bp.u.values[i] - lead) < 1e-5);
    }
}

TEST_CASE("shooting-oracle solution nearly annihilates the residual") {
    const double lambda = 0.05, tau = 1.0;
    ShootingResult sr = shooting_oracle(lambda, tau, 511, false);
    REQUIRE(sr.solutions.size() == 2);
    Params p = small_gap_membrane();
    p.lambda = lambda;
    // the shallower root is the minimal (smoother) solution
    size_t best = sr.roots_m[0] > sr.roots_m[1] ? 0 : 1;
    Profile r = stationary_residual(sr.solutions[best], p);
    CHECK(inf_norm(r) < 1e-8);
}

TEST_CASE("free-boundary solution is negative and even") {
    Params p;
    p.rhs = RhsKind::free_boundary;
    p.epsilon = 0.1;
    p.beta = 1.0;
    p.tau = 0.0;
    p.lambda = 1.0;
    StationaryOptions opt;
    opt.neta = 24;
    Grid1D g(31);
    BranchPoint bp = solve_stationary(p, DeflectionField(g), opt);
    CHECK(bp.residual_norm < 1e-10);
    for (int i = 1; i <= g.n; ++i) {
        CHECK(bp.u.values[i] < 0.0);
        CHECK(bp.u.values[i] > -1.0);
        CHECK(std::abs(bp.u.values[i] - bp.u.values[g.n + 1 - i]) < 1e-8);
    }
}

TEST_CASE("linearized stability at lambda zero is the beam eigenvalue") {
    Grid1D g(63);
    Params p = small_gap_membrane();
    p.lambda = 0.0;
    BranchPoint bp = solve_stationary(p, DeflectionField(g));
    const double mu1 = principal_eigenpair(0.0, 1.0, p.bc, g).mu1;
    CHECK(bp.principal_ev == doctest::Approx(mu1).epsilon(1e-8));
}

TEST_CASE("membrane branch: one fold, two crossings, stability flip") {
    Params p = small_gap_membrane();
    BranchDiagram d = continue_branch(p, 127, 0.05, 200);
    REQUIRE(d.fold_indices.size() == 1);
    CHECK(d.lambda_stat > 0.3);
    CHECK(d.lambda_stat < M_PI * M_PI / 4.0);

    // two crossings of lambda = 0.2 and a stability flip at the fold
    const double probe = 0.2;
    int crossings = 0;
    for (size_t i = 1; i < d.points.size(); ++i) {
        const double a = d.points[i - 1].lambda - probe;
        const double b = d.points[i].lambda - probe;
        if (a * b < 0.0) ++crossings;
    }
    CHECK(crossings == 2);

    const int fi = d.fold_indices[0];
    CHECK(d.points[std::max(0, fi - 2)].principal_ev > 0.0);
    CHECK(d.points[std::min<int>(d.points.size() - 1, fi + 2)].principal_ev < 0.0);
    int flips = 0;
    for (size_t i = 1; i < d.points.size(); ++i) {
        if (d.points[i - 1].stable != d.points[i].stable) ++flips;
    }
    CHECK(flips == 1);
}

TEST_CASE("clamped beam branch returns toward lambda zero near touchdown") {
    Params p;
    p.rhs = RhsKind::small_gap;
    p.beta = 1.0;
    p.tau = 0.0;
    p.epsilon = 0.0;
    BranchDiagram d = continue_branch(p, 63, 0.2, 400);
    REQUIRE(!d.fold_indices.empty());
    CHECK(d.reached_touchdown_guard);
    const auto& last = d.points.back();
    CHECK(last.min_u < -0.9);
    CHECK(last.lambda < 0.5 * d.lambda_stat);
    CHECK(d.endpoint_lambda < last.lambda + 0.1);
    // sign property along the whole branch
    for (const auto& bp : d.points) {
        CHECK(bp.min_u > -1.0);
        for (double v : bp.u.values) CHECK(v <= 1e-12);
        // branch symmetry
        const int m = bp.u.grid.num_nodes();
        for (int i = 0; i < m; ++i) {
            CHECK(std::abs(bp.u.values[i] - bp.u.values[m - 1 - i]) < 1e-8);
        }
    }
}

TEST_CASE("branch points re-validate on a doubled grid") {
    Params p = small_gap_membrane();
    BranchDiagram d = continue_branch(p, 63, 0.05, 60);
    const auto& bp = d.points[d.points.size() / 2];
    // interpolate to the grid with doubled resolution and re-solve
    Grid1D fine(127);
    DeflectionField guess(fine);
    for (int i = 0; i < fine.num_nodes(); ++i) {
        const double x = fine.x[i];
        const double pos = (x + 1.0) / bp.u.grid.h;
        const int k = std::min(static_cast<int>(pos), bp.u.grid.num_nodes() - 2);
        const double w = pos - k;
        guess.values[i] = (1.0 - w) * bp.u.values[k] + w * bp.u.values[k + 1];
    }
    Params q = p;
    q.lambda = bp.lambda;
    BranchPoint refined = solve_stationary(q, guess);
    CHECK(refined.residual_norm < 1e-8);
    CHECK(refined.min_u == doctest::Approx(bp.min_u).epsilon(1e-2));
}

TEST_CASE("pull-in voltage agrees with the shooting fold") {
    Params p = small_gap_membrane();
    const double lam = pull_in_voltage(p, 127);
    const double fold = shooting_fold(1.0);
    CHECK(std::abs(lam - fold) / fold < 5e-4);
    CHECK(lam <= M_PI * M_PI / 4.0);
}

TEST_CASE("free-boundary pull-in stays below the ceiling and converges") {
    Params p;
    p.rhs = RhsKind::free_boundary;
    p.beta = 0.0;
    p.tau = 1.0;
    StationaryOptions opt;
    opt.neta = 16;
    const int n = 23;

    Params sg = small_gap_membrane();
    const double base = pull_in_voltage(sg, n, opt);

    double prev = 1e300;
    for (double eps : {0.2, 0.1, 0.05}) {
        p.epsilon = eps;
        const double lam = pull_in_voltage(p, n, opt);
        CHECK(lam <= M_PI * M_PI / 4.0);
        const double err = std::abs(lam - base);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("capacitive and force-law kinds admit small-lambda solves") {
    Grid1D g(63);
    Params p = small_gap_membrane();
    p.rhs = RhsKind::capacitive;
    p.chi = 1.0;
    p.lambda = 0.1;
    BranchPoint bp = solve_stationary(p, DeflectionField(g));
    CHECK(bp.residual_norm < 1e-10);
    CHECK(bp.min_u < 0.0);

    Params q = small_gap_membrane();
    q.rhs = RhsKind::force_law;
    q.mu = 1.0;
    q.m = 4.0;
    q.lambda = 0.05;
    BranchPoint bq = solve_stationary(q, DeflectionField(g));
    CHECK(bq.residual_norm < 1e-10);
    CHECK(bq.min_u < 0.0);
}
