#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "mems/elliptic.hpp"

using namespace mems;

TEST_CASE("flat plate: phi vanishes, g is one, energy is two") {
    Grid1D g(63);
    DeflectionField u(g);
    auto sys = assemble_transformed(u, 0.3, 63);
    auto phi = solve_potential(sys);
    for (double v : phi.values) CHECK(std::abs(v) < 1e-12);

    Profile ge = compute_g(sys, phi);
    for (double v : ge.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));

    CHECK(electrostatic_energy(sys, phi) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("mapped potential hits the boundary data") {
    Grid1D g(31);
    std::mt19937 rng(7);
    DeflectionField u = testutil::random_admissible(g, rng, 0.3);
    auto sys = assemble_transformed(u, 0.4, 31);
    auto phi = solve_potential(sys);
    auto psi = reconstruct_psi(phi, u);
    const int ne = psi.grid.neta + 2;
    for (int i = 0; i < psi.grid.nx + 2; ++i) {
        CHECK(std::abs(psi.values[i * ne + 0]) < 1e-12);          // ground plate
        CHECK(std::abs(psi.values[i * ne + ne - 1] - 1.0) < 1e-12);  // top plate
        CHECK(psi.z[i * ne + 0] == doctest::Approx(-1.0));
        CHECK(psi.z[i * ne + ne - 1] == doctest::Approx(u.values[i]));
    }
}

TEST_CASE("energy sandwich on random admissible fields") {
    Grid1D g(47);
    std::mt19937 rng(11);
    for (int k = 0; k < 20; ++k) {
        DeflectionField u = testutil::random_admissible(g, rng, 0.5);
        const double ee = electrostatic_energy(u, 0.3, 47);
        EnergyBounds b = energy_bounds(u, 0.3);
        CHECK(ee >= b.lower - 1e-6 * b.upper);
        CHECK(ee <= b.upper + 1e-6 * b.upper);
    }
}

TEST_CASE("energy monotone in the deflection") {
    Grid1D g(47);
    std::mt19937 rng(13);
    for (int k = 0; k < 10; ++k) {
        DeflectionField u1 = testutil::random_admissible(g, rng, 0.5);
        DeflectionField u2 = u1;
        for (int i = 0; i < g.num_nodes(); ++i) {
            const double s = 1.0 - g.x[i] * g.x[i];
            u2.values[i] += 0.2 * s * s;  // u2 >= u1
        }
        const double e1 = electrostatic_energy(u1, 0.3, 47);
        const double e2 = electrostatic_energy(u2, 0.3, 47);
        CHECK(e2 <= e1 + 1e-6);
    }
}

TEST_CASE("energy identity residual shrinks under refinement") {
    auto make_u = [](const Grid1D& g) {
        DeflectionField u(g);
        for (int i = 0; i < g.num_nodes(); ++i) {
            const double s = 1.0 - g.x[i] * g.x[i];
            u.values[i] = -0.3 * s * s;
        }
        return u;
    };
    Grid1D g1(63), g2(127);
    const double r1 = energy_identity_residual(make_u(g1), 0.2, 63);
    const double r2 = energy_identity_residual(make_u(g2), 0.2, 127);
    CHECK(r1 < 1e-3);
    CHECK(r2 < r1);
}

TEST_CASE("g converges to the small-gap nonlinearity as epsilon shrinks") {
    Grid1D g(63);
    DeflectionField u(g);
    for (int i = 0; i < g.num_nodes(); ++i) {
        const double s = 1.0 - g.x[i] * g.x[i];
        u.values[i] = -0.4 * s * s;
    }
    double prev = 1e300;
    for (double eps : {0.4, 0.2, 0.1}) {
        Profile ge = compute_g(u, eps, 63);
        double err = 0.0;
        for (int i = 0; i < g.num_nodes(); ++i) {
            const double w = 1.0 + u.values[i];
            err = std::max(err, std::abs(ge.values[i] - 1.0 / (w * w)));
        }
        CHECK(err < prev);
        prev = err;
    }
    // O(eps^2) gap with an order-one constant for this deep deflection
    CHECK(prev < 2.5e-2);
}

TEST_CASE("assembly refuses near-touchdown geometry") {
    Grid1D g(31);
    DeflectionField u(g);
    for (int i = 1; i <= g.n; ++i) u.values[i] = -1.0 + 1e-9;
    CHECK_THROWS_AS(assemble_transformed(u, 0.1, 31), SingularGeometryError);
}

TEST_CASE("csv writers emit headers") {
    Grid1D g(15);
    DeflectionField u(g);
    auto sys = assemble_transformed(u, 0.1, 15);
    auto phi = solve_potential(sys);
    const char* path = "test_phi_out.csv";
    write_potential_csv(phi, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,eta,value");
    in.close();
    std::remove(path);

    const char* path2 = "test_psi_out.csv";
    write_psi_csv(reconstruct_psi(phi, u), path2);
    std::ifstream in2(path2);
    std::getline(in2, header);
    CHECK(header == "x,z,value");
    in2.close();
    std::remove(path2);
}
