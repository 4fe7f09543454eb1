#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mems/core.hpp"

using namespace mems;

TEST_CASE("params validation") {
    Params p;
    CHECK_NOTHROW(p.validate());

    Params zero = p;
    zero.beta = 0.0;
    zero.tau = 0.0;
    CHECK_THROWS_AS(zero.validate(), std::invalid_argument);

    Params neg = p;
    neg.lambda = -1.0;
    CHECK_THROWS_AS(neg.validate(), std::invalid_argument);

    Params fb = p;
    fb.rhs = RhsKind::free_boundary;
    fb.epsilon = 0.0;
    CHECK_THROWS_AS(fb.validate(), std::invalid_argument);

    fb.rhs = RhsKind::small_gap;
    CHECK_NOTHROW(fb.validate());
}

TEST_CASE("grid construction") {
    Grid1D g(15);
    CHECK(g.num_nodes() == 17);
    CHECK(g.x.front() == -1.0);
    CHECK(g.x.back() == 1.0);
    CHECK(g.h == doctest::Approx(2.0 / 16.0));

    Grid2D g2(15, 7);
    CHECK(g2.eta.front() == 0.0);
    CHECK(g2.eta.back() == 1.0);
    CHECK(g2.heta == doctest::Approx(1.0 / 8.0));

    CHECK_THROWS_AS(make_grids(4, 63), std::invalid_argument);
    CHECK_THROWS_AS(make_grids(63, 4), std::invalid_argument);
}

TEST_CASE("deflection field validation") {
    Grid1D g(15);
    DeflectionField u(g);
    CHECK_NOTHROW(u.validate());

    u.values[0] = 0.1;
    CHECK_THROWS_AS(u.validate(), std::invalid_argument);
    u.values[0] = 0.0;

    u.values[5] = -1.5;
    CHECK_THROWS_AS(u.validate(), SingularGeometryError);
    CHECK(u.min() == -1.5);
}

TEST_CASE("trapezoid quadrature") {
    Grid1D g(255);
    std::vector<double> lin(g.num_nodes()), quartic(g.num_nodes());
    for (int i = 0; i < g.num_nodes(); ++i) {
        lin[i] = 3.0 * g.x[i] + 2.0;
        const double s = 1.0 - g.x[i] * g.x[i];
        quartic[i] = s * s;
    }
    CHECK(trapz(g, lin) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(trapz(g, quartic) == doctest::Approx(16.0 / 15.0).epsilon(1e-4));
}

TEST_CASE("difference quotients") {
    Grid1D g(127);
    std::vector<double> f(g.num_nodes());
    for (int i = 0; i < g.num_nodes(); ++i) {
        const double x = g.x[i];
        f[i] = x * x * x - 2.0 * x;
    }
    auto d1 = diff1(g, f);
    auto d2 = diff2(g, f);
    for (int i = 0; i < g.num_nodes(); ++i) {
        const double x = g.x[i];
        CHECK(d1[i] == doctest::Approx(3.0 * x * x - 2.0).epsilon(1e-3));
        CHECK(d2[i] == doctest::Approx(6.0 * x).epsilon(2e-2));
    }
    // interior second difference is exact on cubics
    CHECK(std::abs(d2[64] - 6.0 * g.x[64]) < 1e-10);
}

TEST_CASE("discrete norms") {
    Grid1D g(511);
    DeflectionField u(g);
    for (int i = 0; i < g.num_nodes(); ++i) {
        const double s = 1.0 - g.x[i] * g.x[i];
        u.values[i] = s * s;
    }
    Norms nm = discrete_norms(u);
    // ||u'||_2^2 = 256/105 for u = (1-x^2)^2
    CHECK(nm.h1_seminorm * nm.h1_seminorm == doctest::Approx(256.0 / 105.0).epsilon(1e-4));
    CHECK(nm.min_u == 0.0);
    CHECK(nm.l2 > 0.0);
}
