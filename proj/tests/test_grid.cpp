#include <catch2/catch_amalgamated.hpp>

#include "vpl/grid.hpp"

using namespace vpl;
using Catch::Approx;

TEST_CASE("velocity grid geometry") {
    VelocityGrid g(24, 6.0);
    REQUIRE(g.h == Approx(0.5));
    // exact symmetry: node(i) == -node(n-1-i) in floating point
    for (int i = 0; i < g.n; ++i) REQUIRE(g.coord(i) == -g.coord(g.n - 1 - i));
    // no node at the origin
    for (int i = 0; i < g.n; ++i) REQUIRE(g.coord(i) != 0.0);
    REQUIRE_THROWS_AS(VelocityGrid(7, 6.0), std::invalid_argument);
    REQUIRE_THROWS_AS(VelocityGrid(6, 6.0), std::invalid_argument);
    REQUIRE_THROWS_AS(VelocityGrid(24, -1.0), std::invalid_argument);
}

TEST_CASE("maxwellian mass and moments") {
    VelocityGrid g(24, 6.0);
    Field mu = maxwellian(1.0, g);
    auto m = moments(mu)[0];
    REQUIRE(m.density == Approx(1.0).margin(1e-8));
    REQUIRE(std::abs(m.momentum[0]) < 1e-14);
    REQUIRE(std::abs(m.momentum[1]) < 1e-14);
    REQUIRE(std::abs(m.momentum[2]) < 1e-14);
    REQUIRE(2.0 * m.kinetic_energy == Approx(3.0).margin(1e-7));  // int |v|^2 mu = 3/q

    // q != 1, R scaled per temperature
    const double q = 0.5;
    VelocityGrid g2(24, VelocityGrid::default_extent(q));
    Field mu2 = maxwellian(q, g2);
    auto m2 = moments(mu2)[0];
    REQUIRE(m2.density == Approx(1.0).margin(1e-8));
    REQUIRE(2.0 * m2.kinetic_energy == Approx(3.0 / q).margin(1e-6));

    REQUIRE_THROWS_AS(maxwellian(-1.0, g), std::domain_error);
    REQUIRE_THROWS_AS(maxwellian(0.0, g), std::domain_error);
}

TEST_CASE("moments of shifted maxwellian against closed form") {
    VelocityGrid g(28, 7.0);
    const double q = 1.2;
    const vec3 u = {0.4, -0.3, 0.2};
    Field f(g);
    for (std::int64_t i = 0; i < g.size(); ++i)
        f.values[static_cast<std::size_t>(i)] = maxwellian_value(q, g.node(i) - u);
    auto m = moments(f)[0];
    REQUIRE(m.density == Approx(1.0).margin(1e-8));
    for (int c = 0; c < 3; ++c) REQUIRE(m.momentum[c] == Approx(u[c]).margin(1e-8));
    REQUIRE(m.kinetic_energy == Approx(1.5 / q + 0.5 * norm2(u)).margin(1e-7));
}

TEST_CASE("moments are linear") {
    VelocityGrid g(16, 6.0);
    Field a = maxwellian(1.0, g), b = maxwellian(2.0, g);
    Field c(g);
    for (std::size_t i = 0; i < c.values.size(); ++i)
        c.values[i] = 2.0 * a.values[i] - 0.5 * b.values[i];
    auto ma = moments(a)[0], mb = moments(b)[0], mc = moments(c)[0];
    REQUIRE(mc.density == Approx(2.0 * ma.density - 0.5 * mb.density).epsilon(1e-12));
    REQUIRE(mc.kinetic_energy == Approx(2.0 * ma.kinetic_energy - 0.5 * mb.kinetic_energy).epsilon(1e-12));
}

TEST_CASE("moments of zero field") {
    VelocityGrid g(16, 6.0);
    Field z(g);
    auto m = moments(z)[0];
    REQUIRE(m.density == 0.0);
    REQUIRE(m.kinetic_energy == 0.0);
}

TEST_CASE("weighted L2 against analytic gaussian integral") {
    VelocityGrid g(32, 8.0);
    Field mu = maxwellian(1.0, g);
    // || e^{q|v|^2/4} mu_1 ||_2^2 = (1/2pi)^3 int e^{-(1-q/2)|v|^2} dv = (1/2pi)^3 (pi/(1-q/2))^{3/2}
    const double q = 0.5;
    const double a = 1.0 - 0.5 * q;
    const double exact = std::sqrt(std::pow(1.0 / (2.0 * M_PI), 3.0) * std::pow(M_PI / a, 1.5));
    REQUIRE(weighted_l2(mu, WeightSpec::gauss(q)) == Approx(exact).epsilon(1e-8));

    Field z(g);
    REQUIRE(weighted_l2(z, WeightSpec::gauss(q)) == 0.0);
    REQUIRE(weighted_l2(mu, WeightSpec::poly(0)) == Approx(l2_norm(mu)).epsilon(1e-14));

    // overflow guard: weight decays slower than the grid can resolve
    REQUIRE_THROWS_AS(weighted_l2(mu, WeightSpec::gauss(50.0)), numerical_error);
}

TEST_CASE("x derivative norm on a single mode") {
    SpatialGrid xg(16);
    VelocityGrid vg(12, 6.0);
    Field f = sample_field(xg, vg, [&](double x, const vec3& v) {
        return std::sin(2.0 * M_PI * x) * maxwellian_value(1.0, v);
    });
    const int s = 3;
    const double base = l2_norm(f);
    const double k = 2.0 * M_PI;
    const double expect = std::pow(1.0 + k * k, 0.5 * s) * base;
    REQUIRE(x_derivative_norm(f, s) == Approx(expect).epsilon(1e-12));
    REQUIRE(x_derivative_norm(f, 0) == Approx(base).epsilon(1e-14));

    // constant in x: <grad_x>^s acts as identity
    Field c = sample_field(xg, vg, [&](double, const vec3& v) { return maxwellian_value(1.0, v); });
    REQUIRE(x_derivative_norm(c, s) == Approx(l2_norm(c)).epsilon(1e-12));
}

TEST_CASE("norm properties on random fields") {
    VelocityGrid g(12, 5.0);
    auto rng = make_rng(11);
    std::normal_distribution<double> nd(0.0, 1.0);
    Field a(g), b(g);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        a.values[i] = nd(rng);
        b.values[i] = nd(rng);
    }
    for (auto w : {WeightSpec::poly(2), WeightSpec::gauss(0.3)}) {
        const double na = weighted_l2(a, w), nb = weighted_l2(b, w);
        Field s = a;
        s += b;
        REQUIRE(weighted_l2(s, w) <= na + nb + 1e-12);
        Field sc = a;
        sc *= -2.5;
        REQUIRE(weighted_l2(sc, w) == Approx(2.5 * na).epsilon(1e-12));
    }
}
