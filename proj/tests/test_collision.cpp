#include <catch2/catch_amalgamated.hpp>

#include "vpl/collision.hpp"

using namespace vpl;
using Catch::Approx;

namespace {

Field random_mixture(const VelocityGrid& g, std::uint64_t seed, int ngauss = 3) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> uu(-0.8, 0.8), uq(1.0, 2.0), ua(0.5, 1.5);
    Field F(g);
    for (int m = 0; m < ngauss; ++m) {
        const vec3 u = {uu(rng), uu(rng), uu(rng)};
        const double q = uq(rng), amp = ua(rng);
        for (std::int64_t i = 0; i < g.size(); ++i)
            F.values[static_cast<std::size_t>(i)] += amp * maxwellian_value(q, g.node(i) - u);
    }
    const double mass = moments(F)[0].density;
    F *= 1.0 / mass;
    return F;
}

double mass_of(const Field& Q) {
    return block_sum(Q.values) * Q.vg.cell_volume();
}

}  // namespace

TEST_CASE("q_landau annihilates maxwellian pairs") {
    VelocityGrid g(32, 6.0);
    Field mu = maxwellian(1.0, g);
    Field mu_arg = mu;  // separate storage, identical values -> log-form path
    Field Q = q_landau(mu, mu_arg);
    double sup = 0;
    for (double v : Q.values) sup = std::max(sup, std::abs(v));
    REQUIRE(sup < 1e-6);
    REQUIRE(std::abs(mass_of(Q)) < 1e-14);
}

TEST_CASE("collision outputs have zero mass exactly") {
    VelocityGrid g(16, 6.0);
    Field F = random_mixture(g, 3);
    Field G = random_mixture(g, 4);
    Field Qs = q_landau(F, F);
    Field Qb = q_landau(F, G);
    const double scale = g.cell_volume() * *std::max_element(Qs.values.begin(), Qs.values.end());
    REQUIRE(std::abs(mass_of(Qs)) < 1e-13 * std::max(1.0, std::abs(scale)));
    REQUIRE(std::abs(mass_of(Qb)) < 1e-13);
}

TEST_CASE("momentum and energy defects: log form near-exact, flux form second order") {
    // nonlinear (pairwise) path: defects are boundary/rounding level
    for (int n : {16, 24}) {
        VelocityGrid g(n, 6.0);
        Field F = random_mixture(g, 7);
        Field Q = q_landau(F, F);
        const double w = g.cell_volume();
        double px = 0, e = 0;
        for (std::int64_t i = 0; i < g.size(); ++i) {
            const vec3 v = g.node(i);
            const double q = Q.values[static_cast<std::size_t>(i)];
            px += q * v[0];
            e += 0.5 * q * norm2(v);
        }
        REQUIRE(std::abs(px) * w < 1e-8);
        REQUIRE(std::abs(e) * w < 1e-8);
    }
    // bilinear flux form: relative defects follow the second-order trend
    double rel_en[2];
    int k = 0;
    for (int n : {16, 24}) {
        VelocityGrid g(n, 6.0);
        Field F = random_mixture(g, 7);
        Field Q(g, Species::ion, true);
        q_landau_bilinear_slice(g, F.values.data(), F.values.data(), Q.values.data());
        const double w = g.cell_volume();
        double e = 0, scale = 0;
        for (std::int64_t i = 0; i < g.size(); ++i) {
            const vec3 v = g.node(i);
            const double q = Q.values[static_cast<std::size_t>(i)];
            e += 0.5 * q * norm2(v);
            scale += 0.5 * std::abs(q) * norm2(v);
        }
        rel_en[k++] = std::abs(e) / scale;
    }
    INFO("relative energy defect " << rel_en[0] << " -> " << rel_en[1]);
    REQUIRE(rel_en[0] / rel_en[1] > 2.0);
}

TEST_CASE("pair-sum oracle conserves momentum and energy to rounding") {
    VelocityGrid g(12, 6.0);
    Field F = random_mixture(g, 11);
    Field Q = q_landau_pair_oracle(F);
    const double w = g.cell_volume();
    double px = 0, e = 0, sup = 0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const vec3 v = g.node(i);
        px += Q.values[static_cast<std::size_t>(i)] * v[0];
        e += 0.5 * Q.values[static_cast<std::size_t>(i)] * norm2(v);
        sup = std::max(sup, std::abs(Q.values[static_cast<std::size_t>(i)]));
    }
    REQUIRE(std::abs(px * w) < 1e-7 * sup);
    REQUIRE(std::abs(e * w) < 1e-7 * sup);
    // flux-form momentum/energy defects measured against the oracle's exact zeros
    Field Qf(g, F.species, true);
    q_landau_bilinear_slice(g, F.values.data(), F.values.data(), Qf.values.data());
    double pxf = 0;
    for (std::int64_t i = 0; i < g.size(); ++i)
        pxf += Qf.values[static_cast<std::size_t>(i)] * g.node(i)[0];
    REQUIRE(std::abs(pxf * w) < 1e-2 * sup);  // second-order defect, not exact
}

TEST_CASE("flux-form equilibrium defect is O(h^2) with stable constant") {
    // tau(h) = C h^2 + tail: C measured stable across 16/24 at fixed R
    double defect[2];
    int k = 0;
    for (int n : {16, 24}) {
        VelocityGrid g(n, 6.0);
        Field mu = maxwellian(1.0, g);
        Field Q(g, Species::ion, true);
        q_landau_bilinear_slice(g, mu.values.data(), mu.values.data(), Q.values.data());
        double sup = 0;
        for (double v : Q.values) sup = std::max(sup, std::abs(v));
        defect[k++] = sup;
    }
    const double C16 = defect[0] / (0.75 * 0.75);
    const double C24 = defect[1] / (0.5 * 0.5);
    INFO("defects " << defect[0] << " " << defect[1] << " C " << C16 << " " << C24);
    REQUIRE(C24 < 3.0 * C16);
    REQUIRE(C16 < 3.0 * C24);
}

TEST_CASE("entropy dissipation") {
    VelocityGrid g(16, 6.0);
    Field mu = maxwellian(1.0, g);
    auto em = entropy_dissipation(mu);
    REQUIRE(em.symmetric >= 0.0);
    REQUIRE(em.symmetric < 1e-8);

    // bimodal mixture: strictly positive dissipation, two evaluations agree
    Field F(g);
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const vec3 v = g.node(i);
        F.values[static_cast<std::size_t>(i)] =
            0.5 * maxwellian_value(1.4, v - vec3{0.9, 0, 0}) + 0.5 * maxwellian_value(1.4, v + vec3{0.9, 0, 0});
    }
    auto eb = entropy_dissipation(F);
    REQUIRE(eb.symmetric > 1e-3);
    REQUIRE(eb.direct == Approx(eb.symmetric).epsilon(0.2));
    REQUIRE(eb.symmetric >= -1e-10);
}

TEST_CASE("H-theorem sign on random positive states") {
    VelocityGrid g(12, 5.0);
    for (std::uint64_t s = 0; s < 6; ++s) {
        Field F = random_mixture(g, 100 + s, 2);
        auto e = entropy_dissipation(F);
        REQUIRE(e.symmetric >= -1e-10);
    }
}

TEST_CASE("linearized L: kernel annihilation, positivity, symmetry") {
    VelocityGrid g(24, 6.0);
    const double gamma = 1.0;
    auto sqmu = maxwellian(gamma, g);
    for (auto& v : sqmu.values) v = std::sqrt(v);

    // five kernel elements chi: sqrt(mu), xi_k sqrt(mu), |xi|^2 sqrt(mu)
    std::vector<Field> kernel_elems;
    for (int mode = 0; mode < 5; ++mode) {
        Field chi(g, Species::electron, true);
        for (std::int64_t i = 0; i < g.size(); ++i) {
            const vec3 v = g.node(i);
            double f = sqmu.values[static_cast<std::size_t>(i)];
            if (mode >= 1 && mode <= 3) f *= v[mode - 1];
            if (mode == 4) f *= norm2(v);
            chi.values[static_cast<std::size_t>(i)] = f;
        }
        kernel_elems.push_back(std::move(chi));
    }
    for (const auto& chi : kernel_elems) {
        Field L = linearized_L(chi, gamma);
        REQUIRE(l2_norm(L) < 1e-10 * std::max(1.0, l2_norm(chi)));
    }

    auto rng = make_rng(17);
    std::normal_distribution<double> nd(0, 1);
    const double w3 = g.cell_volume();
    for (int t = 0; t < 3; ++t) {
        Field h1(g, Species::electron, true), h2(g, Species::electron, true);
        for (std::int64_t i = 0; i < g.size(); ++i) {
            const double damp = std::exp(-0.2 * norm2(g.node(i)));
            h1.values[static_cast<std::size_t>(i)] = nd(rng) * damp;
            h2.values[static_cast<std::size_t>(i)] = nd(rng) * damp;
        }
        Field L1 = linearized_L(h1, gamma);
        Field L2 = linearized_L(h2, gamma);
        double q11 = 0, q12 = 0, q21 = 0;
        for (std::int64_t i = 0; i < g.size(); ++i) {
            q11 += L1.values[static_cast<std::size_t>(i)] * h1.values[static_cast<std::size_t>(i)];
            q12 += L1.values[static_cast<std::size_t>(i)] * h2.values[static_cast<std::size_t>(i)];
            q21 += L2.values[static_cast<std::size_t>(i)] * h1.values[static_cast<std::size_t>(i)];
        }
        REQUIRE(q11 * w3 >= 0.0);
        REQUIRE(q12 == Approx(q21).epsilon(1e-10));
    }
}

TEST_CASE("L tilde reduces to L at q = gamma and shows coercivity pattern") {
    VelocityGrid g(16, 6.0);
    const double gamma = 1.0;
    auto rng = make_rng(23);
    std::normal_distribution<double> nd(0, 1);
    Field h(g, Species::electron, true);
    for (std::int64_t i = 0; i < g.size(); ++i)
        h.values[static_cast<std::size_t>(i)] = nd(rng) * std::exp(-0.2 * norm2(g.node(i)));

    Field a = linearized_L_tilde(h, gamma, gamma);
    Field b = linearized_L(h, gamma);
    double diff = 0, scale = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        diff = std::max(diff, std::abs(a.values[i] - b.values[i]));
        scale = std::max(scale, std::abs(b.values[i]));
    }
    REQUIRE(diff < 1e-12 * std::max(scale, 1.0));

    // eta = |ln(gamma/q)| = 0.05: quadratic form controls the projected part
    const double eta = 0.05;
    const double q = gamma * std::exp(eta);
    Field Lt = linearized_L_tilde(h, gamma, q);
    const double w3 = g.cell_volume();
    double quad = 0;
    for (std::size_t i = 0; i < h.values.size(); ++i) quad += Lt.values[i] * h.values[i];
    quad *= w3;
    const double hs = sigma_norm(h, NormSpec::h_sigma());
    // <Lt h, h> >= -C eta^2 ||h||_{H_sigma}^2 with a moderate fitted constant
    REQUIRE(quad > -10.0 * eta * eta * hs * hs);
}

TEST_CASE("Gamma bilinear zeros") {
    VelocityGrid g(16, 6.0);
    const double q = 1.0;
    Field zero(g, Species::electron, true);
    Field h(g, Species::electron, true);
    for (std::int64_t i = 0; i < g.size(); ++i)
        h.values[static_cast<std::size_t>(i)] = std::exp(-0.3 * norm2(g.node(i)));
    Field g0 = gamma_bilinear(zero, h, q);
    REQUIRE(l2_norm(g0) == 0.0);

    // Gamma(sqrt(mu) c, sqrt(mu) c) ~ -mu^{-1/2} Q(mu,mu) c^2: small in the bulk
    Field sq(g, Species::electron, true);
    for (std::int64_t i = 0; i < g.size(); ++i)
        sq.values[static_cast<std::size_t>(i)] = std::sqrt(maxwellian_value(q, g.node(i)));
    Field ge = gamma_bilinear(sq, sq, q);
    // weight down the amplified tail: measure against mu^{1/2}-weighted norm
    double weighted = 0;
    for (std::int64_t i = 0; i < g.size(); ++i)
        weighted = std::max(weighted, std::abs(ge.values[static_cast<std::size_t>(i)]) *
                                          sq.values[static_cast<std::size_t>(i)]);
    REQUIRE(weighted < 5e-3);
}

TEST_CASE("trilinear Gamma estimate pattern") {
    VelocityGrid g(12, 5.0);
    const double q = 1.0, qp = 0.5;
    auto rng = make_rng(31);
    std::normal_distribution<double> nd(0, 1);
    for (int t = 0; t < 3; ++t) {
        std::array<Field, 3> h;
        for (auto& f : h) {
            f = Field(g, Species::electron, true);
            for (std::int64_t i = 0; i < g.size(); ++i)
                f.values[static_cast<std::size_t>(i)] = nd(rng) * std::exp(-0.3 * norm2(g.node(i)));
        }
        Field G = gamma_bilinear(h[0], h[1], q);
        double lhs = 0;
        for (std::size_t i = 0; i < G.values.size(); ++i) lhs += G.values[i] * h[2].values[i];
        lhs = std::abs(lhs) * g.cell_volume();
        const double rhs = (weighted_l2(h[0], WeightSpec::gauss(qp)) * sigma_norm(h[1], NormSpec::h_sigma()) +
                            sigma_norm(h[0], NormSpec::h_sigma()) * l2_norm(h[1])) *
                           sigma_norm(h[2], NormSpec::h_sigma());
        REQUIRE(lhs <= 100.0 * rhs);  // fitted constant, reported not asserted sharp
    }
}
