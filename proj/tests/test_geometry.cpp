#include <catch2/catch_amalgamated.hpp>

#include "chlab/geometry.hpp"

#include <cmath>
#include <random>

using namespace chlab::geometry;

TEST_CASE("rho_eval at reference points") {
    auto r = rho_eval({-1.0, 1.0});
    CHECK(r.minus == Catch::Approx(0.5));
    CHECK(r.zero == Catch::Approx(2.0));
    CHECK(r.plus == Catch::Approx(0.5));

    // boundary C has v = 0
    auto rc = rho_eval({-1.0, 0.0});
    CHECK(rc.minus == 0.0);
    CHECK(rc.zero == Catch::Approx(1.0));
    CHECK(rc.plus == Catch::Approx(1.0));

    CHECK_THROWS_AS(rho_eval({0.5, 0.2}), std::domain_error);
}

TEST_CASE("rho_- + rho_+ = 1 identically") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> uu(-2.0, -1e-6), vv(1e-6, 2.0);
    for (int i = 0; i < 1000; ++i) {
        auto r = rho_eval({uu(rng), vv(rng)});
        CHECK(r.minus + r.plus == Catch::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("compactify fixed point and printed example") {
    auto q = compactify({-1.0, 1.0});
    CHECK(q.u == Catch::Approx(-1.0));
    CHECK(q.v == Catch::Approx(1.0));

    auto w = compactify({-0.5, 0.25});
    CHECK(w.u == Catch::Approx(-4.0));
    CHECK(w.v == Catch::Approx(2.0));

    CHECK_THROWS_AS(compactify({0.0, 1.0}), std::domain_error);
}

TEST_CASE("compactify round trip on random points") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uu(-3.0, -1e-4), vv(1e-4, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        DoubleNullPoint p{uu(rng), vv(rng)};
        auto q = decompactify(compactify(p));
        worst = std::max(worst, std::abs(q.u - p.u) / std::abs(p.u));
        worst = std::max(worst, std::abs(q.v - p.v) / std::abs(p.v));
    }
    CHECK(worst < 1e-14);
}

TEST_CASE("build_grid corner cases and measures") {
    DomainSpec s;
    s.Nu = 2;
    s.Nv = 2;
    s.u_left = -1.0;
    s.u_eps = 0.5;
    s.v_min = 0.25;
    s.v_max = 0.5;
    s.stretch_u = Stretching::Uniform;
    s.stretch_v = Stretching::Uniform;
    Grid g(s);
    CHECK(g.u(0) == -1.0);
    CHECK(g.u(1) == -0.5);
    CHECK(g.v(0) == 0.25);
    CHECK(g.v(1) == 0.5);

    // total mu_b of [-1,-1/2] x [1/4,1/2] is (ln 2)^2
    const double l2 = std::log(2.0);
    CHECK(g.total_mu_b() == Catch::Approx(l2 * l2).epsilon(1e-13));

    // same once subdivided: the measure is per-cell exact
    s.Nu = 33;
    s.Nv = 17;
    s.stretch_u = Stretching::Geometric;
    s.stretch_v = Stretching::Geometric;
    Grid g2(s);
    CHECK(g2.total_mu_b() == Catch::Approx(l2 * l2).epsilon(1e-12));
}

TEST_CASE("geometric stretching has constant spacing ratio") {
    DomainSpec s;
    s.Nu = 64;
    s.Nv = 64;
    s.v_min = 1e-4;
    s.v_max = 1.0;
    Grid g(s);
    const auto& v = g.vlines();
    const double r0 = (v[2] - v[1]) / (v[1] - v[0]);
    for (std::size_t j = 1; j + 2 < v.size(); ++j) {
        const double r = (v[j + 2] - v[j + 1]) / (v[j + 1] - v[j]);
        CHECK(r == Catch::Approx(r0).epsilon(1e-12));
    }
}

TEST_CASE("invalid domain specs are rejected") {
    DomainSpec s;
    s.v_min = 0.0;
    CHECK_THROWS_AS(Grid(s), std::invalid_argument);
    s = DomainSpec{};
    s.Nu = 1;
    CHECK_THROWS_AS(Grid(s), std::invalid_argument);
    s = DomainSpec{};
    s.u_left = 1.0;
    CHECK_THROWS_AS(Grid(s), std::invalid_argument);
}

TEST_CASE("apply_vf identity, constants and bilinear fields") {
    DomainSpec s;
    s.Nu = 65;
    s.Nv = 65;
    s.v_min = 0.1;
    s.v_max = 1.0;
    s.u_eps = 0.1;
    Grid g(s);

    auto bil = [&](std::size_t i, std::size_t j) { return g.u(i) * g.v(j); };
    auto cst = [&](std::size_t, std::size_t) { return 3.25; };

    CHECK(apply_vf(VectorFieldTag::Identity, g, bil, 5, 7) == Catch::Approx(bil(5, 7)));
    // u du (u v) = u v exactly; centered differences are exact on bilinear data
    CHECK(apply_vf(VectorFieldTag::UDu, g, bil, 10, 12) ==
          Catch::Approx(g.u(10) * g.v(12)).epsilon(1e-12));
    CHECK(apply_vf(VectorFieldTag::VDv, g, bil, 10, 12) ==
          Catch::Approx(g.u(10) * g.v(12)).epsilon(1e-12));
    CHECK(apply_vf(VectorFieldTag::UDu, g, cst, 3, 3) == Catch::Approx(0.0).margin(1e-12));
    CHECK(apply_vf(VectorFieldTag::Rotation, g, bil, 4, 4) == 0.0);
    CHECK_THROWS_AS(apply_vf(VectorFieldTag::UDu, g, bil, 0, 4), std::out_of_range);
}

TEST_CASE("apply_vf converges at second order on smooth fields") {
    auto rate = [&](std::size_t n) {
        DomainSpec s;
        s.Nu = n;
        s.Nv = n;
        s.v_min = 0.2;
        s.v_max = 1.0;
        s.u_eps = 0.2;
        Grid g(s);
        auto f = [&](std::size_t i, std::size_t j) {
            return std::sin(g.u(i) * 2.0) * std::cos(g.v(j));
        };
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < g.nu(); i += 3)
            for (std::size_t j = 1; j + 1 < g.nv(); j += 3) {
                const double ex = g.u(i) * 2.0 * std::cos(2.0 * g.u(i)) * std::cos(g.v(j));
                worst = std::max(worst,
                                 std::abs(apply_vf(VectorFieldTag::UDu, g, f, i, j) - ex));
            }
        return worst;
    };
    const double e1 = rate(65), e2 = rate(129), e3 = rate(257);
    const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
    CHECK(p1 > 1.8);
    CHECK(p2 > 1.8);
    CHECK(p2 < 2.4);
}

TEST_CASE("grid csv round trip") {
    DomainSpec s;
    s.Nu = 17;
    s.Nv = 9;
    Grid g(s);
    const std::string path = "grid_roundtrip_test.csv";
    save_grid_csv(g, path);
    Grid h = load_grid_csv(path, s.d);
    REQUIRE(h.nu() == g.nu());
    REQUIRE(h.nv() == g.nv());
    for (std::size_t i = 0; i < g.nu(); ++i)
        CHECK(h.u(i) == Catch::Approx(g.u(i)).epsilon(1e-15));
    std::remove(path.c_str());
}

TEST_CASE("global-chart corner weight") {
    DoubleNullPoint p{-0.5, 0.25};
    CHECK(rho_zero_global(p) == Catch::Approx(-(p.r()) / (p.u * p.v)));
    CHECK(rho_zero_global(p) > 0.0);
}
