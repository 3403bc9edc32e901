#include <catch2/catch_amalgamated.hpp>

#include "chlab/models.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace chlab::models;
using chlab::geometry::DoubleNullPoint;
using chlab::geometry::WeightVector;

static constexpr double kPi = 3.14159265358979323846;
static constexpr double kInf = std::numeric_limits<double>::infinity();

TEST_CASE("WMS split: potential coefficient and odd remainder") {
    EquationSpec spec{EquationFamily::WMS, 3, 0, 1, ProfileKindTag::Zero};
    auto s = nonlinearity_split(spec, Profile::zero());

    DoubleNullPoint p{-0.5, 0.3}; // r = 0.8
    const double r = p.r();
    // K(d+K-2) = 2 for K=1, d=3: V = 2/r^2
    CHECK(s.V(p) == Catch::Approx(2.0 / (r * r)).epsilon(1e-14));
    CHECK(s.N(p, 0.0, 0, 0) == 0.0);
    // N = K(d+K-2)(sin 2phi - 2phi)/(2 r^2)
    const double phi = 0.37;
    CHECK(s.N(p, phi, 0, 0) ==
          Catch::Approx(2.0 * (std::sin(2 * phi) - 2 * phi) / (2 * r * r)).epsilon(1e-13));
}

TEST_CASE("NW split solves Box phi + phi^p = 0, so N(phi) = -phi^p") {
    // The printed equation is Box phi + phi^p = 0 while the characteristic
    // problem is Box phi = N + V phi + f; hence N = -phi^p.
    EquationSpec spec{EquationFamily::NW, 3, 5, 1, ProfileKindTag::Zero};
    auto s = nonlinearity_split(spec, Profile::zero());
    DoubleNullPoint p{-0.5, 0.3};
    CHECK(s.V(p) == 0.0);
    CHECK(s.N(p, 2.0, 0, 0) == Catch::Approx(-32.0));
    CHECK(s.N(p, 0.0, 0, 0) == 0.0);
}

TEST_CASE("null-form split is the radial reduction of phi dphi.dphi") {
    EquationSpec spec{EquationFamily::Nullform, 3, 0, 1, ProfileKindTag::Zero};
    auto s = nonlinearity_split(spec, Profile::zero());
    DoubleNullPoint p{-0.5, 0.3};
    CHECK(s.needs_gradient);
    // eta^{-1}(dphi,dphi) = -du(phi) dv(phi) radially
    CHECK(s.N(p, 2.0, 3.0, 5.0) == Catch::Approx(-30.0));
    CHECK(s.N(p, 0.0, 3.0, 5.0) == 0.0);
}

TEST_CASE("split potential equals the phi-derivative of the full RHS at the background") {
    // finite-difference linearization check, order h^2
    struct Case {
        EquationSpec spec;
        Profile bg;
    };
    const Case cases[] = {
        {{EquationFamily::WMS, 3, 0, 1, ProfileKindTag::Zero}, Profile::zero()},
        {{EquationFamily::WMS, 7, 0, 1, ProfileKindTag::SupercriticalEquatorial},
         Profile::supercritical_equatorial()},
        {{EquationFamily::NW, 11, 7, 1, ProfileKindTag::SupercriticalPower},
         Profile::supercritical_power(11, 7)},
    };
    DoubleNullPoint p{-0.4, 0.2};
    for (const auto& c : cases) {
        auto s = nonlinearity_split(c.spec, c.bg);
        auto total = [&](double phi) { return s.N(p, phi, 0, 0) + s.V(p) * phi; };
        const double h = 1e-6;
        const double dtotal = (total(h) - total(-h)) / (2 * h);
        CHECK(dtotal == Catch::Approx(s.V(p)).epsilon(1e-7));
    }
}

TEST_CASE("admissibility gate: printed boundaries") {
    EquationSpec nw35{EquationFamily::NW, 3, 5, 1, ProfileKindTag::Zero};
    EquationSpec nw43{EquationFamily::NW, 4, 3, 1, ProfileKindTag::Zero};
    EquationSpec wms{EquationFamily::WMS, 3, 0, 1, ProfileKindTag::Zero};

    // interior point accepted
    auto ok = check_exponents(nw35, {kInf, -0.25, -0.1});
    CHECK(ok.ok);
    CHECK(ok.delta > 0.0);

    // a0 = -1/2 for d=3, p=5 rejected citing the printed inequality
    auto bad = check_exponents(nw35, {kInf, -0.5, -0.1});
    CHECK_FALSE(bad.ok);
    CHECK(bad.reason.find("5a0+2>a0") != std::string::npos);

    // a0 = -1 for d=4, p=3 rejected
    CHECK_FALSE(check_exponents(nw43, {kInf, -1.0, -0.1}).ok);
    CHECK(check_exponents(nw43, {kInf, -0.9, -0.1}).ok);

    // WMS needs a0 > 0
    auto wbad = check_exponents(wms, {kInf, 0.0, -0.1});
    CHECK_FALSE(wbad.ok);
    CHECK(wbad.reason.find("a0>0") != std::string::npos);

    // a+ < 0 and the ordering of the peeled weights
    CHECK_FALSE(check_exponents(wms, {kInf, 0.5, 0.1}).ok);
    CHECK_FALSE(check_exponents(wms, {1.0, 0.5, -0.1}).ok); // 1.0 < 0.5 + 1
    CHECK(check_exponents(wms, {2.0, 0.5, -0.1}).ok);
}

TEST_CASE("admissibility monotone under enlarging a_minus / joint a_zero shifts") {
    EquationSpec wms{EquationFamily::WMS, 3, 0, 1, ProfileKindTag::Zero};
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> a0d(0.05, 2.0), apd(-1.5, -0.01), bump(0.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        WeightVector a{0.0, a0d(rng), apd(rng)};
        a.a_minus = a.a_zero + 1.0 + bump(rng) + 0.01;
        auto v = check_exponents(wms, a);
        if (!v.ok) continue;
        // raising a_minus alone never breaks admissibility
        WeightVector b = a;
        b.a_minus += bump(rng);
        CHECK(check_exponents(wms, b).ok);
        // raising a_zero with a_minus lifted alongside never breaks it
        WeightVector c = a;
        const double db = bump(rng);
        c.a_zero += db;
        c.a_minus += db;
        CHECK(check_exponents(wms, c).ok);
        // with a_minus = infinity, raising a_zero alone never breaks it
        WeightVector e = a;
        e.a_minus = kInf;
        e.a_zero += bump(rng);
        CHECK(check_exponents(wms, e).ok);
    }
}

TEST_CASE("exponent constants satisfy the printed relations") {
    // p=3, d=7: c^2 = d - 3 = 4
    auto ec = exponent_constants(EquationFamily::NW, 7, 3);
    CHECK(ec.c_pd == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(ec.c == Catch::Approx(1.0));
    // residual of the defining relation
    const double resid = 0.5 * (3 - 1) * std::pow(ec.c_pd, 3 - 1) - (7 - 2 - 2.0 / (3 - 1));
    CHECK(std::abs(resid) < 1e-13);

    // d=7: gamma = 2 since d^2-8d+8 = 1
    CHECK(gamma_supercritical(7) == Catch::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(gamma_supercritical(6), std::domain_error);

    // WM scaling exponent c = 0, NW c = 1 at p=3
    CHECK(exponent_constants(EquationFamily::WMS, 3).c == 0.0);

    // residual check across a parameter range
    for (int d = 3; d <= 12; ++d)
        for (int p : {3, 5, 7}) {
            if (double(d) - 2.0 - 2.0 / (p - 1) <= 0.0) continue;
            auto e = exponent_constants(EquationFamily::NW, d, p);
            const double r =
                0.5 * (p - 1) * std::pow(e.c_pd, p - 1) - (double(d) - 2.0 - 2.0 / (p - 1));
            CHECK(std::abs(r) < 1e-13);
        }
}

TEST_CASE("profile evaluation: constants and tails") {
    DoubleNullPoint p{-0.5, 0.3};

    auto eq = Profile::supercritical_equatorial();
    auto j = profile_eval(eq, p, 3);
    CHECK(j.value() == Catch::Approx(kPi / 2).epsilon(1e-15));
    for (std::size_t k = 1; k <= 3; ++k) CHECK(j.derivative(k) == 0.0);

    auto z = Profile::zero();
    CHECK(profile_eval(z, p, 2).value() == 0.0);

    // TypeII tail on C at r = 0.1 (u = -0.1, v -> 0): value = pi - 0.2 + e, |e| < 4e-3
    auto t2 = Profile::type2_tail(2.0);
    DoubleNullPoint onC{-0.1, 0.0};
    const double val = t2.value(onC);
    CHECK(std::abs(val - (kPi - 0.2)) < 4e-3);
    // high-precision oracle: pi - 2 atan(r^{nu-1})
    CHECK(val == Catch::Approx(kPi - 2.0 * std::atan(0.1)).epsilon(1e-13));

    // power profile: c_{p,d} r^{-2/(p-1)}
    auto sp = Profile::supercritical_power(11, 7);
    const double cpd = exponent_constants(EquationFamily::NW, 11, 7).c_pd;
    CHECK(sp.value(p) == Catch::Approx(cpd * std::pow(p.r(), -2.0 / 6.0)).epsilon(1e-13));
    CHECK_THROWS_AS(sp.value(DoubleNullPoint{0.2, 0.2}), std::domain_error);
}

TEST_CASE("TypeII trace deviation from pi fits exponent nu-1") {
    for (double nu : {1.5, 2.0, 3.0}) {
        auto t2 = Profile::type2_tail(nu);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (double r = 1e-3; r <= 0.1; r *= 1.3) {
            const double dev = kPi - t2.value({-r, 0.0});
            const double lx = std::log(r), ly = std::log(std::abs(dev));
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
            ++n;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK(std::abs(slope - (nu - 1.0)) < 0.05);
    }
}
