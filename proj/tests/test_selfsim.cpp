#include <catch2/catch_amalgamated.hpp>

#include "chlab/selfsim.hpp"

#include <cmath>
#include <cstdio>

using namespace chlab::selfsim;
using chlab::models::EquationFamily;

static constexpr double kPi = 3.14159265358979323846;

// Independent oracle for WMS d=3 K=1: the closed-form corotational profile
// Phi(y) = 2 atan2(y, 1-2y), checked against the ODE by an external
// integrator before freezing the values below.
static double ts_phi(double y) { return 2.0 * std::atan2(y, 1.0 - 2.0 * y); }
static double ts_dphi(double y) { return 2.0 / (y * y + (1.0 - 2.0 * y) * (1.0 - 2.0 * y)); }

TEST_CASE("WMS d=3 K=1 profile: shooting converges to the corotational profile") {
    auto prof = SelfSimilarProfile::solve(SelfSimilarODE::wms(3, 1));

    // axis slope (shooting parameter) is 2
    CHECK(prof.shoot_parameter() == Catch::Approx(2.0).epsilon(1e-8));

    // Phi0(0) = 0 exactly
    CHECK(prof.value(0.0) == 0.0);

    // frozen oracle values across both sonic points
    CHECK(prof.value(0.1) == Catch::Approx(ts_phi(0.1)).epsilon(1e-9));
    CHECK(prof.value(1.0 / 3.0) == Catch::Approx(kPi / 2).epsilon(1e-9));
    CHECK(prof.value(0.5) == Catch::Approx(kPi).epsilon(1e-9));
    CHECK(prof.value(0.75) == Catch::Approx(ts_phi(0.75)).epsilon(1e-9));
    CHECK(prof.value(1.0) == Catch::Approx(3.0 * kPi / 2).epsilon(1e-9));
    CHECK(prof.value(1.5) == Catch::Approx(ts_phi(1.5)).epsilon(1e-8));

    CHECK(prof.deriv(1.0 / 3.0) == Catch::Approx(9.0).epsilon(1e-7));
    CHECK(prof.deriv(1.0) == Catch::Approx(1.0).epsilon(1e-7));

    // strictly increasing on [0, 1]
    double prev = -1.0;
    for (double y = 0.0; y <= 1.0; y += 0.01) {
        const double val = prof.value(y);
        CHECK(val > prev);
        prev = val;
    }

    // tabulated ODE residual small; sonic defects small
    CHECK(prof.ode_residual() < 1e-7);
    CHECK(std::abs(prof.sonic_defect_13()) < 1e-6);
}

TEST_CASE("WMS profile against an independent dense sample of the closed form") {
    auto prof = SelfSimilarProfile::solve(SelfSimilarODE::wms(3, 1));
    double worst = 0.0;
    for (double y = 0.02; y <= 1.49; y += 0.013) {
        worst = std::max(worst, std::abs(prof.value(y) - ts_phi(y)));
        worst = std::max(worst, std::abs(prof.deriv(y) - ts_dphi(y)) / (1.0 + ts_dphi(y)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("profile jets from the ODE recursion match closed-form derivatives") {
    auto prof = SelfSimilarProfile::solve(SelfSimilarODE::wms(3, 1));
    // at the sonic point y = 1/3 (the cone C), jets come from the stored series
    auto j = prof.jet(1.0 / 3.0, 3);
    CHECK(j.value() == Catch::Approx(kPi / 2).epsilon(1e-8));
    CHECK(j.derivative(1) == Catch::Approx(9.0).epsilon(1e-6));
    // closed-form second derivative at 1/3: d/dy ts_dphi = -2(2y*... ) -> compute numerically
    const double h = 1e-5;
    const double d2 = (ts_dphi(1.0 / 3.0 + h) - ts_dphi(1.0 / 3.0 - h)) / (2 * h);
    CHECK(j.derivative(2) == Catch::Approx(d2).epsilon(1e-5));

    // at a regular point
    auto jr = prof.jet(0.6, 4);
    CHECK(jr.value() == Catch::Approx(ts_phi(0.6)).epsilon(1e-9));
    CHECK(jr.derivative(1) == Catch::Approx(ts_dphi(0.6)).epsilon(1e-8));
    const double d2r = (ts_dphi(0.6 + h) - ts_dphi(0.6 - h)) / (2 * h);
    CHECK(jr.derivative(2) == Catch::Approx(d2r).epsilon(1e-6));
}

TEST_CASE("NW d=7 p=3 profile: explicit rational solution recovered") {
    // oracle: Phi(y) = 4(1-2y)/(1-4y+5y^2) verified against the ODE
    // symbolically; axis value 4, Phi(1/3) = 6, Phi(1) = -2.
    auto prof = SelfSimilarProfile::solve(SelfSimilarODE::nw(7, 3));
    auto exact = [](double y) {
        return 4.0 * (1.0 - 2.0 * y) / (1.0 - 4.0 * y + 5.0 * y * y);
    };
    CHECK(prof.shoot_parameter() == Catch::Approx(4.0).epsilon(1e-7));
    CHECK(prof.value(1.0 / 3.0) == Catch::Approx(6.0).epsilon(1e-7));
    CHECK(prof.value(1.0) == Catch::Approx(-2.0).epsilon(1e-7));
    double worst = 0.0;
    for (double y = 0.05; y <= 0.999; y += 0.01)
        worst = std::max(worst, std::abs(prof.value(y) - exact(y)));
    CHECK(worst < 1e-7);
}

TEST_CASE("tabulation residual decreases under table refinement") {
    SelfSimilarProfile::Options coarse;
    coarse.table_size = 385;
    SelfSimilarProfile::Options fine;
    fine.table_size = 1537;
    auto pc = SelfSimilarProfile::solve(SelfSimilarODE::wms(3, 1), coarse);
    auto pf = SelfSimilarProfile::solve(SelfSimilarODE::wms(3, 1), fine);
    CHECK(pf.ode_residual() < pc.ode_residual());
    // quintic Hermite: expect at least ~16x improvement per dyadic step
    CHECK(pf.ode_residual() < pc.ode_residual() / 16.0);
}

TEST_CASE("shooting failure reports bracket diagnostics") {
    SelfSimilarProfile::Options opt;
    opt.bracket_lo = 1e-3;
    opt.bracket_hi = 2e-3; // no sign change in this sliver
    CHECK_THROWS_AS(SelfSimilarProfile::solve(SelfSimilarODE::wms(3, 1), opt), shooting_error);
}

TEST_CASE("profile csv serialization carries the metadata header") {
    auto prof = SelfSimilarProfile::solve(SelfSimilarODE::wms(3, 1));
    const std::string path = "selfsim_test_profile.csv";
    prof.save_csv(path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line.find("\"family\":\"wms\"") != std::string::npos);
    CHECK(line.find("shooting_parameter") != std::string::npos);
    std::getline(in, line);
    CHECK(line == "y,phi0,dphi0,ddphi0");
    std::remove(path.c_str());
}

TEST_CASE("wrapped Profile evaluates the background on the exterior") {
    auto bg = solve_self_similar_profile(3, 1);
    // on C: y = 1/3, so phi0|_C = pi/2 for the d=3 corotational profile
    chlab::models::DoubleNullPoint onC{-0.4, 0.0};
    CHECK(bg.value(onC) == Catch::Approx(kPi / 2).epsilon(1e-8));
    // interior of the exterior region: y = (v-u)/(v-3u)
    chlab::models::DoubleNullPoint pt{-0.4, 0.3};
    const double y = (pt.v - pt.u) / (pt.v - 3.0 * pt.u);
    CHECK(bg.value(pt) == Catch::Approx(ts_phi(y)).epsilon(1e-8));

    auto bgnw = solve_self_similar_profile_nw(7, 3);
    // phi0 = Phi(y)/T
    const double T = pt.v - 3.0 * pt.u;
    const double exact = 4.0 * (1.0 - 2.0 * y) / (1.0 - 4.0 * y + 5.0 * y * y) / T;
    CHECK(bgnw.value(pt) == Catch::Approx(exact).epsilon(1e-7));
}
