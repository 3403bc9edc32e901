#include <catch2/catch_amalgamated.hpp>

#include "chlab/jets.hpp"

#include <cmath>

using chlab::Jet;

TEST_CASE("jet arithmetic reproduces derivatives of composite expressions") {
    const double x0 = 0.7;
    Jet x = Jet::variable(5, x0);
    Jet f = sin(2.0 * x) / (1.0 + x * x);

    auto fexact = [](double t) { return std::sin(2.0 * t) / (1.0 + t * t); };
    const double h = 1e-5;
    const double d1 = (fexact(x0 + h) - fexact(x0 - h)) / (2 * h);
    const double d2 = (fexact(x0 + h) - 2 * fexact(x0) + fexact(x0 - h)) / (h * h);

    CHECK(f.value() == Catch::Approx(fexact(x0)).epsilon(1e-14));
    CHECK(f.derivative(1) == Catch::Approx(d1).epsilon(1e-8));
    CHECK(f.derivative(2) == Catch::Approx(d2).epsilon(1e-5));
}

TEST_CASE("jet atan and real powers") {
    const double x0 = 0.3;
    Jet x = Jet::variable(4, x0);
    Jet f = atan(pow(x, 1.5));
    auto fe = [](double t) { return std::atan(std::pow(t, 1.5)); };
    const double h = 1e-5;
    CHECK(f.value() == Catch::Approx(fe(x0)).epsilon(1e-14));
    CHECK(f.derivative(1) == Catch::Approx((fe(x0 + h) - fe(x0 - h)) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("jet division and integer powers") {
    Jet x = Jet::variable(6, 2.0);
    Jet g = pow(x, 3) / (x - 1.0);
    // g(x) = x^3/(x-1); value at 2 is 8
    CHECK(g.value() == Catch::Approx(8.0));
    // g'(x) = (3x^2(x-1) - x^3)/(x-1)^2 = (2x^3 - 3x^2)/(x-1)^2 -> (16-12)/1 = 4
    CHECK(g.derivative(1) == Catch::Approx(4.0));
}

TEST_CASE("jet derivative-shift consistency") {
    Jet x = Jet::variable(5, 1.1);
    Jet f = exp(0.5 * x) * cos(x);
    Jet fd = f.d();
    for (std::size_t k = 0; k + 1 <= 4; ++k)
        CHECK(fd.derivative(k) == Catch::Approx(f.derivative(k + 1)).margin(1e-12));
}
