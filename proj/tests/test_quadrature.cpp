#include "doctest.h"

#include <cmath>

#include "errors.hpp"
#include "quadrature.hpp"

using namespace fracspde;

TEST_CASE("adaptive Gauss-Kronrod on smooth and peaked integrands") {
    CHECK(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, 3.14159265358979323846,
                             1e-14, 1e-12) == doctest::Approx(2.0).epsilon(1e-12));
    // narrow Gaussian
    auto peaked = [](double x) { return std::exp(-500.0 * (x - 0.37) * (x - 0.37)); };
    double want = std::sqrt(3.14159265358979323846 / 500.0);
    CHECK(integrate_adaptive(peaked, -4.0, 4.0, 1e-14, 1e-11) ==
          doctest::Approx(want).epsilon(1e-10));
    // integrable endpoint singularity
    CHECK(integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-12, 1e-9) ==
          doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("semi-infinite transform") {
    CHECK(integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0, 1e-14, 1e-12) ==
          doctest::Approx(1.0).epsilon(1e-11));
    CHECK(integrate_to_infinity([](double x) { return std::exp(-x * x); }, 0.0, 1e-14, 1e-12) ==
          doctest::Approx(0.5 * std::sqrt(3.14159265358979323846)).epsilon(1e-11));
}

TEST_CASE("Romberg trapezoid extrapolation") {
    CHECK(romberg([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12) ==
          doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
    CHECK(romberg([](double x) { return std::cos(3.0 * x); }, 0.0, 2.0, 1e-11) ==
          doctest::Approx(std::sin(6.0) / 3.0).epsilon(1e-10));
}
