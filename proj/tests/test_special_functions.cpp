#include "doctest.h"

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "oracles.hpp"
#include "special_functions.hpp"

using namespace fracspde;

namespace {
MLParams ml_params(double beta, double tol = 1e-10) {
    MLParams p;
    p.beta = beta;
    p.target_rel_err = tol;
    return p;
}
}  // namespace

TEST_CASE("gamma_fn known values") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gamma_fn(0.5) == doctest::Approx(1.7724538509055160273).epsilon(1e-13));
    CHECK(gamma_fn(1.5) == doctest::Approx(0.88622692545275801365).epsilon(1e-13));
    CHECK(gamma_fn(12.0) == doctest::Approx(39916800.0).epsilon(1e-12));
    CHECK_THROWS_AS(gamma_fn(0.0), domain_error);
    CHECK_THROWS_AS(gamma_fn(-2.5), domain_error);
}

TEST_CASE("reciprocal gamma vanishes at poles and matches gamma elsewhere") {
    CHECK(reciprocal_gamma(0.0) == 0.0);
    CHECK(reciprocal_gamma(-1.0) == 0.0);
    CHECK(reciprocal_gamma(-7.0) == 0.0);
    for (double x : {0.3, 1.7, 5.5, -0.5, -1.25, -6.75}) {
        double expected = 1.0 / std::tgamma(x);
        CHECK(reciprocal_gamma(x) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("E_beta(0) = 1 for all beta") {
    for (double beta = 0.1; beta <= 1.0; beta += 0.1)
        CHECK(mittag_leffler(ml_params(beta), 0.0) == 1.0);
}

TEST_CASE("beta = 1 is the exponential") {
    CHECK(mittag_leffler(ml_params(1.0), 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    for (double z = -20.0; z <= 20.0; z += 2.5)
        CHECK(mittag_leffler(ml_params(1.0), z) ==
              doctest::Approx(std::exp(z)).epsilon(1e-10));
}

TEST_CASE("E_{1/2} against the erfcx identity across all evaluation regimes") {
    // covers the series region, the integral band, the asymptotic range,
    // and stability down to z = -1e6
    CHECK(mittag_leffler(ml_params(0.5), -1.0) ==
          doctest::Approx(0.42758357615580700441).epsilon(1e-10));
    for (double x = 1e-3; x <= 1.1e6; x *= 2.7) {
        double got = mittag_leffler(ml_params(0.5), -x);
        double want = oracle::ml_half_neg(x);
        CHECK(got == doctest::Approx(want).epsilon(2e-10));
    }
}

TEST_CASE("positive arguments against series and erf identity") {
    CHECK(mittag_leffler(ml_params(0.5), 1.0) ==
          doctest::Approx(5.0089800807622834663).epsilon(1e-11));
    for (double z : {0.25, 1.0, 3.0, 7.5}) {
        double got = mittag_leffler(ml_params(0.5), z);
        CHECK(got == doctest::Approx(oracle::ml_half_pos(z)).epsilon(1e-10));
    }
    for (double beta : {0.3, 0.8}) {
        for (double z : {0.2, 1.4, 4.0}) {
            double want = static_cast<double>(oracle::ml_series_ref(beta, z));
            CHECK(mittag_leffler(ml_params(beta), z) == doctest::Approx(want).epsilon(1e-11));
        }
    }
}

TEST_CASE("reference points away from beta = 1/2") {
    // frozen with a 30-digit series evaluation
    CHECK(mittag_leffler(ml_params(0.3), -2.2) ==
          doctest::Approx(0.27029794794709049394).epsilon(1e-10));
    CHECK(mittag_leffler(ml_params(0.7), -8.0) ==
          doctest::Approx(0.046069992385362385726).epsilon(1e-10));
    CHECK(mittag_leffler(ml_params(0.9), -16.0) ==
          doctest::Approx(0.0073691725711018619316).epsilon(1e-10));
    CHECK(mittag_leffler(ml_params(0.9), -25.0) ==
          doctest::Approx(0.0045121471218401887483).epsilon(1e-10));
    CHECK(mittag_leffler(ml_params(0.2), -1.35) ==
          doctest::Approx(0.39630171776315940964).epsilon(1e-10));
    CHECK(mittag_leffler(ml_params(0.1), -1.32) ==
          doctest::Approx(0.41665090282344045210).epsilon(1e-10));
    CHECK(mittag_leffler(ml_params(0.5), -4.5) ==
          doctest::Approx(0.12248480427384141755).epsilon(1e-10));
}

TEST_CASE("internal routes agree in their overlap windows") {
    for (double beta : {0.25, 0.5, 0.75, 0.9}) {
        double x_mid = std::pow(20.0, beta);  // inside the integral band
        double ach_s = 0.0, ach_i = 0.0;
        double s = detail::ml_series(beta, -x_mid * 0.55, &ach_s);
        double ii = detail::ml_integral_neg(beta, x_mid * 0.55, &ach_i);
        CHECK(s == doctest::Approx(ii).epsilon(1e-9));
        double x_hi = std::pow(40.0, beta);
        double a = detail::ml_asymptotic_neg(beta, x_hi, &ach_s);
        double i2 = detail::ml_integral_neg(beta, x_hi, &ach_i);
        CHECK(a == doctest::Approx(i2).epsilon(1e-9));
    }
}

TEST_CASE("uniform two-sided bounds hold on the full grid") {
    // 9 x 40 grid; zero violations allowed
    for (int bi = 1; bi <= 9; ++bi) {
        double beta = 0.1 * bi;
        for (int xi = 0; xi < 40; ++xi) {
            double x = 1e-3 * std::pow(1e6, xi / 39.0);
            auto [lo, hi] = ml_bounds(beta, x);
            double e = mittag_leffler(ml_params(beta), -x);
            CHECK(lo <= hi);
            CHECK(e >= lo * (1.0 - 1e-12));
            CHECK(e <= hi * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("ml_bounds values and limits") {
    auto [lo, hi] = ml_bounds(0.5, 1.0);
    CHECK(lo == doctest::Approx(0.36069130588896483944).epsilon(1e-12));
    CHECK(hi == doctest::Approx(0.46984109573138114992).epsilon(1e-12));
    auto [lo0, hi0] = ml_bounds(0.5, 1e-12);
    CHECK(lo0 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(hi0 == doctest::Approx(1.0).epsilon(1e-9));
    // sandwich around a mid-range point
    auto [l3, h3] = ml_bounds(0.3, 10.0);
    double e3 = mittag_leffler(ml_params(0.3), -10.0);
    CHECK(l3 < e3);
    CHECK(e3 < h3);
    CHECK_THROWS_AS(ml_bounds(0.5, 0.0), domain_error);
    CHECK_THROWS_AS(ml_bounds(0.5, -1.0), domain_error);
    CHECK_THROWS_AS(ml_bounds(1.0, 1.0), domain_error);
}

TEST_CASE("monotone decay on the negative axis") {
    for (double beta : {0.2, 0.5, 0.8}) {
        double prev = 1.0;
        for (double x = 0.05; x < 2e3; x *= 1.7) {
            double v = mittag_leffler(ml_params(beta), -x);
            CHECK(v < prev);
            CHECK(v > 0.0);
            prev = v;
        }
    }
}

TEST_CASE("error paths") {
    CHECK_THROWS_AS(mittag_leffler(ml_params(0.5), std::nan("")), domain_error);
    CHECK_THROWS_AS(mittag_leffler(ml_params(0.5),
                                   std::numeric_limits<double>::infinity()),
                    domain_error);
    CHECK_THROWS_AS(mittag_leffler(ml_params(1.5), 1.0), domain_error);
    CHECK_THROWS_AS(mittag_leffler(ml_params(0.5, 1e-2), 1.0), domain_error);  // target too loose
    // overflow surfaces as an accuracy error carrying the best estimate
    CHECK_THROWS_AS(mittag_leffler(ml_params(0.5), 900.0), accuracy_error);
    CHECK_THROWS_AS(mittag_leffler(ml_params(1.0), 800.0), accuracy_error);
    try {
        mittag_leffler(ml_params(0.5), 900.0);
    } catch (const accuracy_error& e) {
        CHECK(std::isinf(e.best));
    }
}
