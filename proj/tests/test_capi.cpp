#include "doctest.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "fracspde/fracspde.h"

// Exercises the shared-library C surface: status codes, last-error text,
// opaque handles, and a round trip through each handle type.

TEST_CASE("status names and error reporting") {
    CHECK(std::string(fracspde_status_name(FRACSPDE_OK)) == "ok");
    CHECK(std::string(fracspde_status_name(FRACSPDE_ERR_DOMAIN)) == "domain");
    double v = 0.0;
    CHECK(fracspde_gamma(-1.0, &v) == FRACSPDE_ERR_DOMAIN);
    CHECK(std::strlen(fracspde_last_error()) > 0);
    CHECK(fracspde_gamma(0.5, nullptr) == FRACSPDE_ERR_INVALID);
}

TEST_CASE("scalar functions through the C surface") {
    double v = 0.0;
    REQUIRE(fracspde_gamma(0.5, &v) == FRACSPDE_OK);
    CHECK(v == doctest::Approx(1.7724538509055160273).epsilon(1e-13));
    REQUIRE(fracspde_mittag_leffler(0.5, -1.0, 1e-10, &v) == FRACSPDE_OK);
    CHECK(v == doctest::Approx(0.42758357615580700441).epsilon(1e-10));
    CHECK(fracspde_mittag_leffler(1.5, 0.0, 1e-10, &v) == FRACSPDE_ERR_DOMAIN);
    CHECK(fracspde_mittag_leffler(0.5, 900.0, 1e-10, &v) == FRACSPDE_ERR_ACCURACY);
    double lo = 0.0, hi = 0.0;
    REQUIRE(fracspde_ml_bounds(0.5, 1.0, &lo, &hi) == FRACSPDE_OK);
    CHECK(lo < hi);
    REQUIRE(fracspde_stable_density(0.5, 1.0, &v) == FRACSPDE_OK);
    CHECK(v == doctest::Approx(0.21969564473386119852).epsilon(1e-9));
    REQUIRE(fracspde_inverse_subordinator_moment(0.5, 4.0, 1.0, &v) == FRACSPDE_OK);
    CHECK(v == doctest::Approx(2.2567583341910251478).epsilon(1e-12));
    REQUIRE(fracspde_tilt_constant(1.0, 0.5, &v) == FRACSPDE_OK);
    CHECK(v == doctest::Approx(3.14159265358979323846).epsilon(1e-13));
    fracspde_model_params p{1.0, 2.0, 1.0, 1};
    REQUIRE(fracspde_c_star(&p, &v) == FRACSPDE_OK);
    CHECK(v == doctest::Approx(0.19947114020071633897).epsilon(1e-8));
    double x0[1] = {0.0};
    REQUIRE(fracspde_green_kernel(&p, 1.0, x0, 1, &v) == FRACSPDE_OK);
    CHECK(v == doctest::Approx(0.28209479177387814347).epsilon(1e-10));
    REQUIRE(fracspde_green_kernel_spectral(&p, 1.0, 0.0, &v) == FRACSPDE_OK);
    CHECK(v == doctest::Approx(0.28209479177387814347).epsilon(1e-8));
}

TEST_CASE("kernel table handle") {
    fracspde_model_params p{1.0, 2.0, 1.0, 1};
    fracspde_kernel_table* t = nullptr;
    REQUIRE(fracspde_kernel_table_build(&p, 0.25, 0.25, 4, 32, &t) == FRACSPDE_OK);
    double v = 0.0, m = 0.0, l2 = 0.0;
    CHECK(fracspde_kernel_table_value(t, 1, 0, &v) == FRACSPDE_OK);
    CHECK(v == doctest::Approx(1.0 / std::sqrt(4.0 * 3.14159265358979323846 * 0.25)));
    CHECK(fracspde_kernel_table_mass(t, 4, &m) == FRACSPDE_OK);
    CHECK(m == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(fracspde_kernel_table_l2(t, 2, &l2) == FRACSPDE_OK);
    CHECK(l2 > 0.0);
    CHECK(fracspde_kernel_table_value(t, 0, 0, &v) == FRACSPDE_ERR_DOMAIN);
    CHECK(fracspde_kernel_table_write_csv(t, "capi_table.csv") == FRACSPDE_OK);
    std::remove("capi_table.csv");
    fracspde_kernel_table_free(t);
}

TEST_CASE("renewal handle, Picard, classification") {
    const size_t n = 256;
    std::vector<double> grid(n);
    for (size_t i = 0; i < n; ++i) grid[i] = 1.5 * (i + 1.0) / n;
    fracspde_renewal_solution* s = nullptr;
    REQUIRE(fracspde_renewal_solve(1.0, nullptr, grid.data(), n, 1.0, 0.5, &s) == FRACSPDE_OK);
    std::vector<double> f(n);
    REQUIRE(fracspde_renewal_solution_values(s, f.data(), n) == FRACSPDE_OK);
    double c = 0.0, asym = 0.0, drift = 0.0;
    REQUIRE(fracspde_renewal_solution_info(s, &c, &asym, &drift) == FRACSPDE_OK);
    CHECK(c == doctest::Approx(3.14159265358979323846).epsilon(1e-13));
    double want = 0.0;
    REQUIRE(fracspde_renewal_asymptote_const(1.0, 1.0, 0.5, &want) == FRACSPDE_OK);
    CHECK(want == doctest::Approx(2.0).epsilon(1e-12));
    fracspde_renewal_solution_free(s);

    std::vector<double> super(n), final(n), deltas(40);
    for (size_t i = 0; i < n; ++i) super[i] = 1.5 * f[i];
    REQUIRE(fracspde_renewal_picard(1.0, grid.data(), n, 1.0, 0.5, super.data(), 40, final.data(),
                                    deltas.data()) == FRACSPDE_OK);
    for (size_t i = 0; i < n; ++i) CHECK(final[i] >= f[i] - 1e-9);
    CHECK(deltas[39] < deltas[0]);
    int cls = 9, ok = 0;
    REQUIRE(fracspde_renewal_classify(1.0, grid.data(), n, 1.0, 0.5, super.data(), 1.5, &cls,
                                      &ok) == FRACSPDE_OK);
    CHECK(cls == 1);
    CHECK(ok == 1);
}

TEST_CASE("simulation handle and estimators") {
    const int nx = 32, nt = 8;
    std::vector<double> u0(nx, 1.0);
    fracspde_sim_config cfg{};
    cfg.params = {1.0, 2.0, 1.0, 1};
    cfg.x_min = -8.0;
    cfg.x_max = 8.0;
    cfg.nx = nx;
    cfg.t_max = 0.5;
    cfg.nt = nt;
    cfg.periodic = 1;
    cfg.sigma_linear = 1;
    cfg.lambda = 0.0;
    cfg.u0 = u0.data();
    cfg.seed = 99;
    cfg.replicas = 4;
    fracspde_ensemble* e = nullptr;
    REQUIRE(fracspde_simulate(&cfg, &e) == FRACSPDE_OK);
    double est = 0.0, se = 0.0;
    REQUIRE(fracspde_ensemble_moment(e, 2, nt, nx / 2, &est, &se) == FRACSPDE_OK);
    CHECK(est == doctest::Approx(1.0));
    CHECK(se == 0.0);
    REQUIRE(fracspde_ensemble_mean(e, 0, 0, &est, &se) == FRACSPDE_OK);
    CHECK(est == doctest::Approx(1.0));
    CHECK(fracspde_ensemble_moment(e, 3, 0, 0, &est, &se) == FRACSPDE_ERR_DOMAIN);
    double rate = 0.0, c0 = 0.0;
    REQUIRE(fracspde_lower_bound_rate(&cfg.params, 1.0, &rate) == FRACSPDE_OK);
    CHECK(rate == doctest::Approx(0.125).epsilon(1e-8));
    REQUIRE(fracspde_front_bounds(&cfg.params, 1.0, &rate, &c0) == FRACSPDE_OK);
    CHECK(rate == doctest::Approx(1.1283791670955125739).epsilon(1e-12));
    int orders[1] = {2};
    REQUIRE(fracspde_ensemble_write_moments_csv(e, orders, 1, "capi_moments.csv") == FRACSPDE_OK);
    std::remove("capi_moments.csv");
    // second-moment oracle through the C surface
    std::vector<double> tg{0.25, 0.5};
    std::vector<double> f2(tg.size());
    REQUIRE(fracspde_second_moment_renewal(&cfg.params, 0.0, 1.0, tg.data(), tg.size(),
                                           f2.data()) == FRACSPDE_OK);
    CHECK(f2[0] == doctest::Approx(1.0));
    fracspde_ensemble_free(e);
    CHECK(fracspde_simulate(nullptr, &e) == FRACSPDE_ERR_INVALID);
}
