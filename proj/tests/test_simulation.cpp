#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <vector>

#include "errors.hpp"
#include "oracles.hpp"
#include "simulation.hpp"

using namespace fracspde;

namespace {

ModelParams heat(double beta) {
    ModelParams p;
    p.beta = beta;
    p.alpha = 2.0;
    p.nu = 1.0;
    p.d = 1;
    return p;
}

SpaceTimeGrid make_grid(double half_width, int nx, double t_max, int nt, BoundaryPolicy b) {
    SpaceTimeGrid g;
    g.x_min = -half_width;
    g.x_max = half_width;
    g.nx = nx;
    g.t_max = t_max;
    g.nt = nt;
    g.boundary = b;
    return g;
}

std::vector<double> constant_field(int nx, double v) { return std::vector<double>(nx, v); }

// bump supported on |x| <= w
std::vector<double> bump_field(const SpaceTimeGrid& g, double w, double height) {
    std::vector<double> u(g.nx, 0.0);
    for (int j = 0; j < g.nx; ++j)
        if (std::abs(g.cell_center(j)) <= w) u[j] = height;
    return u;
}

}  // namespace

TEST_CASE("grid and nonlinearity validation") {
    SpaceTimeGrid g = make_grid(4.0, 8, 1.0, 8, BoundaryPolicy::Periodic);
    CHECK_THROWS_AS(g.validate(), domain_error);  // nx < 16
    g.nx = 16;
    g.nt = 4;
    CHECK_THROWS_AS(g.validate(), domain_error);  // nt < 8
    NonlinearitySpec bad = NonlinearitySpec::linear(1.0);
    bad.l_sigma = 2.0;  // cone above the Lipschitz envelope
    CHECK_THROWS_AS(bad.validate(), domain_error);
    CHECK_THROWS_AS(NonlinearitySpec::sampled({0.0, 1.0}, {0.0, 5.0}, 1.0, 0.0).validate(),
                    domain_error);  // slope 5 > declared Lip 1
    ModelParams p = heat(0.5);
    p.alpha = 1.5;
    CHECK_THROWS_AS(p.require_simulation(), unsupported_error);
}

TEST_CASE("noise-free constant initial data stays exactly one") {
    for (auto bc : {BoundaryPolicy::Periodic, BoundaryPolicy::ZeroPadded}) {
        SpaceTimeGrid g = make_grid(8.0, 32, 0.5, 8, bc);
        SimOptions opts;
        opts.keep_fields = true;
        FieldEnsemble e = simulate(heat(0.5), g, constant_field(32, 1.0),
                                   NonlinearitySpec::linear(0.0), 7, 2, opts);
        bool all_one = true;
        for (int level = 0; level <= g.nt; ++level)
            for (int j = 0; j < g.nx; ++j)
                if (bc == BoundaryPolicy::Periodic) {
                    if (e.field(0, level, j) != 1.0) all_one = false;
                }
        if (bc == BoundaryPolicy::Periodic) CHECK(all_one);
        MomentPoint m = estimate_moment(e, 2, g.nt, g.nx / 2);
        if (bc == BoundaryPolicy::Periodic) {
            CHECK(m.estimate == 1.0);
            CHECK(m.stderr_ == 0.0);
        } else {
            // zero padding leaks a little mass even at the center
            CHECK(m.estimate == doctest::Approx(1.0).epsilon(2e-4));
        }
    }
}

TEST_CASE("noise-free point mass tracks the kernel table") {
    SpaceTimeGrid g = make_grid(8.0, 64, 0.5, 8, BoundaryPolicy::ZeroPadded);
    std::vector<double> u0(64, 0.0);
    const int jc = 32;
    u0[jc] = 1.0 / g.dx();  // discrete delta
    SimOptions opts;
    opts.keep_fields = true;
    FieldEnsemble e = simulate(heat(0.5), g, u0, NonlinearitySpec::linear(0.0), 7, 1, opts);
    ModelParams p = heat(0.5);
    double gmax = green_kernel_alpha2(p, 0.5, 0.0);
    for (int j = 8; j < 56; ++j) {
        double want = green_kernel_alpha2(p, 0.5, (j - jc) * g.dx());
        // within the table's lattice-mass normalization accuracy
        CHECK(std::abs(e.field(0, g.nt, j) - want) <= 1e-2 * gmax);
    }
}

TEST_CASE("deterministic replay: seeds, threads, and time truncation") {
    SpaceTimeGrid g = make_grid(6.0, 32, 0.5, 16, BoundaryPolicy::ZeroPadded);
    SimOptions opts;
    opts.keep_fields = true;
    NonlinearitySpec sig = NonlinearitySpec::linear(1.0);
    ModelParams p = heat(0.75);
    auto u0 = constant_field(32, 1.0);

    setenv("FRACSPDE_THREADS", "1", 1);
    FieldEnsemble a = simulate(p, g, u0, sig, 1234, 6, opts);
    setenv("FRACSPDE_THREADS", "2", 1);
    FieldEnsemble b = simulate(p, g, u0, sig, 1234, 6, opts);
    unsetenv("FRACSPDE_THREADS");
    CHECK(a.fields == b.fields);
    CHECK(a.sum_p2 == b.sum_p2);

    FieldEnsemble c = simulate(p, g, u0, sig, 4321, 6, opts);
    CHECK(a.fields != c.fields);

    // adaptedness: truncating the horizon reproduces the prefix bitwise
    SpaceTimeGrid g_half = make_grid(6.0, 32, 0.25, 8, BoundaryPolicy::ZeroPadded);
    FieldEnsemble h = simulate(p, g_half, u0, sig, 1234, 6, opts);
    bool prefix_ok = true;
    for (int r = 0; r < 6; ++r)
        for (int level = 0; level <= 8; ++level)
            for (int j = 0; j < 32; ++j)
                if (h.field(r, level, j) != a.field(r, level, j)) prefix_ok = false;
    CHECK(prefix_ok);
}

TEST_CASE("replica streams are decorrelated") {
    SpaceTimeGrid g = make_grid(6.0, 16, 0.25, 8, BoundaryPolicy::Periodic);
    SimOptions opts;
    opts.keep_fields = true;
    FieldEnsemble e = simulate(heat(1.0), g, constant_field(16, 1.0),
                               NonlinearitySpec::linear(1.0), 99, 400, opts);
    // pairwise correlation over consecutive replica pairs
    int npairs = 200;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int k = 0; k < npairs; ++k) {
        double x = e.field(2 * k, g.nt, 8), y = e.field(2 * k + 1, g.nt, 8);
        sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
    }
    double n = npairs;
    double rho = (n * sxy - sx * sy) /
                 std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    CHECK(std::abs(rho) < 3.0 / std::sqrt(n));
}

TEST_CASE("ensemble mean stays at one for mean-zero noise") {
    SpaceTimeGrid g = make_grid(8.0, 32, 0.5, 8, BoundaryPolicy::Periodic);
    FieldEnsemble e = simulate(heat(1.0), g, constant_field(32, 1.0),
                               NonlinearitySpec::linear(0.5), 2024, 500);
    MomentPoint m = estimate_mean(e, g.nt, 16);
    CHECK(std::abs(m.estimate - 1.0) <= 3.0 * m.stderr_);
}

TEST_CASE("one-step stochastic-convolution variance matches the cell integral") {
    // sigma = 1 through a sampled map, u0 = 0: the first level is pure noise
    SpaceTimeGrid g = make_grid(4.0, 16, 0.1, 8, BoundaryPolicy::ZeroPadded);
    auto sig = NonlinearitySpec::sampled({-1.0, 1.0}, {1.0, 1.0}, 0.0, 0.0);
    SimOptions opts;
    opts.keep_fields = true;
    ModelParams p = heat(0.5);
    FieldEnsemble e = simulate(p, g, constant_field(16, 0.0), sig, 5150, 2000, opts);
    const double theta = 0.25;  // beta d / alpha
    double target = c_star(p) * std::pow(g.dt(), 1.0 - theta) / (1.0 - theta);
    double s = 0, ss = 0;
    for (int r = 0; r < e.replicas; ++r) {
        double v = e.field(r, 1, 8);
        s += v;
        ss += v * v;
    }
    double var = ss / e.replicas - (s / e.replicas) * (s / e.replicas);
    double se_var = var * std::sqrt(2.0 / (e.replicas - 1.0));
    CHECK(std::abs(var - target) <= 3.0 * se_var);
}

TEST_CASE("simulated second moment matches the renewal oracle") {
    // the module's central test, in a desk-sized configuration
    std::vector<double> times;
    SpaceTimeGrid g = make_grid(8.0, 64, 0.5, 16, BoundaryPolicy::Periodic);
    for (int i = 1; i <= g.nt; ++i) times.push_back(i * g.dt());
    for (double beta : {1.0, 0.5}) {
        ModelParams p = heat(beta);
        FieldEnsemble e = simulate(p, g, constant_field(64, 1.0),
                                   NonlinearitySpec::linear(1.0), 31337, 600);
        std::vector<double> f = second_moment_renewal(p, 1.0, 1.0, times);
        for (int i = 2; i <= g.nt; i += 2) {
            for (int cell : {16, 32, 48}) {
                MomentPoint m = estimate_moment(e, 2, i, cell);
                CHECK(std::abs(m.estimate - f[i - 1]) <= 3.0 * m.stderr_ + 1e-9);
            }
        }
    }
}

TEST_CASE("second moment renewal oracle: edge cases and tilt constant") {
    ModelParams p = heat(1.0);
    std::vector<double> times{0.5, 1.0};
    auto flat = second_moment_renewal(p, 0.0, 2.0, times);
    CHECK(flat[0] == doctest::Approx(4.0));
    CHECK(flat[1] == doctest::Approx(4.0));
    // checked variant rejects unsupported configurations
    CHECK_THROWS_AS(second_moment_renewal(p, NonlinearitySpec::sampled({-1.0, 1.0}, {0.5, 0.5},
                                                                       0.0, 0.0),
                                          constant_field(4, 1.0), times),
                    unsupported_error);
    std::vector<double> ramp{1.0, 2.0, 3.0, 4.0};
    CHECK_THROWS_AS(second_moment_renewal(p, NonlinearitySpec::linear(1.0), ramp, times),
                    unsupported_error);
    // growth rate of the beta = 1 moment equation: c = (C* Gamma(1/2))^2 = 1/8
    std::vector<double> long_times;
    for (int i = 1; i <= 400; ++i) long_times.push_back(0.2 * i);
    auto f = second_moment_renewal(p, 1.0, 1.0, long_times);
    MomentCurve synth;
    synth.p = 2;
    for (std::size_t i = 0; i < long_times.size(); ++i) {
        MomentPoint pt;
        pt.t = long_times[i];
        pt.estimate = f[i];
        synth.points.push_back(pt);
    }
    LyapunovEstimate rate = estimate_lyapunov(synth, 60.0, 80.0);
    CHECK(rate.rate == doctest::Approx(0.125).epsilon(0.02));
}

TEST_CASE("lyapunov estimation edge cases") {
    MomentCurve flat;
    flat.p = 2;
    for (int i = 0; i <= 20; ++i) {
        MomentPoint pt;
        pt.t = 0.1 * i;
        pt.estimate = 3.0;
        flat.points.push_back(pt);
    }
    LyapunovEstimate lz = estimate_lyapunov(flat, 1.0, 2.0);
    CHECK(lz.rate == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(estimate_lyapunov(flat, 1.9, 2.0), domain_error);  // too few points
    flat.points[15].estimate = 0.0;
    CHECK_THROWS_AS(estimate_lyapunov(flat, 1.0, 2.0), accuracy_error);
}

TEST_CASE("closed-form rate and constant operations") {
    CHECK(lower_bound_rate(heat(1.0), 1.0) == doctest::Approx(0.125).epsilon(1e-8));
    CHECK(lower_bound_rate(heat(1.0), 0.0) == 0.0);
    CHECK(weighted_young_constant(1.0, 1.0, 1.0, 2.0) ==
          doctest::Approx(0.75112554446494248286).epsilon(1e-12));
    // c = 0 drops the geometric factor
    for (double beta : {0.5, 1.0}) {
        double lead = std::pow(2.0, 0.5 * beta - 1.0) /
                      (std::tgamma(1.0 - 0.5 * beta) * std::pow(3.0, 1.0 - 0.5 * beta));
        CHECK(weighted_young_constant(beta, 1.0, 0.0, 3.0) ==
              doctest::Approx(std::sqrt(lead)).epsilon(1e-12));
    }
    // at gamma = (2 nu c^2)^{1/beta} the constant collapses to the corollary form
    for (double beta : {0.5, 0.8}) {
        double nu = 1.3, c = 0.9;
        double gamma = std::pow(2.0 * nu * c * c, 1.0 / beta);
        double want = std::sqrt(std::pow(2.0, 0.5 * beta + 0.5 - 1.0 / beta) /
                                (std::pow(nu, 1.0 / beta) * std::tgamma(1.0 - 0.5 * beta) *
                                 std::pow(c, 2.0 / beta - 1.0)));
        CHECK(weighted_young_constant(beta, nu, c, gamma) == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK_THROWS_AS(weighted_young_constant(0.5, 1.0, 2.0, 1.0), domain_error);  // divergent
    FrontBounds fb = front_bounds(heat(1.0), NonlinearitySpec::linear(1.0));
    CHECK(fb.c0 == doctest::Approx(0.75112554446494248286).epsilon(1e-12));
    CHECK(fb.theta_threshold == doctest::Approx(1.1283791670955125739).epsilon(1e-12));
    // threshold scaling in Lip_sigma: factor 2^{(4-2beta)/(2-beta)}
    for (double beta : {0.5, 1.0}) {
        ModelParams p = heat(beta);
        double t1 = front_bounds(p, NonlinearitySpec::linear(1.0)).theta_threshold;
        double t2 = front_bounds(p, NonlinearitySpec::linear(2.0)).theta_threshold;
        CHECK(t2 / t1 ==
              doctest::Approx(std::pow(2.0, (4.0 - 2.0 * beta) / (2.0 - beta))).epsilon(1e-10));
    }
    FrontBounds tiny = front_bounds(heat(0.5), NonlinearitySpec::linear(1e-8));
    CHECK(tiny.theta_threshold < 1e-10);
}

TEST_CASE("weighted norm on the trivial ensemble") {
    SpaceTimeGrid g = make_grid(8.0, 32, 0.5, 8, BoundaryPolicy::Periodic);
    FieldEnsemble e = simulate(heat(1.0), g, constant_field(32, 1.0),
                               NonlinearitySpec::linear(0.0), 7, 4);
    CHECK(weighted_norm(e, 1.0, 0.0) == doctest::Approx(1.0));  // sup at t = 0
    CHECK(weighted_norm(e, 0.5, 0.0) >= weighted_norm(e, 1.5, 0.0));
}

TEST_CASE("front proxy structure for the noise-free decaying field") {
    SpaceTimeGrid g = make_grid(8.0, 64, 1.0, 16, BoundaryPolicy::ZeroPadded);
    auto u0 = bump_field(g, 0.5, 1.0);
    FieldEnsemble e = simulate(heat(0.5), g, u0, NonlinearitySpec::linear(0.0), 11, 2);
    FrontCurve far = estimate_front(e, 4.0);
    for (const auto& pt : far.points)
        if (pt.t >= 0.5) CHECK(pt.proxy < 0.0);
    // non-increasing in theta at fixed t
    FrontCurve near = estimate_front(e, 0.3);
    for (std::size_t i = 0; i < near.points.size(); ++i)
        CHECK(near.points[i].proxy >= far.points[i].proxy - 1e-12);
    // empty region when theta t exceeds the domain
    CHECK_THROWS_AS(estimate_front(e, 20.0), truncation_error);
}

TEST_CASE("envelope check: pass and violation injection") {
    SpaceTimeGrid g = make_grid(8.0, 64, 0.5, 8, BoundaryPolicy::ZeroPadded);
    auto u0 = bump_field(g, 0.5, 1.0);
    FieldEnsemble e = simulate(heat(0.5), g, u0, NonlinearitySpec::linear(0.0), 13, 2);
    EnvelopeReport rep = envelope_check(e, 0.8, std::nan(""));
    CHECK(rep.violations == 0);
    CHECK(rep.fraction_ok == 1.0);
    CHECK(rep.a_fit >= 1.0);
    // halving the fitted constant must expose failing cells
    EnvelopeReport bad = envelope_check(e, 0.8, 0.5 * rep.a_fit);
    CHECK(bad.violations > 0);
    // inadmissible c reports the threshold
    SpaceTimeGrid g2 = make_grid(8.0, 64, 0.5, 8, BoundaryPolicy::ZeroPadded);
    FieldEnsemble e2 = simulate(heat(0.5), g2, u0, NonlinearitySpec::linear(1.0), 13, 4);
    FrontBounds fb = front_bounds(heat(0.5), NonlinearitySpec::linear(1.0));
    double c_min = std::pow(1.0 * fb.c0, 2.0 * 0.5 / 1.5);
    CHECK_THROWS_AS(envelope_check(e2, 0.5 * c_min, std::nan("")), domain_error);
}

TEST_CASE("L2 energy bound") {
    SpaceTimeGrid g = make_grid(8.0, 64, 0.5, 8, BoundaryPolicy::Periodic);
    FieldEnsemble e = simulate(heat(1.0), g, constant_field(64, 1.0),
                               NonlinearitySpec::linear(0.0), 5, 4);
    EnergyReport r0 = l2_energy_check(e, 0.5);
    CHECK(r0.pass);
    for (std::size_t i = 1; i < r0.energy.size(); ++i)
        CHECK(r0.energy[i] <= r0.energy[0] * (1.0 + 1e-9));
    FieldEnsemble e1 = simulate(heat(1.0), g, constant_field(64, 1.0),
                                NonlinearitySpec::linear(1.0), 5, 400);
    EnergyReport r1 = l2_energy_check(e1, 0.5);
    CHECK(r1.rate == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(r1.pass);
    CHECK_THROWS_AS(l2_energy_check(e1, 0.0), domain_error);
}

TEST_CASE("convexity diagnostic on synthetic exponents") {
    std::vector<double> k{2.0, 4.0, 6.0};
    std::vector<double> quad{4.0, 16.0, 36.0};
    std::vector<double> se{1e-3, 1e-3, 1e-3};
    ConvexityReport r = convexity_diagnostic(k, quad, se);
    CHECK(r.convex_ok);
    CHECK(r.ratio_nondecreasing_ok);
    CHECK(r.strict);
    std::vector<double> lin{2.0, 4.0, 6.0};
    ConvexityReport r2 = convexity_diagnostic(k, lin, se);
    CHECK(r2.convex_ok);
    CHECK(r2.ratio_nondecreasing_ok);
    CHECK_FALSE(r2.strict);  // eta(k)/k constant
}

TEST_CASE("triangle inequality for the front region on the lattice") {
    // one-sided half-line form: x - y >= theta(t-s) and y >= theta s force
    // x >= theta t (the two-sided variant with |.| is false)
    bool all_hold = true;
    for (double theta : {0.3, 1.0, 2.4}) {
        for (int ti = 1; ti <= 6; ++ti) {
            for (int si = 0; si <= ti; ++si) {
                for (double x = -4.0; x <= 4.0; x += 0.5) {
                    for (double y = -4.0; y <= 4.0; y += 0.5) {
                        double t = 0.25 * ti, s = 0.25 * si;
                        int lhs = x >= theta * t ? 1 : 0;
                        int rhs = (x - y >= theta * (t - s) ? 1 : 0) * (y >= theta * s ? 1 : 0);
                        if (lhs < rhs) all_hold = false;
                    }
                }
            }
        }
    }
    CHECK(all_hold);
}

TEST_CASE("invalid estimator input") {
    SpaceTimeGrid g = make_grid(8.0, 32, 0.5, 8, BoundaryPolicy::Periodic);
    FieldEnsemble e = simulate(heat(1.0), g, constant_field(32, 1.0),
                               NonlinearitySpec::linear(0.0), 7, 4);
    CHECK_THROWS_AS(estimate_moment(e, 3, 1, 1), domain_error);
    CHECK_THROWS_AS(estimate_moment(e, 2, 9, 1), domain_error);
    CHECK_THROWS_AS(estimate_moment(e, 2, 1, 32), domain_error);
    CHECK_THROWS_AS(estimate_region_moment2(e, 1, 5, 4), domain_error);
    CHECK_THROWS_AS(e.field(0, 0, 0), domain_error);  // fields not kept
}
