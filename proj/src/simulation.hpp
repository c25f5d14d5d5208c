#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "green_kernel.hpp"
#include "renewal.hpp"

namespace fracspde {

enum class BoundaryPolicy { ZeroPadded, Periodic };

struct SpaceTimeGrid {
    double x_min = -8.0, x_max = 8.0;
    int nx = 256;  // spatial cells, >= 16
    double t_max = 1.0;
    int nt = 64;  // time levels, >= 8
    BoundaryPolicy boundary = BoundaryPolicy::ZeroPadded;

    double dx() const { return (x_max - x_min) / nx; }
    double dt() const { return t_max / nt; }
    double cell_center(int j) const { return x_min + (j + 0.5) * dx(); }
    void validate() const;
};

struct NonlinearitySpec {
    enum class Kind { Linear, Sampled };
    Kind kind = Kind::Linear;
    double lambda = 1.0;   // sigma(u) = lambda u for the linear kind
    double lip_sigma = 1.0;
    double l_sigma = 1.0;  // inf_z |sigma(z)/z|
    std::vector<double> sample_z, sample_s;  // sampled Lipschitz map

    static NonlinearitySpec linear(double lambda);
    static NonlinearitySpec sampled(std::vector<double> z, std::vector<double> s,
                                    double lip, double l);
    double operator()(double u) const;
    void validate() const;
    bool vanishes_at_zero() const;
};

// Replica-resolved Monte Carlo ensemble. Moment sums are accumulated in
// replica-index order (scheduling independent); per-block sums of |u|^2
// support jackknife errors for derived statistics. Full fields are kept
// only when requested.
struct FieldEnsemble {
    ModelParams params;
    SpaceTimeGrid grid;
    NonlinearitySpec sigma;
    std::vector<double> u0;
    std::uint64_t seed = 0;
    int replicas = 0;
    int n_blocks = 0;

    // sums over replicas, indexed [level * nx + cell], level = 0..nt
    std::vector<double> sum_u, sum_p2, sum_p4, sum_p6, sum_p8, sum_p12;
    // per-block sums of u^2: [block][level * nx + cell]
    std::vector<double> block_p2;
    // optional raw fields: [replica][level * nx + cell]
    bool has_fields = false;
    std::vector<double> fields;

    std::size_t cells() const { return static_cast<std::size_t>(grid.nt + 1) * grid.nx; }
    double field(int replica, int level, int cell) const;
    int block_of(int replica) const;
};

struct SimOptions {
    bool keep_fields = false;
    int n_blocks = 64;
};

FieldEnsemble simulate(const ModelParams& params, const SpaceTimeGrid& grid,
                       const std::vector<double>& u0, const NonlinearitySpec& sigma,
                       std::uint64_t seed, int replicas, const SimOptions& opts = {});

struct MomentPoint {
    double t = 0.0;
    double x = 0.0;
    int p = 2;
    double estimate = 0.0;
    double stderr_ = 0.0;
    int replicas = 0;
};

struct MomentCurve {
    int p = 2;
    std::vector<MomentPoint> points;
};

// Replica mean of |u|^p at one cell; jackknife standard error. p in {2, 4, 6}.
MomentPoint estimate_moment(const FieldEnsemble& e, int p, int level, int cell);
// Spatial average of |u|^2 over [cell_lo, cell_hi]; block-jackknife error.
MomentPoint estimate_region_moment2(const FieldEnsemble& e, int level, int cell_lo, int cell_hi);
// Full curve at one cell across all time levels.
MomentCurve moment_curve(const FieldEnsemble& e, int p, int cell);

// Exact second moment for sigma(u) = lambda u and constant u0: solution of
// f(t) = u0^2 + C* lambda^2 int_0^t f(s) (t-s)^{-beta d/alpha} ds, solved by
// the renewal module on a refined grid and sampled at t_grid.
std::vector<double> second_moment_renewal(const ModelParams& params, double lambda,
                                          double u0_const, const std::vector<double>& t_grid);
// Checked variant: rejects nonlinear sigma or non-constant u0.
std::vector<double> second_moment_renewal(const ModelParams& params,
                                          const NonlinearitySpec& sigma,
                                          const std::vector<double>& u0,
                                          const std::vector<double>& t_grid);

// Replica mean of u (p = 1) with its standard error.
MomentPoint estimate_mean(const FieldEnsemble& e, int level, int cell);

struct LyapunovEstimate {
    double rate = 0.0;
    double window_sensitivity = 0.0;  // slope change when the window shrinks by half
    int points_used = 0;
};

// Least-squares slope of log(moment) vs t over [t_lo, t_hi].
LyapunovEstimate estimate_lyapunov(const MomentCurve& curve, double t_lo, double t_hi);

// [C* L_sigma^2 Gamma(1 - beta d/alpha)]^{1/(1 - beta d/alpha)}.
double lower_bound_rate(const ModelParams& params, double l_sigma);

// sup over the grid of [e^{-gamma t + c x} * second-moment estimate]^{1/2}.
double weighted_norm(const FieldEnsemble& e, double gamma, double c);

// Stochastic-convolution contraction constant; requires gamma^beta > nu c^2.
double weighted_young_constant(double beta, double nu, double c, double gamma);

struct FrontBounds {
    double theta_threshold = 0.0;  // L(theta) < 0 beyond this
    double c0 = 0.0;               // admissibility constant
};

FrontBounds front_bounds(const ModelParams& params, const NonlinearitySpec& sigma);

struct FrontPoint {
    double t = 0.0;
    double proxy = 0.0;   // (1/t) log sup_{|x| > theta t} E|u|^2
    double stderr_ = 0.0;  // block jackknife
};

struct FrontCurve {
    double theta = 0.0;
    std::vector<FrontPoint> points;
    double window_average = 0.0;  // over the final half of the reported times
    double window_stderr = 0.0;
};

FrontCurve estimate_front(const FieldEnsemble& e, double theta);
// Jackknife mean/SE of the difference of window-averaged proxies at two
// thresholds (same replicas, correlated).
void front_proxy_difference(const FieldEnsemble& e, double theta_small, double theta_large,
                            double* diff, double* diff_stderr);

struct EnvelopeReport {
    double c = 0.0;
    double a_fit = 0.0;
    double growth_rate = 0.0;  // (2 nu c^2)^{1/beta}
    double admissible_c_min = 0.0;
    long violations = 0;       // cells with (estimate - 3 SE) above the envelope
    long cells_checked = 0;
    double fraction_ok = 1.0;
};

// Checks E|u_t(x)|^2 <= A_fit exp(-c|x| + (2 nu c^2)^{1/beta} t); A_fit is
// the smallest constant that bounds the t = 0 row unless supplied (pass a
// non-finite a_fit to auto-fit).
EnvelopeReport envelope_check(const FieldEnsemble& e, double c, double a_fit);

struct EnergyReport {
    std::vector<double> t, energy, energy_stderr, bound;
    double rate = 0.0;
    bool pass = true;  // bound holds at all levels within 3 SE
};

EnergyReport l2_energy_check(const FieldEnsemble& e, double epsilon);

struct ConvexityReport {
    std::vector<double> k, eta, eta_stderr;
    bool convex_ok = true;
    bool ratio_nondecreasing_ok = true;
    bool strict = true;
};

// Diagnostic on eta(k) estimates for k in {2, 4, 6}: convexity in k and
// monotonicity of eta(k)/k, judged within the supplied uncertainties.
ConvexityReport convexity_diagnostic(const std::vector<double>& k, const std::vector<double>& eta,
                                     const std::vector<double>& eta_stderr);

void write_moments_csv(const FieldEnsemble& e, const std::vector<int>& orders,
                       const std::string& path);

}  // namespace fracspde
