#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fracspde {

struct ModelParams {
    double beta = 0.5;  // time-fractional order, (0, 1]
    double alpha = 2.0; // spatial order, (0, 2]
    double nu = 1.0;    // diffusivity, length^alpha / time^beta
    int d = 1;          // spatial dimension

    void validate() const;
    // Hypothesis of the L2 identity: d < 2 alpha.
    void require_l2() const;
    // Existence condition consumed by the simulator: d < min{2, 1/beta} alpha,
    // plus the simulation scope d = 1, alpha = 2.
    void require_simulation() const;
};

// Density of the isotropic alpha-stable process X(s), Fourier transform
// exp(-s nu |xi|^alpha). Closed forms for alpha = 2 and alpha = 1; numeric
// Fourier inversion for other alpha (d = 1 only).
double stable_pdf_radial(const ModelParams& p, double s, double r);
double stable_pdf(const ModelParams& p, double s, std::span<const double> x);

// Fundamental solution G_t(x) by subordination quadrature
// G_t(x) = int_0^inf p_X(s)(x) f_{E_t}(s) ds (beta = 1 collapses to p_X(t)).
double green_kernel_radial(const ModelParams& p, double t, double r);
double green_kernel(const ModelParams& p, double t, std::span<const double> x);

// Independent spectral route (d = 1): cosine-transform inversion of
// E_beta(-nu |xi|^alpha t^beta) with an asymptotic tail beyond the cutoff.
double green_kernel_spectral(const ModelParams& p, double t, double x);

// Fast exact evaluator for alpha = 2, d = 1 via the Wright-function form
// G_t(x) = (2 sqrt(nu))^-1 t^{-beta/2} M_{beta/2}(|x| / (sqrt(nu) t^{beta/2})).
double green_kernel_alpha2(const ModelParams& p, double t, double x);

// C* of the L2 identity int G_t^2 dx = C* t^{-beta d / alpha}.
double c_star(const ModelParams& p);
// The z-integral inside C* and its Beta-function cap
// B(d/alpha, 2 - d/alpha) * Gamma(1+beta)^{d/alpha}.
double c_star_z_integral(const ModelParams& p);
double c_star_z_integral_bound(const ModelParams& p);

// int G_t(x)^2 dx by direct spatial quadrature (independent of c_star).
double green_l2_norm(const ModelParams& p, double t);

// Mass outside [-X, X] at time t (alpha = 2, d = 1): the subordinated
// Gaussian tail 2 * int_X^inf G_t dx.
double green_tail_mass(const ModelParams& p, double t, double X);

// Exponential moment (alpha = 2 only): int e^{lambda.x} G_s(x) dx equals
// E_beta(nu |lambda|^2 s^beta). The operation returns the Mittag-Leffler
// value; the quadrature companion evaluates the integral directly (d = 1).
double green_exp_moment(const ModelParams& p, std::span<const double> lambda, double s);
double green_exp_moment_quadrature(const ModelParams& p, double lambda, double s);

// Precomputed kernel values on a uniform space-time lattice; immutable
// after construction and safe to share across threads.
class KernelTable {
public:
    KernelTable(const ModelParams& p, double dt, double dx, int nt, int nx);

    const ModelParams& params() const { return params_; }
    double dt() const { return dt_; }
    double dx() const { return dx_; }
    int nt() const { return nt_; }
    int nx() const { return nx_; }

    // G_{i dt}(j dx) for 1 <= i <= nt, |j| <= nx.
    double value(int i, int j) const;
    // Quadrature mass int G_{i dt} dx and energy int G_{i dt}^2 dx, with
    // analytic tail corrections beyond the table boundary.
    double mass(int i) const;
    double l2(int i) const;
    // Estimated mass outside [-X, X], X = nx dx, at time level i.
    double tail_mass(int i) const;

    void write_csv(const std::string& path) const;

private:
    ModelParams params_;
    double dt_, dx_;
    int nt_, nx_;
    std::vector<double> values_;  // (nt) x (nx+1), offsets j = 0..nx
    std::vector<double> mass_row_, l2_row_, tail_row_;
};

KernelTable build_kernel_table(const ModelParams& p, double dt, double dx, int nt, int nx);

}  // namespace fracspde
