/*
 * fracspde - numerics for time-fractional stochastic heat equations:
 * Mittag-Leffler evaluation, inverse-stable-subordinator densities, the
 * fractional heat kernel and its exact identities, power-law renewal
 * equations, and Monte Carlo moment/intermittency estimation.
 *
 * C API: opaque handles plus status codes. All functions return
 * FRACSPDE_OK on success; on failure fracspde_last_error() carries a
 * thread-local message.
 */
#ifndef FRACSPDE_H
#define FRACSPDE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fracspde_status {
    FRACSPDE_OK = 0,
    FRACSPDE_ERR_DOMAIN = 1,      /* argument outside the mathematical domain */
    FRACSPDE_ERR_ACCURACY = 2,    /* accuracy goal unreachable */
    FRACSPDE_ERR_UNSUPPORTED = 3, /* parameter combination not supported */
    FRACSPDE_ERR_TRUNCATION = 4,  /* grid/domain truncates too much mass */
    FRACSPDE_ERR_INVALID = 5,     /* malformed call (null pointer, bad size) */
    FRACSPDE_ERR_IO = 6,
    FRACSPDE_ERR_INTERNAL = 7
} fracspde_status;

const char* fracspde_status_name(fracspde_status s);
const char* fracspde_last_error(void);

/* -------- special functions -------- */

/* E_beta(z) for real z, 0 < beta <= 1; target_rel_err in (0, 1e-3]. */
fracspde_status fracspde_mittag_leffler(double beta, double z, double target_rel_err,
                                        double* out);
/* Two-sided bounds on E_beta(-x): 1/(1+Gamma(1-beta)x) and 1/(1+x/Gamma(1+beta)). */
fracspde_status fracspde_ml_bounds(double beta, double x, double* lower, double* upper);
fracspde_status fracspde_gamma(double x, double* out);

/* -------- inverse stable subordinator -------- */

fracspde_status fracspde_stable_density(double beta, double u, double* out);
fracspde_status fracspde_inverse_subordinator_density(double beta, double t, double x,
                                                      double* out);
fracspde_status fracspde_inverse_subordinator_moment(double beta, double s, double k,
                                                     double* out);
fracspde_status fracspde_inverse_subordinator_mgf(double beta, double w, double s, double* out);

/* -------- fractional heat kernel -------- */

typedef struct fracspde_model_params {
    double beta;  /* time-fractional order, (0, 1] */
    double alpha; /* spatial order, (0, 2] */
    double nu;    /* diffusivity, > 0 */
    int d;        /* spatial dimension, >= 1 */
} fracspde_model_params;

fracspde_status fracspde_stable_pdf(const fracspde_model_params* p, double s, const double* x,
                                    size_t dim, double* out);
/* Subordination-quadrature route. */
fracspde_status fracspde_green_kernel(const fracspde_model_params* p, double t, const double* x,
                                      size_t dim, double* out);
/* Independent spectral-inversion route (d = 1). */
fracspde_status fracspde_green_kernel_spectral(const fracspde_model_params* p, double t, double x,
                                               double* out);
fracspde_status fracspde_c_star(const fracspde_model_params* p, double* out);
fracspde_status fracspde_green_l2_norm(const fracspde_model_params* p, double t, double* out);
fracspde_status fracspde_green_exp_moment(const fracspde_model_params* p, const double* lambda,
                                          size_t dim, double s, double* out);
fracspde_status fracspde_green_exp_moment_quadrature(const fracspde_model_params* p,
                                                     double lambda, double s, double* out);
/* Mass outside [-X, X] at time t (alpha = 2, d = 1). */
fracspde_status fracspde_green_tail_mass(const fracspde_model_params* p, double t, double X,
                                         double* out);

typedef struct fracspde_kernel_table fracspde_kernel_table;
fracspde_status fracspde_kernel_table_build(const fracspde_model_params* p, double dt, double dx,
                                            int nt, int nx, fracspde_kernel_table** out);
void fracspde_kernel_table_free(fracspde_kernel_table* t);
fracspde_status fracspde_kernel_table_value(const fracspde_kernel_table* t, int i, int j,
                                            double* out);
fracspde_status fracspde_kernel_table_mass(const fracspde_kernel_table* t, int i, double* out);
fracspde_status fracspde_kernel_table_l2(const fracspde_kernel_table* t, int i, double* out);
/* CSV columns: i,j,t,x,G */
fracspde_status fracspde_kernel_table_write_csv(const fracspde_kernel_table* t, const char* path);

/* -------- renewal equation f = a + f * (b tau^-theta) -------- */

fracspde_status fracspde_tilt_constant(double b, double theta, double* out);

typedef struct fracspde_renewal_solution fracspde_renewal_solution;
/* a_values: forcing samples at t_grid; pass NULL for constant forcing a0. */
fracspde_status fracspde_renewal_solve(double a0, const double* a_values, const double* t_grid,
                                       size_t n, double b, double theta,
                                       fracspde_renewal_solution** out);
void fracspde_renewal_solution_free(fracspde_renewal_solution* s);
fracspde_status fracspde_renewal_solution_values(const fracspde_renewal_solution* s, double* f,
                                                 size_t n);
fracspde_status fracspde_renewal_solution_info(const fracspde_renewal_solution* s, double* c,
                                               double* asymptote, double* drift);
/* CSV columns: t,f,f_tilted */
fracspde_status fracspde_renewal_solution_write_csv(const fracspde_renewal_solution* s,
                                                    const char* path);
fracspde_status fracspde_renewal_asymptote_const(double a0, double b, double theta, double* out);
/* n_iters Picard sweeps from f0; writes the final iterate into f_final and
 * per-sweep sup-norm deltas into deltas (both length n / n_iters). */
fracspde_status fracspde_renewal_picard(double a0, const double* t_grid, size_t n, double b,
                                        double theta, const double* f0, int n_iters,
                                        double* f_final, double* deltas);
/* classification: 1 supersolution, -1 subsolution, 0 solution, 2 neither.
 * Pass NaN as h0 to extrapolate the t = 0 value. */
fracspde_status fracspde_renewal_classify(double a0, const double* t_grid, size_t n, double b,
                                          double theta, const double* h, double h0,
                                          int* classification, int* ordering_ok);

/* -------- Monte Carlo simulation of the mild solution (d = 1, alpha = 2) -------- */

typedef struct fracspde_sim_config {
    fracspde_model_params params;
    double x_min, x_max;
    int nx;
    double t_max;
    int nt;
    int periodic;     /* 0 = zero-padded, 1 = periodic */
    int sigma_linear; /* 1 => sigma(u) = lambda u */
    double lambda;
    double lip_sigma; /* declared constants for the sampled map */
    double l_sigma;
    const double* sigma_z; /* sampled Lipschitz map (ignored when linear) */
    const double* sigma_s;
    size_t sigma_n;
    const double* u0; /* nx cell samples */
    uint64_t seed;
    int replicas;
    int keep_fields; /* retain raw fields (memory permitting) */
    int n_blocks;    /* jackknife blocks; 0 picks the default */
} fracspde_sim_config;

typedef struct fracspde_ensemble fracspde_ensemble;
fracspde_status fracspde_simulate(const fracspde_sim_config* cfg, fracspde_ensemble** out);
void fracspde_ensemble_free(fracspde_ensemble* e);

/* p in {2, 4, 6}; level in [0, nt]; cell in [0, nx). */
fracspde_status fracspde_ensemble_moment(const fracspde_ensemble* e, int p, int level, int cell,
                                         double* estimate, double* stderr_out);
fracspde_status fracspde_ensemble_mean(const fracspde_ensemble* e, int level, int cell,
                                       double* estimate, double* stderr_out);
fracspde_status fracspde_ensemble_field(const fracspde_ensemble* e, int replica, int level,
                                        int cell, double* out);
/* CSV columns: t,x,p,estimate,stderr,replicas,seed */
fracspde_status fracspde_ensemble_write_moments_csv(const fracspde_ensemble* e, const int* orders,
                                                    size_t n_orders, const char* path);
fracspde_status fracspde_second_moment_renewal(const fracspde_model_params* p, double lambda,
                                               double u0_const, const double* t_grid, size_t n,
                                               double* out);
fracspde_status fracspde_lower_bound_rate(const fracspde_model_params* p, double l_sigma,
                                          double* out);
fracspde_status fracspde_lyapunov_fit(const fracspde_ensemble* e, int p, int cell, double t_lo,
                                      double t_hi, double* rate, double* sensitivity);
fracspde_status fracspde_weighted_norm(const fracspde_ensemble* e, double gamma, double c,
                                       double* out);
fracspde_status fracspde_weighted_young_constant(double beta, double nu, double c, double gamma,
                                                 double* out);
fracspde_status fracspde_front_bounds(const fracspde_model_params* p, double lip_sigma,
                                      double* theta_threshold, double* c0);
/* Arrays t, proxy, stderr_out must hold nt entries (levels 1..nt). */
fracspde_status fracspde_front_curve(const fracspde_ensemble* e, double theta, double* t,
                                     double* proxy, double* stderr_out, double* window_avg,
                                     double* window_stderr);
fracspde_status fracspde_front_difference(const fracspde_ensemble* e, double theta_small,
                                          double theta_large, double* diff, double* stderr_out);
/* Pass NaN as a_fit to fit the envelope constant from the t = 0 row. */
fracspde_status fracspde_envelope_check(const fracspde_ensemble* e, double c, double a_fit,
                                        double* a_fit_used, double* growth_rate,
                                        double* admissible_c_min, long* violations,
                                        long* cells_checked);
/* Arrays must hold nt + 1 entries (levels 0..nt). */
fracspde_status fracspde_l2_energy_check(const fracspde_ensemble* e, double epsilon, double* t,
                                         double* energy, double* stderr_out, double* bound,
                                         int* pass);
fracspde_status fracspde_convexity_diagnostic(const double* k, const double* eta,
                                              const double* eta_stderr, size_t n, int* convex_ok,
                                              int* ratio_nondecreasing, int* strict);

#ifdef __cplusplus
}
#endif
#endif /* FRACSPDE_H */
