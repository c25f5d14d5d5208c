#include "fracspde/fracspde.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "errors.hpp"
#include "green_kernel.hpp"
#include "renewal.hpp"
#include "simulation.hpp"
#include "special_functions.hpp"
#include "subordinator.hpp"

namespace {

thread_local std::string g_last_error;

fracspde_status fail(fracspde_status s, const char* msg) {
    g_last_error = msg ? msg : "";
    return s;
}

// Runs fn, translating the library's exception taxonomy to status codes.
template <typename Fn>
fracspde_status guarded(Fn&& fn) {
    try {
        fn();
        return FRACSPDE_OK;
    } catch (const fracspde::domain_error& e) {
        return fail(FRACSPDE_ERR_DOMAIN, e.what());
    } catch (const fracspde::accuracy_error& e) {
        return fail(FRACSPDE_ERR_ACCURACY, e.what());
    } catch (const fracspde::unsupported_error& e) {
        return fail(FRACSPDE_ERR_UNSUPPORTED, e.what());
    } catch (const fracspde::truncation_error& e) {
        return fail(FRACSPDE_ERR_TRUNCATION, e.what());
    } catch (const std::exception& e) {
        return fail(FRACSPDE_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(FRACSPDE_ERR_INTERNAL, "unknown error");
    }
}

fracspde::ModelParams to_params(const fracspde_model_params* p) {
    fracspde::ModelParams mp;
    mp.beta = p->beta;
    mp.alpha = p->alpha;
    mp.nu = p->nu;
    mp.d = p->d;
    return mp;
}

}  // namespace

struct fracspde_kernel_table {
    fracspde::KernelTable table;
};

struct fracspde_renewal_solution {
    fracspde::RenewalSolution sol;
};

struct fracspde_ensemble {
    fracspde::FieldEnsemble e;
};

extern "C" {

const char* fracspde_status_name(fracspde_status s) {
    switch (s) {
        case FRACSPDE_OK: return "ok";
        case FRACSPDE_ERR_DOMAIN: return "domain";
        case FRACSPDE_ERR_ACCURACY: return "accuracy";
        case FRACSPDE_ERR_UNSUPPORTED: return "unsupported";
        case FRACSPDE_ERR_TRUNCATION: return "truncation";
        case FRACSPDE_ERR_INVALID: return "invalid";
        case FRACSPDE_ERR_IO: return "io";
        case FRACSPDE_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* fracspde_last_error(void) { return g_last_error.c_str(); }

fracspde_status fracspde_mittag_leffler(double beta, double z, double target_rel_err,
                                        double* out) {
    if (!out) return fail(FRACSPDE_ERR_INVALID, "null output pointer");
    return guarded([&] {
        fracspde::MLParams p{beta, target_rel_err};
        *out = fracspde::mittag_leffler(p, z);
    });
}

fracspde_status fracspde_ml_bounds(double beta, double x, double* lower, double* upper) {
    if (!lower || !upper) return fail(FRACSPDE_ERR_INVALID, "null output pointer");
    return guarded([&] {
        auto [lo, up] = fracspde::ml_bounds(beta, x);
        *lower = lo;
        *upper = up;
    });
}

fracspde_status fracspde_gamma(double x, double* out) {
    if (!out) return fail(FRACSPDE_ERR_INVALID, "null output pointer");
    return guarded([&] { *out = fracspde::gamma_fn(x); });
}

fracspde_status fracspde_stable_density(double beta, double u, double* out) {
    if (!out) return fail(FRACSPDE_ERR_INVALID, "null output pointer");
    return guarded([&] {
        fracspde::SubordinatorParams p;
        p.beta = beta;
        *out = fracspde::stable_density(p, u);
    });
}

fracspde_status fracspde_inverse_subordinator_density(double beta, double t, double x,
                                                      double* out) {
    if (!out) return fail(FRACSPDE_ERR_INVALID, "null output pointer");
    return guarded([&] {
        fracspde::SubordinatorParams p;
        p.beta = beta;
        *out = fracspde::inverse_subordinator_density(p, t, x);
    });
}

fracspde_status fracspde_inverse_subordinator_moment(double beta, double s, double k,
                                                     double* out) {
    if (!out) return fail(FRACSPDE_ERR_INVALID, "null output pointer");
    return guarded([&] {
        fracspde::SubordinatorParams p;
        p.beta = beta;
        *out = fracspde::inverse_subordinator_moment(p, s, k);
    });
}

fracspde_status fracspde_inverse_subordinator_mgf(double beta, double w, double s, double* out) {
    if (!out) return fail(FRACSPDE_ERR_INVALID, "null output pointer");
    return guarded([&] {
        fracspde::SubordinatorParams p;
        p.beta = beta;
        *out = fracspde::inverse_subordinator_mgf(p, w, s);
    });
}

fracspde_status fracspde_stable_pdf(const fracspde_model_params* p, double s, const double* x,
                                    size_t dim, double* out) {
    if (!p || !x || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        *out = fracspde::stable_pdf(to_params(p), s, std::span<const double>(x, dim));
    });
}

fracspde_status fracspde_green_kernel(const fracspde_model_params* p, double t, const double* x,
                                      size_t dim, double* out) {
    if (!p || !x || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        *out = fracspde::green_kernel(to_params(p), t, std::span<const double>(x, dim));
    });
}

fracspde_status fracspde_green_kernel_spectral(const fracspde_model_params* p, double t, double x,
                                               double* out) {
    if (!p || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { *out = fracspde::green_kernel_spectral(to_params(p), t, x); });
}

fracspde_status fracspde_c_star(const fracspde_model_params* p, double* out) {
    if (!p || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { *out = fracspde::c_star(to_params(p)); });
}

fracspde_status fracspde_green_l2_norm(const fracspde_model_params* p, double t, double* out) {
    if (!p || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { *out = fracspde::green_l2_norm(to_params(p), t); });
}

fracspde_status fracspde_green_exp_moment(const fracspde_model_params* p, const double* lambda,
                                          size_t dim, double s, double* out) {
    if (!p || !lambda || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        *out = fracspde::green_exp_moment(to_params(p), std::span<const double>(lambda, dim), s);
    });
}

fracspde_status fracspde_green_exp_moment_quadrature(const fracspde_model_params* p,
                                                     double lambda, double s, double* out) {
    if (!p || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { *out = fracspde::green_exp_moment_quadrature(to_params(p), lambda, s); });
}

fracspde_status fracspde_green_tail_mass(const fracspde_model_params* p, double t, double X,
                                         double* out) {
    if (!p || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { *out = fracspde::green_tail_mass(to_params(p), t, X); });
}

fracspde_status fracspde_kernel_table_build(const fracspde_model_params* p, double dt, double dx,
                                            int nt, int nx, fracspde_kernel_table** out) {
    if (!p || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        *out = new fracspde_kernel_table{fracspde::KernelTable(to_params(p), dt, dx, nt, nx)};
    });
}

void fracspde_kernel_table_free(fracspde_kernel_table* t) { delete t; }

fracspde_status fracspde_kernel_table_value(const fracspde_kernel_table* t, int i, int j,
                                            double* out) {
    if (!t || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { *out = t->table.value(i, j); });
}

fracspde_status fracspde_kernel_table_mass(const fracspde_kernel_table* t, int i, double* out) {
    if (!t || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { *out = t->table.mass(i); });
}

fracspde_status fracspde_kernel_table_l2(const fracspde_kernel_table* t, int i, double* out) {
    if (!t || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { *out = t->table.l2(i); });
}

fracspde_status fracspde_kernel_table_write_csv(const fracspde_kernel_table* t,
                                                const char* path) {
    if (!t || !path) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    fracspde_status s = guarded([&] { t->table.write_csv(path); });
    return s == FRACSPDE_ERR_INTERNAL ? fail(FRACSPDE_ERR_IO, g_last_error.c_str()) : s;
}

fracspde_status fracspde_tilt_constant(double b, double theta, double* out) {
    if (!out) return fail(FRACSPDE_ERR_INVALID, "null output pointer");
    return guarded([&] { *out = fracspde::tilt_constant(b, theta); });
}

namespace {

fracspde::RenewalProblem make_problem(double a0, const double* a_values, const double* t_grid,
                                      size_t n, double b, double theta) {
    fracspde::RenewalProblem rp;
    rp.b = b;
    rp.theta = theta;
    rp.t_grid.assign(t_grid, t_grid + n);
    if (a_values) {
        std::vector<double> t(rp.t_grid);
        std::vector<double> v(a_values, a_values + n);
        t.insert(t.begin(), 0.0);
        v.insert(v.begin(), a0);
        rp.a = fracspde::Forcing::samples(std::move(t), std::move(v));
    } else {
        rp.a = fracspde::Forcing::constant(a0);
    }
    return rp;
}

}  // namespace

fracspde_status fracspde_renewal_solve(double a0, const double* a_values, const double* t_grid,
                                       size_t n, double b, double theta,
                                       fracspde_renewal_solution** out) {
    if (!t_grid || !out || n == 0) return fail(FRACSPDE_ERR_INVALID, "bad renewal arguments");
    return guarded([&] {
        auto rp = make_problem(a0, a_values, t_grid, n, b, theta);
        *out = new fracspde_renewal_solution{fracspde::solve_renewal(rp)};
    });
}

void fracspde_renewal_solution_free(fracspde_renewal_solution* s) { delete s; }

fracspde_status fracspde_renewal_solution_values(const fracspde_renewal_solution* s, double* f,
                                                 size_t n) {
    if (!s || !f) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    if (n != s->sol.f.size()) return fail(FRACSPDE_ERR_INVALID, "size mismatch");
    std::memcpy(f, s->sol.f.data(), n * sizeof(double));
    return FRACSPDE_OK;
}

fracspde_status fracspde_renewal_solution_info(const fracspde_renewal_solution* s, double* c,
                                               double* asymptote, double* drift) {
    if (!s) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    if (c) *c = s->sol.c;
    if (asymptote) *asymptote = s->sol.asymptote;
    if (drift) *drift = s->sol.asymptote_drift;
    return FRACSPDE_OK;
}

fracspde_status fracspde_renewal_solution_write_csv(const fracspde_renewal_solution* s,
                                                    const char* path) {
    if (!s || !path) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    fracspde_status st = guarded([&] { fracspde::write_renewal_csv(s->sol, path); });
    return st == FRACSPDE_ERR_INTERNAL ? fail(FRACSPDE_ERR_IO, g_last_error.c_str()) : st;
}

fracspde_status fracspde_renewal_asymptote_const(double a0, double b, double theta, double* out) {
    if (!out) return fail(FRACSPDE_ERR_INVALID, "null output pointer");
    return guarded([&] {
        fracspde::RenewalProblem rp;
        rp.a = fracspde::Forcing::constant(a0);
        rp.b = b;
        rp.theta = theta;
        rp.t_grid = {1.0};
        *out = fracspde::renewal_asymptote(rp);
    });
}

fracspde_status fracspde_renewal_picard(double a0, const double* t_grid, size_t n, double b,
                                        double theta, const double* f0, int n_iters,
                                        double* f_final, double* deltas) {
    if (!t_grid || !f0 || !f_final || n == 0)
        return fail(FRACSPDE_ERR_INVALID, "bad picard arguments");
    return guarded([&] {
        auto rp = make_problem(a0, nullptr, t_grid, n, b, theta);
        std::vector<double> start(f0, f0 + n);
        auto iters = fracspde::picard_iterate(start, rp, n_iters);
        const auto& last = iters.back();
        std::memcpy(f_final, last.data(), n * sizeof(double));
        if (deltas) {
            for (int k = 0; k < n_iters; ++k) {
                double d = 0.0;
                for (size_t i = 0; i < n; ++i)
                    d = std::max(d, std::abs(iters[k + 1][i] - iters[k][i]));
                deltas[k] = d;
            }
        }
    });
}

fracspde_status fracspde_renewal_classify(double a0, const double* t_grid, size_t n, double b,
                                          double theta, const double* h, double h0,
                                          int* classification, int* ordering_ok) {
    if (!t_grid || !h || !classification || !ordering_ok || n == 0)
        return fail(FRACSPDE_ERR_INVALID, "bad classify arguments");
    return guarded([&] {
        auto rp = make_problem(a0, nullptr, t_grid, n, b, theta);
        std::vector<double> hv(h, h + n);
        fracspde::OrderingReport rep = fracspde::check_supersolution(hv, rp, h0);
        switch (rep.classification) {
            case fracspde::RenewalOrdering::Supersolution: *classification = 1; break;
            case fracspde::RenewalOrdering::Subsolution: *classification = -1; break;
            case fracspde::RenewalOrdering::Solution: *classification = 0; break;
            case fracspde::RenewalOrdering::Neither: *classification = 2; break;
        }
        *ordering_ok = rep.ordering_vs_solution_ok ? 1 : 0;
    });
}

namespace {

fracspde_status build_ensemble(const fracspde_sim_config* cfg, fracspde_ensemble** out) {
    fracspde::ModelParams params = to_params(&cfg->params);
    fracspde::SpaceTimeGrid grid;
    grid.x_min = cfg->x_min;
    grid.x_max = cfg->x_max;
    grid.nx = cfg->nx;
    grid.t_max = cfg->t_max;
    grid.nt = cfg->nt;
    grid.boundary =
        cfg->periodic ? fracspde::BoundaryPolicy::Periodic : fracspde::BoundaryPolicy::ZeroPadded;
    fracspde::NonlinearitySpec sigma;
    if (cfg->sigma_linear) {
        sigma = fracspde::NonlinearitySpec::linear(cfg->lambda);
    } else {
        if (!cfg->sigma_z || !cfg->sigma_s || cfg->sigma_n < 2)
            throw fracspde::domain_error("sim config: sampled sigma needs >= 2 points");
        sigma = fracspde::NonlinearitySpec::sampled(
            std::vector<double>(cfg->sigma_z, cfg->sigma_z + cfg->sigma_n),
            std::vector<double>(cfg->sigma_s, cfg->sigma_s + cfg->sigma_n), cfg->lip_sigma,
            cfg->l_sigma);
    }
    if (!cfg->u0) throw fracspde::domain_error("sim config: u0 is required");
    std::vector<double> u0(cfg->u0, cfg->u0 + cfg->nx);
    fracspde::SimOptions opts;
    opts.keep_fields = cfg->keep_fields != 0;
    if (cfg->n_blocks > 0) opts.n_blocks = cfg->n_blocks;
    *out = new fracspde_ensemble{
        fracspde::simulate(params, grid, u0, sigma, cfg->seed, cfg->replicas, opts)};
    return FRACSPDE_OK;
}

}  // namespace

fracspde_status fracspde_simulate(const fracspde_sim_config* cfg, fracspde_ensemble** out) {
    if (!cfg || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { build_ensemble(cfg, out); });
}

void fracspde_ensemble_free(fracspde_ensemble* e) { delete e; }

fracspde_status fracspde_ensemble_moment(const fracspde_ensemble* e, int p, int level, int cell,
                                         double* estimate, double* stderr_out) {
    if (!e || !estimate) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        fracspde::MomentPoint m = fracspde::estimate_moment(e->e, p, level, cell);
        *estimate = m.estimate;
        if (stderr_out) *stderr_out = m.stderr_;
    });
}

fracspde_status fracspde_ensemble_mean(const fracspde_ensemble* e, int level, int cell,
                                       double* estimate, double* stderr_out) {
    if (!e || !estimate) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        fracspde::MomentPoint m = fracspde::estimate_mean(e->e, level, cell);
        *estimate = m.estimate;
        if (stderr_out) *stderr_out = m.stderr_;
    });
}

fracspde_status fracspde_ensemble_field(const fracspde_ensemble* e, int replica, int level,
                                        int cell, double* out) {
    if (!e || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { *out = e->e.field(replica, level, cell); });
}

fracspde_status fracspde_ensemble_write_moments_csv(const fracspde_ensemble* e, const int* orders,
                                                    size_t n_orders, const char* path) {
    if (!e || !orders || !path) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    fracspde_status s = guarded([&] {
        fracspde::write_moments_csv(e->e, std::vector<int>(orders, orders + n_orders), path);
    });
    return s == FRACSPDE_ERR_INTERNAL ? fail(FRACSPDE_ERR_IO, g_last_error.c_str()) : s;
}

fracspde_status fracspde_second_moment_renewal(const fracspde_model_params* p, double lambda,
                                               double u0_const, const double* t_grid, size_t n,
                                               double* out) {
    if (!p || !t_grid || !out || n == 0) return fail(FRACSPDE_ERR_INVALID, "bad arguments");
    return guarded([&] {
        std::vector<double> grid(t_grid, t_grid + n);
        auto f = fracspde::second_moment_renewal(to_params(p), lambda, u0_const, grid);
        std::memcpy(out, f.data(), n * sizeof(double));
    });
}

fracspde_status fracspde_lower_bound_rate(const fracspde_model_params* p, double l_sigma,
                                          double* out) {
    if (!p || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { *out = fracspde::lower_bound_rate(to_params(p), l_sigma); });
}

fracspde_status fracspde_lyapunov_fit(const fracspde_ensemble* e, int p, int cell, double t_lo,
                                      double t_hi, double* rate, double* sensitivity) {
    if (!e || !rate) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        fracspde::MomentCurve curve = fracspde::moment_curve(e->e, p, cell);
        fracspde::LyapunovEstimate est = fracspde::estimate_lyapunov(curve, t_lo, t_hi);
        *rate = est.rate;
        if (sensitivity) *sensitivity = est.window_sensitivity;
    });
}

fracspde_status fracspde_weighted_norm(const fracspde_ensemble* e, double gamma, double c,
                                       double* out) {
    if (!e || !out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] { *out = fracspde::weighted_norm(e->e, gamma, c); });
}

fracspde_status fracspde_weighted_young_constant(double beta, double nu, double c, double gamma,
                                                 double* out) {
    if (!out) return fail(FRACSPDE_ERR_INVALID, "null output pointer");
    return guarded([&] { *out = fracspde::weighted_young_constant(beta, nu, c, gamma); });
}

fracspde_status fracspde_front_bounds(const fracspde_model_params* p, double lip_sigma,
                                      double* theta_threshold, double* c0) {
    if (!p || !theta_threshold || !c0) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        fracspde::FrontBounds fb =
            fracspde::front_bounds(to_params(p), fracspde::NonlinearitySpec::linear(lip_sigma));
        *theta_threshold = fb.theta_threshold;
        *c0 = fb.c0;
    });
}

fracspde_status fracspde_front_curve(const fracspde_ensemble* e, double theta, double* t,
                                     double* proxy, double* stderr_out, double* window_avg,
                                     double* window_stderr) {
    if (!e || !t || !proxy) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        fracspde::FrontCurve fc = fracspde::estimate_front(e->e, theta);
        for (std::size_t i = 0; i < fc.points.size(); ++i) {
            t[i] = fc.points[i].t;
            proxy[i] = fc.points[i].proxy;
            if (stderr_out) stderr_out[i] = fc.points[i].stderr_;
        }
        if (window_avg) *window_avg = fc.window_average;
        if (window_stderr) *window_stderr = fc.window_stderr;
    });
}

fracspde_status fracspde_front_difference(const fracspde_ensemble* e, double theta_small,
                                          double theta_large, double* diff, double* stderr_out) {
    if (!e || !diff || !stderr_out) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        fracspde::front_proxy_difference(e->e, theta_small, theta_large, diff, stderr_out);
    });
}

fracspde_status fracspde_envelope_check(const fracspde_ensemble* e, double c, double a_fit,
                                        double* a_fit_used, double* growth_rate,
                                        double* admissible_c_min, long* violations,
                                        long* cells_checked) {
    if (!e) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        fracspde::EnvelopeReport rep = fracspde::envelope_check(e->e, c, a_fit);
        if (a_fit_used) *a_fit_used = rep.a_fit;
        if (growth_rate) *growth_rate = rep.growth_rate;
        if (admissible_c_min) *admissible_c_min = rep.admissible_c_min;
        if (violations) *violations = rep.violations;
        if (cells_checked) *cells_checked = rep.cells_checked;
    });
}

fracspde_status fracspde_l2_energy_check(const fracspde_ensemble* e, double epsilon, double* t,
                                         double* energy, double* stderr_out, double* bound,
                                         int* pass) {
    if (!e || !pass) return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        fracspde::EnergyReport rep = fracspde::l2_energy_check(e->e, epsilon);
        for (std::size_t i = 0; i < rep.t.size(); ++i) {
            if (t) t[i] = rep.t[i];
            if (energy) energy[i] = rep.energy[i];
            if (stderr_out) stderr_out[i] = rep.energy_stderr[i];
            if (bound) bound[i] = rep.bound[i];
        }
        *pass = rep.pass ? 1 : 0;
    });
}

fracspde_status fracspde_convexity_diagnostic(const double* k, const double* eta,
                                              const double* eta_stderr, size_t n, int* convex_ok,
                                              int* ratio_nondecreasing, int* strict) {
    if (!k || !eta || !eta_stderr || !convex_ok || !ratio_nondecreasing || !strict)
        return fail(FRACSPDE_ERR_INVALID, "null pointer argument");
    return guarded([&] {
        fracspde::ConvexityReport rep = fracspde::convexity_diagnostic(
            std::vector<double>(k, k + n), std::vector<double>(eta, eta + n),
            std::vector<double>(eta_stderr, eta_stderr + n));
        *convex_ok = rep.convex_ok ? 1 : 0;
        *ratio_nondecreasing = rep.ratio_nondecreasing_ok ? 1 : 0;
        *strict = rep.strict ? 1 : 0;
    });
}

}  // extern "C"
