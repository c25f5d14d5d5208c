#pragma once

namespace fracspde {

struct SubordinatorParams {
    double beta = 0.5;             // stability index, strictly inside (0, 1)
    double target_rel_err = 1e-10;

    void validate() const;
};

// Density g_beta(u) of the standard one-sided beta-stable law D_1
// (Laplace transform exp(-s^beta)); exactly 0 for u <= 0.
double stable_density(const SubordinatorParams& p, double u);

// Density f_{E_t}(x) of the inverse stable subordinator at time t > 0,
// via f_t(x) = t beta^-1 x^{-1-1/beta} g_beta(t x^{-1/beta}); 0 for x <= 0.
double inverse_subordinator_density(const SubordinatorParams& p, double t, double x);

// E[E_s^k] = Gamma(1+k) s^{beta k} / Gamma(1+beta k) for s > 0, k > -1.
double inverse_subordinator_moment(const SubordinatorParams& p, double s, double k);

// E[exp(w E_s)] = E_beta(w s^beta), by delegation to mittag_leffler.
double inverse_subordinator_mgf(const SubordinatorParams& p, double w, double s);

// Module quadrature of the total mass, two-panel scheme: adaptive rule on
// (0, U] plus the term-wise series tail beyond U (tail truncation < 1e-10).
double stable_density_mass(const SubordinatorParams& p);
double inverse_subordinator_mass(const SubordinatorParams& p, double t);

namespace detail {
// Saddle-height constant B = (1-beta) beta^{beta/(1-beta)}; the Zolotarev
// integrand's minimum, and the stretched-exponential rate of both tails.
double stable_saddle_constant(double beta);
// Convergent series in u^{-beta k - 1}; accurate for mild peak parameter
// lambda = B u^{-beta/(1-beta)} (cancellation grows like exp(lambda)).
double stable_series(double beta, double u, double* achieved_rel_err);
// Exact single-integral (Zolotarev) representation with the peak factored
// out; valid for all u > 0, used where the series cancels.
double stable_zolotarev(double beta, double u);
// Wright/Mainardi series M_beta(y) = sum (-y)^n / (n! Gamma(1-beta(n+1))).
double mainardi_series(double beta, double y, double* achieved_rel_err);
}  // namespace detail

}  // namespace fracspde
