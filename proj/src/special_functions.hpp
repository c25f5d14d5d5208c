#pragma once

#include <utility>

namespace fracspde {

struct MLParams {
    double beta = 0.5;             // order, in (0, 1]; beta = 1 is the classical-heat case
    double target_rel_err = 1e-10; // accuracy goal, in (0, 1e-3]

    void validate() const;
};

// Gamma function for x > 0 (>= 12 significant digits).
double gamma_fn(double x);

// 1/Gamma(x) for any real x; zero at the poles x = 0, -1, -2, ...
double reciprocal_gamma(double x);

// sin(pi*x) with exact integer range reduction.
double sin_pi(double x);

// One-parameter Mittag-Leffler function E_beta(z) for real z.
// Stable down to z = -1e6. Throws domain_error for non-finite z and
// accuracy_error (carrying the best estimate and its bound) when the
// requested accuracy is unreachable.
double mittag_leffler(const MLParams& p, double z);

// Two-sided bounds on E_beta(-x) for x > 0, 0 < beta < 1:
//   1/(1 + Gamma(1-beta) x)  <=  E_beta(-x)  <=  1/(1 + x/Gamma(1+beta)).
std::pair<double, double> ml_bounds(double beta, double x);

namespace detail {
// Power series with extended-precision accumulation. Valid everywhere in
// exact arithmetic; accuracy degrades by ~exp(|z|^(1/beta)) for z < 0.
double ml_series(double beta, double z, double* achieved_rel_err);
// Asymptotic expansion -sum_k z^-k / Gamma(1-beta k) for large negative z.
double ml_asymptotic_neg(double beta, double x, double* achieved_rel_err);
// Complete-monotonicity integral for E_beta(-x), x > 0, 0 < beta < 1.
// Positive integrand; used on the band where neither expansion reaches
// the accuracy goal.
double ml_integral_neg(double beta, double x, double* achieved_rel_err);
}  // namespace detail

}  // namespace fracspde
