#include "subordinator.hpp"

#include <cfloat>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "quadrature.hpp"
#include "special_functions.hpp"

namespace fracspde {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Series/Zolotarev crossover in the peak parameter lambda = B u^{-beta/(1-beta)}.
constexpr double kLambdaCutoff = 2.0;

}  // namespace

void SubordinatorParams::validate() const {
    if (!(beta > 0.0) || !(beta < 1.0))
        throw domain_error("SubordinatorParams: beta must lie strictly in (0, 1)");
    if (!(target_rel_err > 0.0) || !(target_rel_err <= 1e-3))
        throw domain_error("SubordinatorParams: target_rel_err must lie in (0, 1e-3]");
}

namespace detail {

double stable_saddle_constant(double beta) {
    return (1.0 - beta) * std::pow(beta, beta / (1.0 - beta));
}

double stable_series(double beta, double u, double* achieved_rel_err) {
    // g(u) = (1/pi) sum_{k>=1} (-1)^{k+1} Gamma(beta k + 1)/k! sin(pi beta k) u^{-beta k - 1}
    const long double lu = logl((long double)u);
    long double sum = 0.0L;
    long double max_abs = 0.0L;
    const int max_terms = 20000;
    int stall = 0;
    for (int k = 1; k <= max_terms; ++k) {
        long double lg = lgammal(1.0L + (long double)beta * k) - lgammal(1.0L + (long double)k);
        long double mag = expl(lg - ((long double)beta * k + 1.0L) * lu);
        long double term = ((k % 2) ? 1.0L : -1.0L) * mag * (long double)sin_pi(beta * k);
        sum += term;
        if (fabsl(term) > max_abs) max_abs = fabsl(term);
        if (fabsl(term) < 1e-24L * fabsl(sum) + 1e-320L) {
            if (++stall >= 3) break;  // sin factor can vanish at single k
        } else {
            stall = 0;
        }
    }
    double result = static_cast<double>(sum / kPi);
    if (achieved_rel_err) {
        double denom = std::abs(result) > 0 ? std::abs(result) : 1e-300;
        *achieved_rel_err =
            30.0 * (double)LDBL_EPSILON * (double)(max_abs / kPi) / denom + 4.0 * DBL_EPSILON;
    }
    return result;
}

namespace {

// log Z(phi) for the Zolotarev integrand; Z increases from Z(0) = B to
// +inf at phi = pi.
double log_zolotarev_z(double beta, double phi) {
    const double omb = 1.0 - beta;
    return (beta / omb) * std::log(std::sin(beta * phi)) +
           std::log(std::sin(omb * phi)) - (1.0 / omb) * std::log(std::sin(phi));
}

}  // namespace

double stable_zolotarev(double beta, double u) {
    const double omb = 1.0 - beta;
    const double B = stable_saddle_constant(beta);
    const double lambda = std::pow(u, -beta / omb);
    const double log_pref =
        std::log(beta / (omb * kPi)) - std::log(u) / omb - lambda * B;
    if (log_pref < -740.0) return 0.0;  // true value below double range
    auto integrand = [&](double phi) {
        if (phi <= 0.0 || phi >= kPi) return 0.0;
        double lz = log_zolotarev_z(beta, phi);
        double z = std::exp(lz);
        double e = lambda * (z - B);
        if (e > 745.0) return 0.0;
        return z * std::exp(-e);
    };
    // peak at phi = 0; give the integrator a mid split
    double err1 = 0.0, err2 = 0.0;
    double part1 = integrate_adaptive(integrand, 0.0, 0.5 * kPi, 0.0, 1e-12, 4000, &err1);
    double part2 = integrate_adaptive(integrand, 0.5 * kPi, kPi,
                                      1e-15 * std::abs(part1), 1e-12, 4000, &err2);
    double total = part1 + part2;
    if (total <= 0.0) return 0.0;
    return std::exp(log_pref + std::log(total));
}

double mainardi_series(double beta, double y, double* achieved_rel_err) {
    long double sum = 0.0L;
    long double max_abs = 0.0L;
    long double lg_y = (y > 0.0) ? logl((long double)y) : 0.0L;
    const int max_terms = 20000;
    int stall = 0;
    for (int n = 0; n < max_terms; ++n) {
        double rg = reciprocal_gamma(1.0 - beta * (n + 1));
        long double lg_mag = (n == 0) ? 0.0L : (long double)n * lg_y - lgammal((long double)n + 1.0L);
        long double term = ((n % 2) ? -1.0L : 1.0L) * expl(lg_mag) * (long double)rg;
        sum += term;
        if (fabsl(term) > max_abs) max_abs = fabsl(term);
        // termination bounds the whole term: |1/Gamma(1-s)| <= Gamma(1+s)/pi
        long double bound =
            expl(lg_mag + lgammal(1.0L + (long double)beta * (n + 1))) / 3.141592653589793L;
        if (bound < 1e-24L * fabsl(sum) + 1e-320L && (long double)n > (long double)y) {
            if (++stall >= 3) break;
        } else {
            stall = 0;
        }
    }
    double result = static_cast<double>(sum);
    if (achieved_rel_err) {
        double denom = std::abs(result) > 0 ? std::abs(result) : 1e-300;
        *achieved_rel_err =
            30.0 * (double)LDBL_EPSILON * (double)max_abs / denom + 4.0 * DBL_EPSILON;
    }
    return result;
}

}  // namespace detail

double stable_density(const SubordinatorParams& p, double u) {
    p.validate();
    if (!std::isfinite(u)) throw domain_error("stable_density: non-finite argument");
    if (u <= 0.0) return 0.0;
    const double B = detail::stable_saddle_constant(p.beta);
    const double lambda = B * std::pow(u, -p.beta / (1.0 - p.beta));
    if (lambda <= kLambdaCutoff) {
        double achieved = 0.0;
        double v = detail::stable_series(p.beta, u, &achieved);
        if (achieved <= p.target_rel_err) return std::max(v, 0.0);
        throw accuracy_error("stable_density: accuracy goal unreachable", v, achieved);
    }
    return detail::stable_zolotarev(p.beta, u);
}

double inverse_subordinator_density(const SubordinatorParams& p, double t, double x) {
    p.validate();
    if (!(t > 0.0) || !std::isfinite(t))
        throw domain_error("inverse_subordinator_density: t must be positive");
    if (!std::isfinite(x)) throw domain_error("inverse_subordinator_density: non-finite x");
    if (x <= 0.0) return 0.0;
    const double beta = p.beta;
    const double tpow = std::pow(t, -beta);
    const double y = x * tpow;
    const double B = detail::stable_saddle_constant(beta);
    const double y0 = std::pow(kLambdaCutoff / B, 1.0 - beta);
    if (y <= y0) {
        double achieved = 0.0;
        double m = detail::mainardi_series(beta, y, &achieved);
        if (achieved > p.target_rel_err)
            throw accuracy_error("inverse_subordinator_density: accuracy goal unreachable",
                                 tpow * m, achieved);
        return std::max(tpow * m, 0.0);
    }
    // change of variables through the stable density; u = y^{-1/beta}
    const double u = std::pow(y, -1.0 / beta);
    const double g = detail::stable_zolotarev(beta, u);
    if (g == 0.0) return 0.0;
    // f = (t/beta) x^{-1-1/beta} g = (1/beta) t^{-beta} y^{-1-1/beta} g
    return tpow / beta * std::pow(y, -1.0 - 1.0 / beta) * g;
}

double inverse_subordinator_moment(const SubordinatorParams& p, double s, double k) {
    p.validate();
    if (!(s > 0.0)) throw domain_error("inverse_subordinator_moment: s must be positive");
    if (!(k > -1.0)) throw domain_error("inverse_subordinator_moment: k must exceed -1");
    return std::exp(std::lgamma(1.0 + k) - std::lgamma(1.0 + p.beta * k) +
                    p.beta * k * std::log(s));
}

double inverse_subordinator_mgf(const SubordinatorParams& p, double w, double s) {
    p.validate();
    if (!(s > 0.0)) throw domain_error("inverse_subordinator_mgf: s must be positive");
    MLParams mp;
    mp.beta = p.beta;
    mp.target_rel_err = p.target_rel_err;
    return mittag_leffler(mp, w * std::pow(s, p.beta));
}

double stable_density_mass(const SubordinatorParams& p) {
    p.validate();
    const double beta = p.beta;
    const double B = detail::stable_saddle_constant(beta);
    const double u0 = std::pow(B / kLambdaCutoff, (1.0 - beta) / beta);
    // grow U until the series tail truncates below 1e-10
    double U = std::max(4.0 * u0, 1.0);
    double tail = 0.0;
    for (int attempt = 0; attempt < 60; ++attempt) {
        // term-wise integral of the series over (U, inf); the magnitude test
        // ignores the sin factor, which vanishes at isolated k
        long double sum = 0.0L;
        bool ok = false;
        const long double lU = logl((long double)U);
        int stall = 0;
        for (int k = 1; k <= 4000; ++k) {
            long double lg =
                lgammal(1.0L + (long double)beta * k) - lgammal(1.0L + (long double)k);
            long double mag = expl(lg - (long double)beta * k * lU) / ((long double)beta * k);
            long double term = ((k % 2) ? 1.0L : -1.0L) * mag * (long double)sin_pi(beta * k);
            sum += term;
            if (mag < 1e-14L) {
                if (++stall >= 3) {
                    ok = true;
                    break;
                }
            } else {
                stall = 0;
            }
        }
        if (ok) {
            tail = static_cast<double>(sum / kPi);
            break;
        }
        U *= 2.0;
    }
    SubordinatorParams loose = p;
    auto g = [&](double u) { return stable_density(loose, u); };
    double body = integrate_adaptive(g, 0.0, u0, 1e-12, 1e-9) +
                  integrate_adaptive(g, u0, U, 1e-12, 1e-9);
    return body + tail;
}

double inverse_subordinator_mass(const SubordinatorParams& p, double t) {
    p.validate();
    if (!(t > 0.0)) throw domain_error("inverse_subordinator_mass: t must be positive");
    const double beta = p.beta;
    const double B = detail::stable_saddle_constant(beta);
    // cutoff where the Wright tail exponent reaches 50: contribution < 1e-12
    const double X = std::pow(t, beta) * std::pow(50.0 / B, 1.0 - beta);
    auto f = [&](double x) { return inverse_subordinator_density(p, t, x); };
    double x_mid = std::pow(t, beta);
    return integrate_adaptive(f, 0.0, x_mid, 1e-12, 1e-9) +
           integrate_adaptive(f, x_mid, X, 1e-12, 1e-9);
}

}  // namespace fracspde
