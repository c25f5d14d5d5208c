#pragma once

#include <functional>

namespace fracspde {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
};

using Integrand = std::function<double(double)>;

// Single Gauss-7/Kronrod-15 panel on [a, b].
QuadResult gk15_panel(const Integrand& f, double a, double b);

// Globally adaptive Gauss-Kronrod on [a, b]. Stops when the summed error
// estimate is below max(abs_tol, rel_tol*|value|); throws accuracy_error
// (carrying the best estimate) if the interval budget runs out first.
double integrate_adaptive(const Integrand& f, double a, double b, double abs_tol,
                          double rel_tol, int max_intervals = 4000,
                          double* err_out = nullptr);

// Adaptive integration over [a, inf) via the map s = a + u/(1-u).
double integrate_to_infinity(const Integrand& f, double a, double abs_tol,
                             double rel_tol, int max_intervals = 4000);

// Richardson-extrapolated trapezoid (Romberg) on [a, b].
double romberg(const Integrand& f, double a, double b, double rel_tol,
               double abs_tol = 0.0, int max_levels = 22);

}  // namespace fracspde
