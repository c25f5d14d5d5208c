#pragma once

#include <functional>
#include <string>
#include <vector>

namespace fracspde {

// Forcing term a(t): nonnegative and non-increasing on the solver grid.
class Forcing {
public:
    static Forcing constant(double value);
    static Forcing function(std::function<double(double)> fn);
    // Samples with linear interpolation; constant extension outside [t.front(), t.back()].
    static Forcing samples(std::vector<double> t, std::vector<double> v);

    double operator()(double t) const;
    bool is_constant() const { return constant_; }

private:
    Forcing() = default;
    bool constant_ = false;
    std::function<double(double)> fn_;
};

struct RenewalProblem {
    Forcing a = Forcing::constant(1.0);
    double b = 1.0;      // kernel amplitude, g(tau) = b / tau^theta
    double theta = 0.5;  // kernel exponent, in (0, 1)
    std::vector<double> t_grid;  // strictly increasing, first entry > 0

    void validate() const;
};

struct RenewalSolution {
    std::vector<double> t;
    std::vector<double> f;
    double c = 0.0;                // tilt constant
    double asymptote = 0.0;        // e^{-c T} f(T) at the final grid time
    double asymptote_drift = 0.0;  // slope of log(e^{-ct} f) over the last decade
};

// c = (b Gamma(1-theta))^{1/(1-theta)}; 0 when b = 0.
double tilt_constant(double b, double theta);

// Product-integration Volterra solve of f = a + f * g with the weakly
// singular kernel integrated exactly against piecewise-linear f.
RenewalSolution solve_renewal(const RenewalProblem& p);

// c/(1-theta) int_0^inf a(y) e^{-cy} dy (closed form for constant forcing).
double renewal_asymptote(const RenewalProblem& p);

// Picard iterates f^{(k+1)} = a + f^{(k)} * g, k = 0..n_iters, under the
// same discretization. Supersolution starts descend, subsolution starts
// ascend, both toward the solve_renewal fixed point.
std::vector<std::vector<double>> picard_iterate(const std::vector<double>& f0,
                                                const RenewalProblem& p, int n_iters);

enum class RenewalOrdering { Solution, Supersolution, Subsolution, Neither };

struct OrderingReport {
    RenewalOrdering classification = RenewalOrdering::Neither;
    double max_positive_residual = 0.0;  // max over grid of h - (a + h*g)
    double max_negative_residual = 0.0;  // min over grid of the same
    bool ordering_vs_solution_ok = false;
    double tolerance = 0.0;
};

// Classifies h against the renewal relation at grid tolerance and verifies
// the comparison-theorem ordering against solve_renewal. h0 is the value
// at t = 0; pass NaN to extrapolate linearly from the first two nodes.
OrderingReport check_supersolution(const std::vector<double>& h, const RenewalProblem& p,
                                   double h0);

// Max relative residual |f - a - f*g| / f over the grid.
double renewal_residual(const RenewalProblem& p, const std::vector<double>& f, double f0);

// Tilted solve: g~(tau) = e^{-c tau} g(tau), a~ = e^{-ct} a(t); returns
// the tilted solution values (used by the equivalence check).
std::vector<double> solve_renewal_tilted(const RenewalProblem& p);

void write_renewal_csv(const RenewalSolution& s, const std::string& path);

}  // namespace fracspde
