#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"

namespace fracspde {

namespace {

// Gauss-7 / Kronrod-15 abscissae and weights on [-1, 1] (QUADPACK values).
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Interval {
    double a, b, value, error;
};

}  // namespace

QuadResult gk15_panel(const Integrand& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kXgk[i]);
        fv[14 - i] = f(c + h * kXgk[i]);
    }
    fv[7] = f(c);
    double kronrod = kWgk[7] * fv[7];
    double gauss = kWg[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        kronrod += kWgk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) gauss += kWg[i / 2] * (fv[i] + fv[14 - i]);
    }
    kronrod *= h;
    gauss *= h;
    double err = std::abs(kronrod - gauss);
    // QUADPACK-style sharpening of the error estimate.
    double resabs = 0.0;
    for (int i = 0; i < 15; ++i) resabs += std::abs(fv[i]);
    resabs *= std::abs(h) * 2.0 / 15.0;
    if (resabs > 0.0 && err > 0.0)
        err = resabs * std::min(1.0, std::pow(200.0 * err / resabs, 1.5));
    return {kronrod, err};
}

double integrate_adaptive(const Integrand& f, double a, double b, double abs_tol,
                          double rel_tol, int max_intervals, double* err_out) {
    if (a == b) {
        if (err_out) *err_out = 0.0;
        return 0.0;
    }
    // start from a uniform subdivision so isolated features are seen
    const int initial = 8;
    std::vector<Interval> segs;
    segs.reserve(64);
    double total = 0.0;
    double total_err = 0.0;
    for (int i = 0; i < initial; ++i) {
        double lo = a + (b - a) * i / initial;
        double hi = (i == initial - 1) ? b : a + (b - a) * (i + 1) / initial;
        QuadResult q = gk15_panel(f, lo, hi);
        segs.push_back({lo, hi, q.value, q.error});
        total += q.value;
        total_err += q.error;
    }
    while (static_cast<int>(segs.size()) < max_intervals) {
        double tol = std::max(abs_tol, rel_tol * std::abs(total));
        if (total_err <= tol) break;
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].error > segs[worst].error) worst = i;
        Interval seg = segs[worst];
        double mid = 0.5 * (seg.a + seg.b);
        if (mid <= seg.a || mid >= seg.b) break;  // interval exhausted in double
        QuadResult left = gk15_panel(f, seg.a, mid);
        QuadResult right = gk15_panel(f, mid, seg.b);
        total += left.value + right.value - seg.value;
        total_err += left.error + right.error - seg.error;
        segs[worst] = {seg.a, mid, left.value, left.error};
        segs.push_back({mid, seg.b, right.value, right.error});
    }
    if (err_out) *err_out = total_err;
    double tol = std::max(abs_tol, rel_tol * std::abs(total));
    if (total_err > tol && !err_out)
        throw accuracy_error("adaptive quadrature did not converge", total, total_err);
    return total;
}

double integrate_to_infinity(const Integrand& f, double a, double abs_tol,
                             double rel_tol, int max_intervals) {
    auto mapped = [&](double u) {
        const double om = 1.0 - u;
        const double s = a + u / om;
        if (!std::isfinite(s)) return 0.0;
        const double v = f(s) / (om * om);
        return std::isfinite(v) ? v : 0.0;
    };
    return integrate_adaptive(mapped, 0.0, 1.0, abs_tol, rel_tol, max_intervals);
}

double romberg(const Integrand& f, double a, double b, double rel_tol,
               double abs_tol, int max_levels) {
    std::vector<double> row(static_cast<std::size_t>(max_levels) + 1, 0.0);
    double h = b - a;
    row[0] = 0.5 * h * (f(a) + f(b));
    double prev = row[0];
    std::size_t n = 1;
    for (int level = 1; level <= max_levels; ++level) {
        h *= 0.5;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += f(a + h * (2.0 * i + 1.0));
        n *= 2;
        double cur = 0.5 * row[0] + h * sum;
        double pow4 = 1.0;
        for (int k = 1; k <= level; ++k) {
            pow4 *= 4.0;
            double next = cur + (cur - row[k - 1]) / (pow4 - 1.0);
            row[k - 1] = cur;
            cur = next;
        }
        row[level] = cur;
        if (level >= 3) {
            double diff = std::abs(cur - prev);
            if (diff <= std::max(abs_tol, rel_tol * std::abs(cur))) return cur;
        }
        prev = cur;
    }
    throw accuracy_error("Romberg integration did not converge", prev, std::abs(prev - row[max_levels - 1]));
}

}  // namespace fracspde
