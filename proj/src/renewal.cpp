#include "renewal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "errors.hpp"
#include "quadrature.hpp"
#include "special_functions.hpp"

namespace fracspde {

namespace {

// Exact cell integrals of tau^-theta against the linear hat pair on
// [B, A]: I1 = int tau^{1-theta}-type moments. wl multiplies the left
// node f(t-A), wr the right node f(t-B).
struct CellWeights {
    double wl, wr;
};

CellWeights power_cell_weights(double b, double theta, double A, double B, double delta) {
    const double p1 = 1.0 - theta, p2 = 2.0 - theta;
    const double i1 = (std::pow(A, p1) - std::pow(B, p1)) / p1;
    const double i2 = (std::pow(A, p2) - std::pow(B, p2)) / p2;
    return {b / delta * (i2 - B * i1), b / delta * (A * i1 - i2)};
}

bool grid_is_uniform(const std::vector<double>& t) {
    if (t.size() < 2) return true;
    const double dt = t[1] - t[0];
    if (std::abs(t[0] - dt) > 1e-10 * dt) return false;  // first node must sit at dt
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i] - t[i - 1] - dt) > 1e-10 * dt) return false;
    return true;
}

// Lag tables for a uniform grid: cell with lag k spans tau in [k dt, (k+1) dt].
void uniform_lag_tables(double b, double theta, double dt, std::size_t n,
                        std::vector<double>& wl, std::vector<double>& wr) {
    wl.resize(n);
    wr.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        CellWeights w =
            power_cell_weights(b, theta, (k + 1.0) * dt, static_cast<double>(k) * dt, dt);
        wl[k] = w.wl;
        wr[k] = w.wr;
    }
}

// (K h)_i for all i, with h given at the grid nodes and h0 at t = 0.
std::vector<double> apply_convolution(const RenewalProblem& p, double h0,
                                      const std::vector<double>& h) {
    const std::size_t n = p.t_grid.size();
    std::vector<double> out(n, 0.0);
    if (p.b == 0.0) return out;
    if (grid_is_uniform(p.t_grid)) {
        std::vector<double> wl, wr;
        uniform_lag_tables(p.b, p.theta, p.t_grid[0], n, wl, wr);
        for (std::size_t i = 1; i <= n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 1; j <= i; ++j) {
                const std::size_t k = i - j;
                acc += wl[k] * (j >= 2 ? h[j - 2] : h0) + wr[k] * h[j - 1];
            }
            out[i - 1] = acc;
        }
        return out;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        const double ti = p.t_grid[i - 1];
        double acc = 0.0;
        double prev_node = 0.0;
        for (std::size_t j = 1; j <= i; ++j) {
            const double sj = p.t_grid[j - 1];
            CellWeights w = power_cell_weights(p.b, p.theta, ti - prev_node, ti - sj, sj - prev_node);
            acc += w.wl * (j >= 2 ? h[j - 2] : h0) + w.wr * h[j - 1];
            prev_node = sj;
        }
        out[i - 1] = acc;
    }
    return out;
}

void finish_solution(RenewalSolution& s, double theta, double b) {
    s.c = tilt_constant(b, theta);
    const std::size_t n = s.t.size();
    const double T = s.t.back();
    auto tilted = [&](std::size_t i) { return std::exp(-s.c * s.t[i]) * s.f[i]; };
    s.asymptote = tilted(n - 1);
    // convergence-rate estimate over the last decade of t
    std::size_t i0 = 0;
    while (i0 + 1 < n && s.t[i0] < 0.1 * T) ++i0;
    double v0 = tilted(i0), v1 = s.asymptote;
    if (v0 > 0.0 && v1 > 0.0 && s.t[n - 1] > s.t[i0])
        s.asymptote_drift = (std::log(v1) - std::log(v0)) / (s.t[n - 1] - s.t[i0]);
    else
        s.asymptote_drift = 0.0;
}

}  // namespace

Forcing Forcing::constant(double value) {
    Forcing f;
    f.constant_ = true;
    f.fn_ = [value](double) { return value; };
    return f;
}

Forcing Forcing::function(std::function<double(double)> fn) {
    Forcing f;
    f.fn_ = std::move(fn);
    return f;
}

Forcing Forcing::samples(std::vector<double> t, std::vector<double> v) {
    if (t.size() != v.size() || t.empty())
        throw domain_error("Forcing::samples: need equally sized, nonempty arrays");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw domain_error("Forcing::samples: times must increase");
    Forcing f;
    f.fn_ = [t = std::move(t), v = std::move(v)](double x) {
        if (x <= t.front()) return v.front();
        if (x >= t.back()) return v.back();
        auto it = std::upper_bound(t.begin(), t.end(), x);
        std::size_t hi = static_cast<std::size_t>(it - t.begin());
        double w = (x - t[hi - 1]) / (t[hi] - t[hi - 1]);
        return (1.0 - w) * v[hi - 1] + w * v[hi];
    };
    return f;
}

double Forcing::operator()(double t) const { return fn_(t); }

void RenewalProblem::validate() const {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw domain_error("RenewalProblem: theta must lie in (0, 1)");
    if (!(b >= 0.0) || !std::isfinite(b))
        throw domain_error("RenewalProblem: b must be finite and nonnegative");
    if (t_grid.empty()) throw domain_error("RenewalProblem: empty time grid");
    if (!(t_grid.front() > 0.0))
        throw domain_error("RenewalProblem: grid must start above 0");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw domain_error("RenewalProblem: grid must be strictly increasing");
    const double a0 = a(0.0);
    if (!(a0 >= 0.0) || !std::isfinite(a0))
        throw domain_error("RenewalProblem: forcing must be nonnegative");
    double prev = a0;
    const double slack = 1e-12 * (std::abs(a0) + 1.0);
    for (double t : t_grid) {
        double at = a(t);
        if (!(at >= 0.0) || !std::isfinite(at))
            throw domain_error("RenewalProblem: forcing must be nonnegative");
        if (at > prev + slack)
            throw domain_error("RenewalProblem: forcing must be non-increasing");
        prev = at;
    }
}

double tilt_constant(double b, double theta) {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw domain_error("tilt_constant: theta must lie in (0, 1)");
    if (!(b >= 0.0)) throw domain_error("tilt_constant: b must be nonnegative");
    if (b == 0.0) return 0.0;
    return std::pow(b * std::tgamma(1.0 - theta), 1.0 / (1.0 - theta));
}

RenewalSolution solve_renewal(const RenewalProblem& p) {
    p.validate();
    const std::size_t n = p.t_grid.size();
    RenewalSolution s;
    s.t = p.t_grid;
    s.f.assign(n, 0.0);
    const double f0 = p.a(0.0);
    if (p.b == 0.0) {
        for (std::size_t i = 0; i < n; ++i) s.f[i] = p.a(p.t_grid[i]);
        finish_solution(s, p.theta, p.b);
        return s;
    }
    const bool uniform = grid_is_uniform(p.t_grid);
    std::vector<double> wl, wr;
    if (uniform) uniform_lag_tables(p.b, p.theta, p.t_grid[0], n, wl, wr);
    for (std::size_t i = 1; i <= n; ++i) {
        const double ti = p.t_grid[i - 1];
        double acc = p.a(ti);
        double diag_r;
        if (uniform) {
            for (std::size_t j = 1; j < i; ++j) {
                const std::size_t k = i - j;
                acc += wl[k] * (j >= 2 ? s.f[j - 2] : f0) + wr[k] * s.f[j - 1];
            }
            acc += wl[0] * (i >= 2 ? s.f[i - 2] : f0);
            diag_r = wr[0];
        } else {
            double prev_node = 0.0;
            diag_r = 0.0;
            for (std::size_t j = 1; j <= i; ++j) {
                const double sj = p.t_grid[j - 1];
                CellWeights w =
                    power_cell_weights(p.b, p.theta, ti - prev_node, ti - sj, sj - prev_node);
                if (j == i) {
                    acc += w.wl * (j >= 2 ? s.f[j - 2] : f0);
                    diag_r = w.wr;
                } else {
                    acc += w.wl * (j >= 2 ? s.f[j - 2] : f0) + w.wr * s.f[j - 1];
                }
                prev_node = sj;
            }
        }
        if (!(diag_r < 0.5))
            throw domain_error("solve_renewal: grid too coarse to resolve the kernel "
                               "singularity (diagonal weight >= 1/2)");
        s.f[i - 1] = acc / (1.0 - diag_r);
    }
    finish_solution(s, p.theta, p.b);
    return s;
}

double renewal_asymptote(const RenewalProblem& p) {
    p.validate();
    const double c = tilt_constant(p.b, p.theta);
    if (p.a.is_constant()) return p.a(0.0) / (1.0 - p.theta);
    if (c <= 0.0) throw domain_error("renewal_asymptote: requires b > 0");
    const double Y = 40.0 / c;
    auto integrand = [&](double y) { return p.a(y) * std::exp(-c * y); };
    double body = integrate_adaptive(integrand, 0.0, Y, 1e-14, 1e-10);
    double tail = p.a(Y) * std::exp(-c * Y) / c;
    return c / (1.0 - p.theta) * (body + tail);
}

std::vector<std::vector<double>> picard_iterate(const std::vector<double>& f0,
                                                const RenewalProblem& p, int n_iters) {
    p.validate();
    if (f0.size() != p.t_grid.size())
        throw domain_error("picard_iterate: f0 must be sampled on the problem grid");
    for (double v : f0)
        if (!(v >= 0.0)) throw domain_error("picard_iterate: f0 must be nonnegative");
    if (n_iters < 0) throw domain_error("picard_iterate: n_iters must be nonnegative");
    std::vector<std::vector<double>> iterates;
    iterates.reserve(n_iters + 1);
    iterates.push_back(f0);
    const double a0 = p.a(0.0);
    for (int k = 0; k < n_iters; ++k) {
        std::vector<double> conv = apply_convolution(p, a0, iterates.back());
        std::vector<double> next(p.t_grid.size());
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = p.a(p.t_grid[i]) + conv[i];
        iterates.push_back(std::move(next));
    }
    return iterates;
}

OrderingReport check_supersolution(const std::vector<double>& h, const RenewalProblem& p,
                                   double h0) {
    p.validate();
    if (h.size() != p.t_grid.size())
        throw domain_error("check_supersolution: h must be sampled on the problem grid");
    for (double v : h)
        if (!(v >= 0.0)) throw domain_error("check_supersolution: h must be nonnegative");
    if (std::isnan(h0)) {
        if (h.size() >= 2) {
            const double t1 = p.t_grid[0], t2 = p.t_grid[1];
            h0 = h[0] - (h[1] - h[0]) / (t2 - t1) * t1;
            if (h0 < 0.0) h0 = h[0];
        } else {
            h0 = h[0];
        }
    }
    std::vector<double> conv = apply_convolution(p, h0, h);
    OrderingReport rep;
    double scale = p.a(0.0);
    for (double v : h) scale = std::max(scale, std::abs(v));
    rep.tolerance = 1e-7 * (scale + 1.0);
    double rmax = -std::numeric_limits<double>::infinity();
    double rmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < h.size(); ++i) {
        double r = h[i] - p.a(p.t_grid[i]) - conv[i];
        rmax = std::max(rmax, r);
        rmin = std::min(rmin, r);
    }
    rep.max_positive_residual = rmax;
    rep.max_negative_residual = rmin;
    const bool super = rmin >= -rep.tolerance;
    const bool sub = rmax <= rep.tolerance;
    if (super && sub)
        rep.classification = RenewalOrdering::Solution;
    else if (super)
        rep.classification = RenewalOrdering::Supersolution;
    else if (sub)
        rep.classification = RenewalOrdering::Subsolution;
    else
        rep.classification = RenewalOrdering::Neither;
    RenewalSolution sol = solve_renewal(p);
    double ord_tol = 1e-6 * (scale + 1.0);
    bool ge = true, le = true;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] < sol.f[i] - ord_tol) ge = false;
        if (h[i] > sol.f[i] + ord_tol) le = false;
    }
    switch (rep.classification) {
        case RenewalOrdering::Supersolution: rep.ordering_vs_solution_ok = ge; break;
        case RenewalOrdering::Subsolution: rep.ordering_vs_solution_ok = le; break;
        case RenewalOrdering::Solution: rep.ordering_vs_solution_ok = ge && le; break;
        case RenewalOrdering::Neither: rep.ordering_vs_solution_ok = false; break;
    }
    return rep;
}

double renewal_residual(const RenewalProblem& p, const std::vector<double>& f, double f0) {
    p.validate();
    std::vector<double> conv = apply_convolution(p, f0, f);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double r = std::abs(f[i] - p.a(p.t_grid[i]) - conv[i]);
        worst = std::max(worst, r / (std::abs(f[i]) + 1e-300));
    }
    return worst;
}

std::vector<double> solve_renewal_tilted(const RenewalProblem& p) {
    p.validate();
    if (!grid_is_uniform(p.t_grid))
        throw unsupported_error("solve_renewal_tilted: uniform grids only");
    const std::size_t n = p.t_grid.size();
    const double dt = p.t_grid[0];
    const double c = tilt_constant(p.b, p.theta);
    // numeric lag tables for the tilted kernel e^{-c tau} b tau^-theta
    std::vector<double> wl(n), wr(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double B = k * dt, A = (k + 1.0) * dt;
        auto left = [&](double tau) { return std::exp(-c * tau) * (tau - B) / dt; };
        auto right = [&](double tau) { return std::exp(-c * tau) * (A - tau) / dt; };
        if (k == 0) {
            // tau = dt w^{1/(1-theta)} removes the endpoint singularity
            const double pw = 1.0 / (1.0 - p.theta);
            auto sing = [&](const std::function<double(double)>& hat) {
                auto m = [&](double w) {
                    double tau = dt * std::pow(w, pw);
                    return hat(tau);
                };
                return p.b * std::pow(dt, 1.0 - p.theta) * pw *
                       integrate_adaptive(m, 0.0, 1.0, 1e-15, 1e-11);
            };
            wl[0] = sing(left);
            wr[0] = sing(right);
        } else {
            auto kernel = [&](double tau) { return p.b * std::pow(tau, -p.theta); };
            wl[k] = integrate_adaptive([&](double tau) { return kernel(tau) * left(tau); }, B, A,
                                       1e-15, 1e-11);
            wr[k] = integrate_adaptive([&](double tau) { return kernel(tau) * right(tau); }, B, A,
                                       1e-15, 1e-11);
        }
    }
    std::vector<double> f(n, 0.0);
    const double f0 = p.a(0.0);  // tilted forcing at 0 equals a(0)
    auto a_tilde = [&](double t) { return std::exp(-c * t) * p.a(t); };
    for (std::size_t i = 1; i <= n; ++i) {
        double acc = a_tilde(p.t_grid[i - 1]);
        for (std::size_t j = 1; j < i; ++j) {
            const std::size_t k = i - j;
            acc += wl[k] * (j >= 2 ? f[j - 2] : f0) + wr[k] * f[j - 1];
        }
        acc += wl[0] * (i >= 2 ? f[i - 2] : f0);
        f[i - 1] = acc / (1.0 - wr[0]);
    }
    return f;
}

void write_renewal_csv(const RenewalSolution& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_renewal_csv: cannot open " + path);
    out << "t,f,f_tilted\n";
    char buf[128];
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", s.t[i], s.f[i],
                      std::exp(-s.c * s.t[i]) * s.f[i]);
        out << buf;
    }
}

}  // namespace fracspde
