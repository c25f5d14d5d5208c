#include "simulation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "errors.hpp"
#include "fft.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "special_functions.hpp"

namespace fracspde {

namespace {

using cd = std::complex<double>;

double mean2_at(const FieldEnsemble& e, std::size_t idx) {
    return e.sum_p2[idx] / e.replicas;
}

double se_of_mean(double sum, double sum_sq, int n) {
    if (n < 2) return 0.0;
    double mean = sum / n;
    double var = (sum_sq / n - mean * mean) * n / (n - 1.0);
    if (var < 0.0) var = 0.0;
    return std::sqrt(var / n);
}

}  // namespace

void SpaceTimeGrid::validate() const {
    if (!(x_max > x_min)) throw domain_error("SpaceTimeGrid: x_max must exceed x_min");
    if (nx < 16) throw domain_error("SpaceTimeGrid: nx must be at least 16");
    if (!(t_max > 0.0)) throw domain_error("SpaceTimeGrid: t_max must be positive");
    if (nt < 8) throw domain_error("SpaceTimeGrid: nt must be at least 8");
}

NonlinearitySpec NonlinearitySpec::linear(double lambda) {
    NonlinearitySpec s;
    s.kind = Kind::Linear;
    s.lambda = lambda;
    s.lip_sigma = lambda;
    s.l_sigma = lambda;
    return s;
}

NonlinearitySpec NonlinearitySpec::sampled(std::vector<double> z, std::vector<double> s,
                                           double lip, double l) {
    NonlinearitySpec out;
    out.kind = Kind::Sampled;
    out.lambda = 0.0;
    out.lip_sigma = lip;
    out.l_sigma = l;
    out.sample_z = std::move(z);
    out.sample_s = std::move(s);
    return out;
}

double NonlinearitySpec::operator()(double u) const {
    if (kind == Kind::Linear) return lambda * u;
    const auto& z = sample_z;
    const auto& s = sample_s;
    if (u <= z.front()) return s.front();
    if (u >= z.back()) return s.back();
    auto it = std::upper_bound(z.begin(), z.end(), u);
    std::size_t hi = static_cast<std::size_t>(it - z.begin());
    double w = (u - z[hi - 1]) / (z[hi] - z[hi - 1]);
    return (1.0 - w) * s[hi - 1] + w * s[hi];
}

void NonlinearitySpec::validate() const {
    if (!(lip_sigma >= 0.0) || !(l_sigma >= 0.0))
        throw domain_error("NonlinearitySpec: Lipschitz constants must be nonnegative");
    if (l_sigma > lip_sigma + 1e-12 * (lip_sigma + 1.0))
        throw domain_error("NonlinearitySpec: requires L_sigma <= Lip_sigma");
    if (kind == Kind::Linear) {
        if (!(lambda >= 0.0)) throw domain_error("NonlinearitySpec: lambda must be nonnegative");
        return;
    }
    if (sample_z.size() != sample_s.size() || sample_z.size() < 2)
        throw domain_error("NonlinearitySpec: sampled map needs >= 2 matched points");
    for (std::size_t i = 1; i < sample_z.size(); ++i) {
        if (!(sample_z[i] > sample_z[i - 1]))
            throw domain_error("NonlinearitySpec: sample abscissae must increase");
        double slope = std::abs((sample_s[i] - sample_s[i - 1]) / (sample_z[i] - sample_z[i - 1]));
        if (slope > lip_sigma + 1e-9 * (lip_sigma + 1.0))
            throw domain_error("NonlinearitySpec: sampled slope exceeds declared Lip_sigma");
    }
}

bool NonlinearitySpec::vanishes_at_zero() const {
    return std::abs((*this)(0.0)) <= 1e-14;
}

double FieldEnsemble::field(int replica, int level, int cell) const {
    if (!has_fields) throw domain_error("FieldEnsemble: fields were not retained");
    return fields[(static_cast<std::size_t>(replica) * (grid.nt + 1) + level) * grid.nx + cell];
}

int FieldEnsemble::block_of(int replica) const {
    return static_cast<int>(static_cast<long long>(replica) * n_blocks / replicas);
}

namespace {

// Precomputed per-configuration data shared read-only by all replicas.
struct SimPlan {
    const ModelParams* params;
    const SpaceTimeGrid* grid;
    const NonlinearitySpec* sigma;
    int nx, nt;
    double dt, dx, noise_amp;  // noise_amp = sqrt(dt dx)
    bool periodic;
    std::size_t L;  // FFT length (0 => direct summation)
    // noise kernels, one per lag m = 1..nt
    std::vector<std::vector<cd>> noise_hat;       // FFT path: spectra, length L
    std::vector<std::vector<double>> noise_kern;  // direct path: circular kernels
    // deterministic part (G_{t_m} * u0), levels 0..nt
    std::vector<double> det_field;
};

// Fold the symmetric offset row w[0..nx] into a circular kernel of length
// n (periodic torus images) or embed it for linear convolution (length L).
std::vector<double> fold_periodic(const std::vector<double>& w, int n) {
    std::vector<double> k(n, 0.0);
    k[0] = w[0] + 2.0 * w[n];
    for (int j = 1; j < n; ++j) k[j] = w[j] + w[n - j];
    return k;
}

std::vector<double> embed_padded(const std::vector<double>& w, int nx, std::size_t L) {
    std::vector<double> k(L, 0.0);
    for (int j = 0; j <= nx && j < static_cast<int>(L); ++j) k[j] = w[j];
    for (int j = 1; j <= nx; ++j) k[L - j] = w[j];
    return k;
}

std::vector<cd> fft_of_real(const std::vector<double>& v, std::size_t L) {
    std::vector<cd> a(L, cd(0.0, 0.0));
    for (std::size_t i = 0; i < v.size(); ++i) a[i] = cd(v[i], 0.0);
    fft(a, false);
    return a;
}

SimPlan build_plan(const ModelParams& params, const SpaceTimeGrid& grid,
                   const std::vector<double>& u0, const NonlinearitySpec& sigma) {
    SimPlan plan;
    plan.params = &params;
    plan.grid = &grid;
    plan.sigma = &sigma;
    plan.nx = grid.nx;
    plan.nt = grid.nt;
    plan.dt = grid.dt();
    plan.dx = grid.dx();
    plan.noise_amp = std::sqrt(plan.dt * plan.dx);
    plan.periodic = grid.boundary == BoundaryPolicy::Periodic;

    KernelTable table(params, plan.dt, plan.dx, plan.nt, plan.nx);
    // domain truncation: mass escaping half the domain width by t_max
    double half_width = 0.5 * (grid.x_max - grid.x_min);
    if (green_tail_mass(params, grid.t_max, half_width) > 1e-3)
        throw truncation_error("simulate: kernel tail mass outside the domain exceeds 1e-3; "
                               "widen the spatial domain");

    const double theta = params.beta * params.d / params.alpha;
    const double cstar = c_star(params);
    const int nx = plan.nx, nt = plan.nt;

    // noise rows: pointwise kernel values with per-slice variance matched to
    // the exact cell integral C* dt^{1-theta} kappa_m of the L2 identity;
    // at m = 1 the whole correction sits in the offset-0 cell
    std::vector<std::vector<double>> noise_rows(nt);
    for (int m = 1; m <= nt; ++m) {
        std::vector<double> w(nx + 1);
        for (int j = 0; j <= nx; ++j) w[j] = table.value(m, j);
        const double kappa =
            (std::pow(m, 1.0 - theta) - std::pow(m - 1.0, 1.0 - theta)) / (1.0 - theta);
        const double target = cstar * std::pow(plan.dt, 1.0 - theta) * kappa / (plan.dt * plan.dx);
        double q_off = 0.0;
        for (int j = 1; j <= nx; ++j) q_off += 2.0 * w[j] * w[j];
        if (m == 1) {
            w[0] = std::sqrt(std::max(target - q_off, 0.0));
        } else {
            double q_all = q_off + w[0] * w[0];
            double rho = std::sqrt(target / q_all);
            for (double& v : w) v *= rho;
        }
        noise_rows[m - 1] = std::move(w);
    }

    // deterministic rows: dx-weighted kernel normalized to unit discrete mass
    std::vector<std::vector<double>> det_rows(nt);
    for (int m = 1; m <= nt; ++m) {
        std::vector<double> w(nx + 1);
        for (int j = 0; j <= nx; ++j) w[j] = plan.dx * table.value(m, j);
        det_rows[m - 1] = std::move(w);
    }

    plan.L = plan.periodic ? static_cast<std::size_t>(nx) : next_pow2(2 * nx);
    const bool use_fft = is_pow2(plan.L);
    if (!use_fft) plan.L = 0;

    auto assemble = [&](const std::vector<double>& row) {
        return plan.periodic ? fold_periodic(row, nx)
                             : (use_fft ? embed_padded(row, nx, plan.L) : row);
    };

    // deterministic fields, levels 0..nt
    plan.det_field.assign(static_cast<std::size_t>(nt + 1) * nx, 0.0);
    for (int j = 0; j < nx; ++j) plan.det_field[j] = u0[j];
    bool u0_constant = true;
    for (int j = 1; j < nx; ++j)
        if (u0[j] != u0[0]) u0_constant = false;
    if (plan.periodic && u0_constant) {
        // a constant field is exactly preserved by the unit-mass rows
        for (int m = 1; m <= nt; ++m)
            for (int j = 0; j < nx; ++j)
                plan.det_field[static_cast<std::size_t>(m) * nx + j] = u0[0];
        if (use_fft) {
            plan.noise_hat.resize(nt);
            for (int m = 1; m <= nt; ++m)
                plan.noise_hat[m - 1] = fft_of_real(assemble(noise_rows[m - 1]), plan.L);
        } else {
            plan.noise_kern.resize(nt);
            for (int m = 1; m <= nt; ++m)
                plan.noise_kern[m - 1] = fold_periodic(noise_rows[m - 1], nx);
        }
        return plan;
    }
    if (use_fft) {
        std::vector<cd> u0_hat = fft_of_real(u0, plan.L);
        plan.noise_hat.resize(nt);
        for (int m = 1; m <= nt; ++m) {
            std::vector<double> dk = assemble(det_rows[m - 1]);
            double norm = std::accumulate(dk.begin(), dk.end(), 0.0);
            for (double& v : dk) v /= norm;
            std::vector<cd> dk_hat = fft_of_real(dk, plan.L);
            for (std::size_t i = 0; i < plan.L; ++i) dk_hat[i] *= u0_hat[i];
            fft(dk_hat, true);
            for (int j = 0; j < nx; ++j)
                plan.det_field[static_cast<std::size_t>(m) * nx + j] = dk_hat[j].real();
            plan.noise_hat[m - 1] = fft_of_real(assemble(noise_rows[m - 1]), plan.L);
        }
    } else {
        plan.noise_kern.resize(nt);
        for (int m = 1; m <= nt; ++m) {
            // direct path: periodic uses folded circular kernels, zero-padded
            // keeps the symmetric offset row
            std::vector<double> dk = plan.periodic ? fold_periodic(det_rows[m - 1], nx)
                                                   : det_rows[m - 1];
            double norm;
            if (plan.periodic) {
                norm = std::accumulate(dk.begin(), dk.end(), 0.0);
            } else {
                norm = dk[0];
                for (int j = 1; j <= nx; ++j) norm += 2.0 * dk[j];
            }
            for (int j = 0; j < nx; ++j) {
                double acc = 0.0;
                if (plan.periodic) {
                    for (int k = 0; k < nx; ++k) acc += dk[(j - k + nx) % nx] * u0[k];
                } else {
                    for (int k = 0; k < nx; ++k) acc += dk[std::abs(j - k)] * u0[k];
                }
                plan.det_field[static_cast<std::size_t>(m) * nx + j] = acc / norm;
            }
            plan.noise_kern[m - 1] = plan.periodic ? fold_periodic(noise_rows[m - 1], nx)
                                                   : noise_rows[m - 1];
        }
    }
    return plan;
}

// One replica, time-major; writes (nt+1) x nx field values into slab.
void run_replica(const SimPlan& plan, std::uint64_t stream_seed, double* slab) {
    NormalRng rng(stream_seed);
    const int nx = plan.nx, nt = plan.nt;
    const NonlinearitySpec& sigma = *plan.sigma;
    for (int j = 0; j < nx; ++j) slab[j] = plan.det_field[j];
    if (plan.L != 0) {
        const std::size_t L = plan.L;
        std::vector<std::vector<cd>> z_hat(nt);
        std::vector<cd> acc(L), z(L);
        for (int l = 0; l < nt; ++l) {
            const double* ul = slab + static_cast<std::size_t>(l) * nx;
            std::fill(z.begin(), z.end(), cd(0.0, 0.0));
            for (int k = 0; k < nx; ++k)
                z[k] = cd(sigma(ul[k]) * rng.normal() * plan.noise_amp, 0.0);
            fft(z, false);
            z_hat[l] = z;
            std::fill(acc.begin(), acc.end(), cd(0.0, 0.0));
            for (int l2 = 0; l2 <= l; ++l2) {
                const std::vector<cd>& w = plan.noise_hat[l - l2];
                const std::vector<cd>& zh = z_hat[l2];
                for (std::size_t i = 0; i < L; ++i) acc[i] += w[i] * zh[i];
            }
            fft(acc, true);
            double* un = slab + static_cast<std::size_t>(l + 1) * nx;
            const double* det = plan.det_field.data() + static_cast<std::size_t>(l + 1) * nx;
            for (int j = 0; j < nx; ++j) un[j] = det[j] + acc[j].real();
        }
    } else {
        std::vector<std::vector<double>> zs(nt, std::vector<double>(nx));
        for (int l = 0; l < nt; ++l) {
            const double* ul = slab + static_cast<std::size_t>(l) * nx;
            for (int k = 0; k < nx; ++k) zs[l][k] = sigma(ul[k]) * rng.normal() * plan.noise_amp;
            double* un = slab + static_cast<std::size_t>(l + 1) * nx;
            const double* det = plan.det_field.data() + static_cast<std::size_t>(l + 1) * nx;
            for (int j = 0; j < nx; ++j) {
                double acc = 0.0;
                for (int l2 = 0; l2 <= l; ++l2) {
                    const std::vector<double>& w = plan.noise_kern[l - l2];
                    if (plan.periodic) {
                        for (int k = 0; k < nx; ++k) acc += w[(j - k + nx) % nx] * zs[l2][k];
                    } else {
                        for (int k = 0; k < nx; ++k) acc += w[std::abs(j - k)] * zs[l2][k];
                    }
                }
                un[j] = det[j] + acc;
            }
        }
    }
}

}  // namespace

FieldEnsemble simulate(const ModelParams& params, const SpaceTimeGrid& grid,
                       const std::vector<double>& u0, const NonlinearitySpec& sigma,
                       std::uint64_t seed, int replicas, const SimOptions& opts) {
    params.require_simulation();
    grid.validate();
    sigma.validate();
    if (static_cast<int>(u0.size()) != grid.nx)
        throw domain_error("simulate: u0 must have one sample per spatial cell");
    for (double v : u0)
        if (!std::isfinite(v)) throw domain_error("simulate: u0 must be bounded");
    if (replicas < 1) throw domain_error("simulate: replicas must be positive");

    SimPlan plan = build_plan(params, grid, u0, sigma);

    FieldEnsemble e;
    e.params = params;
    e.grid = grid;
    e.sigma = sigma;
    e.u0 = u0;
    e.seed = seed;
    e.replicas = replicas;
    e.n_blocks = std::min(opts.n_blocks, replicas);
    if (e.n_blocks < 1) e.n_blocks = 1;
    const std::size_t cells = e.cells();
    e.sum_u.assign(cells, 0.0);
    e.sum_p2.assign(cells, 0.0);
    e.sum_p4.assign(cells, 0.0);
    e.sum_p6.assign(cells, 0.0);
    e.sum_p8.assign(cells, 0.0);
    e.sum_p12.assign(cells, 0.0);
    e.block_p2.assign(static_cast<std::size_t>(e.n_blocks) * cells, 0.0);
    e.has_fields = opts.keep_fields;
    if (e.has_fields) e.fields.assign(static_cast<std::size_t>(replicas) * cells, 0.0);

    std::size_t window = std::max<std::size_t>(2 * worker_count(), 8);
    window = std::min<std::size_t>(window, replicas);
    const std::size_t mem_cap = (std::size_t{1} << 27) / (8 * cells);
    window = std::max<std::size_t>(1, std::min(window, std::max<std::size_t>(mem_cap, 1)));
    std::vector<double> slabs(window * cells);

    for (int start = 0; start < replicas; start += static_cast<int>(window)) {
        const int count = std::min<int>(static_cast<int>(window), replicas - start);
        parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
            run_replica(plan, mix_seed(seed, start + static_cast<int>(i)), slabs.data() + i * cells);
        });
        // accumulate in replica-index order: results do not depend on the
        // thread schedule
        for (int i = 0; i < count; ++i) {
            const double* slab = slabs.data() + static_cast<std::size_t>(i) * cells;
            const int r = start + i;
            const int b = e.block_of(r);
            double* bp2 = e.block_p2.data() + static_cast<std::size_t>(b) * cells;
            for (std::size_t c = 0; c < cells; ++c) {
                const double u = slab[c];
                const double u2 = u * u;
                const double u4 = u2 * u2;
                const double u6 = u4 * u2;
                e.sum_u[c] += u;
                e.sum_p2[c] += u2;
                e.sum_p4[c] += u4;
                e.sum_p6[c] += u6;
                e.sum_p8[c] += u4 * u4;
                e.sum_p12[c] += u6 * u6;
                bp2[c] += u2;
            }
            if (e.has_fields)
                std::copy(slab, slab + cells, e.fields.begin() + static_cast<std::size_t>(r) * cells);
        }
    }
    return e;
}

namespace {

std::size_t grid_index(const FieldEnsemble& e, int level, int cell) {
    if (level < 0 || level > e.grid.nt || cell < 0 || cell >= e.grid.nx)
        throw domain_error("ensemble index out of range");
    return static_cast<std::size_t>(level) * e.grid.nx + cell;
}

}  // namespace

MomentPoint estimate_moment(const FieldEnsemble& e, int p, int level, int cell) {
    const std::size_t idx = grid_index(e, level, cell);
    const std::vector<double>* sum = nullptr;
    const std::vector<double>* sum_sq = nullptr;
    switch (p) {
        case 2: sum = &e.sum_p2; sum_sq = &e.sum_p4; break;
        case 4: sum = &e.sum_p4; sum_sq = &e.sum_p8; break;
        case 6: sum = &e.sum_p6; sum_sq = &e.sum_p12; break;
        default: throw domain_error("estimate_moment: p must be one of {2, 4, 6}");
    }
    MomentPoint m;
    m.t = level * e.grid.dt();
    m.x = e.grid.cell_center(cell);
    m.p = p;
    m.replicas = e.replicas;
    m.estimate = (*sum)[idx] / e.replicas;
    m.stderr_ = se_of_mean((*sum)[idx], (*sum_sq)[idx], e.replicas);
    return m;
}

MomentPoint estimate_region_moment2(const FieldEnsemble& e, int level, int cell_lo, int cell_hi) {
    if (cell_hi < cell_lo) throw domain_error("estimate_region_moment2: empty region");
    grid_index(e, level, cell_lo);
    grid_index(e, level, cell_hi);
    const int n_cells = cell_hi - cell_lo + 1;
    MomentPoint m;
    m.t = level * e.grid.dt();
    m.x = 0.5 * (e.grid.cell_center(cell_lo) + e.grid.cell_center(cell_hi));
    m.p = 2;
    m.replicas = e.replicas;
    double total = 0.0;
    for (int c = cell_lo; c <= cell_hi; ++c) total += e.sum_p2[grid_index(e, level, c)];
    m.estimate = total / (e.replicas * static_cast<double>(n_cells));
    // delete-one-block jackknife over replicas
    const int B = e.n_blocks;
    std::vector<double> block_tot(B, 0.0), block_n(B, 0.0);
    for (int b = 0; b < B; ++b)
        for (int c = cell_lo; c <= cell_hi; ++c)
            block_tot[b] += e.block_p2[static_cast<std::size_t>(b) * e.cells() +
                                       grid_index(e, level, c)];
    for (int r = 0; r < e.replicas; ++r) block_n[e.block_of(r)] += 1.0;
    double jk_mean = 0.0;
    std::vector<double> loo(B);
    for (int b = 0; b < B; ++b) {
        loo[b] = (total - block_tot[b]) / ((e.replicas - block_n[b]) * n_cells);
        jk_mean += loo[b];
    }
    jk_mean /= B;
    double ss = 0.0;
    for (int b = 0; b < B; ++b) ss += (loo[b] - jk_mean) * (loo[b] - jk_mean);
    m.stderr_ = std::sqrt((B - 1.0) / B * ss);
    return m;
}

MomentCurve moment_curve(const FieldEnsemble& e, int p, int cell) {
    MomentCurve c;
    c.p = p;
    for (int level = 0; level <= e.grid.nt; ++level)
        c.points.push_back(estimate_moment(e, p, level, cell));
    return c;
}

std::vector<double> second_moment_renewal(const ModelParams& params, double lambda,
                                          double u0_const, const std::vector<double>& t_grid) {
    params.require_simulation();
    if (t_grid.empty()) throw domain_error("second_moment_renewal: empty grid");
    const double theta = params.beta * params.d / params.alpha;
    const double b = c_star(params) * lambda * lambda;
    const double a0 = u0_const * u0_const;
    if (b == 0.0) return std::vector<double>(t_grid.size(), a0);
    // refined uniform solve, sampled back at the requested times
    const double T = t_grid.back();
    const int refine = 8;
    double dt_req = t_grid[0];
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        dt_req = std::min(dt_req, t_grid[i] - t_grid[i - 1]);
    const double dt = dt_req / refine;
    const std::size_t n = static_cast<std::size_t>(std::llround(T / dt));
    RenewalProblem rp;
    rp.a = Forcing::constant(a0);
    rp.b = b;
    rp.theta = theta;
    rp.t_grid.resize(n);
    for (std::size_t i = 0; i < n; ++i) rp.t_grid[i] = (i + 1.0) * dt;
    RenewalSolution sol = solve_renewal(rp);
    std::vector<double> out(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        double pos = t_grid[i] / dt;
        std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(pos), n - 1);
        if (k == 0) k = 1;
        double f_lo = sol.f[k - 1], f_hi = sol.f[std::min(k, n - 1)];
        double t_lo = sol.t[k - 1], t_hi = sol.t[std::min(k, n - 1)];
        out[i] = (t_hi > t_lo) ? f_lo + (f_hi - f_lo) * (t_grid[i] - t_lo) / (t_hi - t_lo) : f_lo;
    }
    return out;
}

std::vector<double> second_moment_renewal(const ModelParams& params,
                                          const NonlinearitySpec& sigma,
                                          const std::vector<double>& u0,
                                          const std::vector<double>& t_grid) {
    if (sigma.kind != NonlinearitySpec::Kind::Linear)
        throw unsupported_error("second_moment_renewal: requires linear sigma(u) = lambda u");
    if (u0.empty()) throw domain_error("second_moment_renewal: empty u0");
    for (double v : u0)
        if (v != u0.front())
            throw unsupported_error("second_moment_renewal: requires constant u0");
    return second_moment_renewal(params, sigma.lambda, u0.front(), t_grid);
}

MomentPoint estimate_mean(const FieldEnsemble& e, int level, int cell) {
    const std::size_t idx = grid_index(e, level, cell);
    MomentPoint m;
    m.t = level * e.grid.dt();
    m.x = e.grid.cell_center(cell);
    m.p = 1;
    m.replicas = e.replicas;
    m.estimate = e.sum_u[idx] / e.replicas;
    m.stderr_ = se_of_mean(e.sum_u[idx], e.sum_p2[idx], e.replicas);
    return m;
}

LyapunovEstimate estimate_lyapunov(const MomentCurve& curve, double t_lo, double t_hi) {
    auto fit = [&](double lo) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (const auto& pt : curve.points) {
            if (pt.t < lo || pt.t > t_hi) continue;
            if (!(pt.estimate > 0.0))
                throw accuracy_error("estimate_lyapunov: nonpositive moment estimate in window",
                                     pt.estimate, std::numeric_limits<double>::infinity());
            double y = std::log(pt.estimate);
            sx += pt.t; sy += y; sxx += pt.t * pt.t; sxy += pt.t * y;
            ++n;
        }
        if (n < 2) throw domain_error("estimate_lyapunov: too few points in window");
        double denom = n * sxx - sx * sx;
        return std::pair<double, int>((n * sxy - sx * sy) / denom, n);
    };
    auto [slope, n] = fit(t_lo);
    if (n < 5) throw domain_error("estimate_lyapunov: need at least 5 points in the window");
    auto [slope_half, n2] = fit(0.5 * (t_lo + t_hi));
    (void)n2;
    LyapunovEstimate out;
    out.rate = slope;
    out.window_sensitivity = std::abs(slope - slope_half);
    out.points_used = n;
    return out;
}

double lower_bound_rate(const ModelParams& params, double l_sigma) {
    params.require_l2();
    const double theta = params.beta * params.d / params.alpha;
    if (!(theta < 1.0)) throw domain_error("lower_bound_rate: requires beta d / alpha < 1");
    if (!(l_sigma >= 0.0)) throw domain_error("lower_bound_rate: L_sigma must be nonnegative");
    if (l_sigma == 0.0) return 0.0;
    double base = c_star(params) * l_sigma * l_sigma * std::tgamma(1.0 - theta);
    return std::pow(base, 1.0 / (1.0 - theta));
}

double weighted_norm(const FieldEnsemble& e, double gamma, double c) {
    if (!(gamma > 0.0)) throw domain_error("weighted_norm: gamma must be positive");
    double best = 0.0;
    for (int level = 0; level <= e.grid.nt; ++level) {
        double t = level * e.grid.dt();
        for (int j = 0; j < e.grid.nx; ++j) {
            double v = std::exp(-gamma * t + c * e.grid.cell_center(j)) *
                       mean2_at(e, grid_index(e, level, j));
            best = std::max(best, v);
        }
    }
    return std::sqrt(best);
}

double weighted_young_constant(double beta, double nu, double c, double gamma) {
    if (!(beta > 0.0) || !(beta <= 1.0))
        throw domain_error("weighted_young_constant: beta must lie in (0, 1]");
    if (!(nu > 0.0) || !(gamma > 0.0))
        throw domain_error("weighted_young_constant: nu and gamma must be positive");
    const double geom = nu * c * c * std::pow(gamma, -beta);
    if (!(geom < 1.0))
        throw domain_error("weighted_young_constant: series diverges unless gamma^beta > nu c^2");
    double lead = std::pow(2.0, 0.5 * beta - 1.0) /
                  (std::sqrt(nu) * std::tgamma(1.0 - 0.5 * beta) * std::pow(gamma, 1.0 - 0.5 * beta));
    return std::sqrt(lead / (1.0 - geom));
}

FrontBounds front_bounds(const ModelParams& params, const NonlinearitySpec& sigma) {
    params.validate();
    if (params.d != 1 || params.alpha != 2.0)
        throw unsupported_error("front_bounds: requires d = 1, alpha = 2");
    if (!(sigma.lip_sigma > 0.0)) throw domain_error("front_bounds: requires Lip_sigma > 0");
    const double beta = params.beta;
    FrontBounds fb;
    fb.c0 = std::sqrt(std::pow(2.0, 0.5 * beta + 0.5 - 1.0 / beta) /
                      (std::pow(params.nu, 1.0 / beta) * std::tgamma(1.0 - 0.5 * beta)));
    const double lc = sigma.lip_sigma * fb.c0;
    fb.theta_threshold = std::pow(2.0, 1.0 / beta) * std::pow(lc, 4.0 / (2.0 - beta)) /
                         std::pow(lc, 2.0 * beta / (2.0 - beta));
    return fb;
}

namespace {

// sup over {|x| > theta t} of the leave-block-out (or full) second-moment
// mean at one level; returns false if the region is empty.
bool region_sup(const FieldEnsemble& e, double theta, int level, int skip_block,
                double block_n_skipped, double* out) {
    const double t = level * e.grid.dt();
    double best = -1.0;
    const std::size_t cells = e.cells();
    for (int j = 0; j < e.grid.nx; ++j) {
        if (std::abs(e.grid.cell_center(j)) <= theta * t) continue;
        std::size_t idx = grid_index(e, level, j);
        double s = e.sum_p2[idx];
        double n = e.replicas;
        if (skip_block >= 0) {
            s -= e.block_p2[static_cast<std::size_t>(skip_block) * cells + idx];
            n -= block_n_skipped;
        }
        best = std::max(best, s / n);
    }
    if (best < 0.0) return false;
    *out = best;
    return true;
}

std::vector<double> block_sizes(const FieldEnsemble& e) {
    std::vector<double> n(e.n_blocks, 0.0);
    for (int r = 0; r < e.replicas; ++r) n[e.block_of(r)] += 1.0;
    return n;
}

}  // namespace

FrontCurve estimate_front(const FieldEnsemble& e, double theta) {
    if (!(theta >= 0.0)) throw domain_error("estimate_front: theta must be nonnegative");
    if (!e.sigma.vanishes_at_zero())
        throw domain_error("estimate_front: requires sigma(0) = 0");
    FrontCurve out;
    out.theta = theta;
    const std::vector<double> bn = block_sizes(e);
    const int B = e.n_blocks;
    std::vector<std::vector<double>> loo_proxy(e.grid.nt + 1);
    for (int level = 1; level <= e.grid.nt; ++level) {
        const double t = level * e.grid.dt();
        double sup_full;
        if (!region_sup(e, theta, level, -1, 0.0, &sup_full))
            throw truncation_error("estimate_front: region {|x| > theta t} is empty on the grid");
        FrontPoint pt;
        pt.t = t;
        pt.proxy = std::log(std::max(sup_full, 1e-300)) / t;
        std::vector<double> loo(B);
        double jk_mean = 0.0;
        for (int b = 0; b < B; ++b) {
            double s;
            region_sup(e, theta, level, b, bn[b], &s);
            loo[b] = std::log(std::max(s, 1e-300)) / t;
            jk_mean += loo[b];
        }
        jk_mean /= B;
        double ss = 0.0;
        for (int b = 0; b < B; ++b) ss += (loo[b] - jk_mean) * (loo[b] - jk_mean);
        pt.stderr_ = std::sqrt((B - 1.0) / B * ss);
        loo_proxy[level] = std::move(loo);
        out.points.push_back(pt);
    }
    // final-window average (last half of the reported times) with jackknife
    const double t_lo = 0.5 * e.grid.t_max;
    double acc = 0.0;
    int n_win = 0;
    std::vector<double> loo_win(B, 0.0);
    for (int level = 1; level <= e.grid.nt; ++level) {
        double t = level * e.grid.dt();
        if (t < t_lo) continue;
        acc += out.points[level - 1].proxy;
        for (int b = 0; b < B; ++b) loo_win[b] += loo_proxy[level][b];
        ++n_win;
    }
    out.window_average = acc / n_win;
    double jk_mean = 0.0;
    for (int b = 0; b < B; ++b) {
        loo_win[b] /= n_win;
        jk_mean += loo_win[b];
    }
    jk_mean /= B;
    double ss = 0.0;
    for (int b = 0; b < B; ++b) ss += (loo_win[b] - jk_mean) * (loo_win[b] - jk_mean);
    out.window_stderr = std::sqrt((B - 1.0) / B * ss);
    return out;
}

void front_proxy_difference(const FieldEnsemble& e, double theta_small, double theta_large,
                            double* diff, double* diff_stderr) {
    const std::vector<double> bn = block_sizes(e);
    const int B = e.n_blocks;
    const double t_lo = 0.5 * e.grid.t_max;
    auto window_avg = [&](double theta, int skip_block) {
        double acc = 0.0;
        int n = 0;
        for (int level = 1; level <= e.grid.nt; ++level) {
            double t = level * e.grid.dt();
            if (t < t_lo) continue;
            double s;
            if (!region_sup(e, theta, level, skip_block, skip_block >= 0 ? bn[skip_block] : 0.0,
                            &s))
                throw truncation_error("front_proxy_difference: empty region");
            acc += std::log(std::max(s, 1e-300)) / t;
            ++n;
        }
        return acc / n;
    };
    *diff = window_avg(theta_small, -1) - window_avg(theta_large, -1);
    std::vector<double> loo(B);
    double jk_mean = 0.0;
    for (int b = 0; b < B; ++b) {
        loo[b] = window_avg(theta_small, b) - window_avg(theta_large, b);
        jk_mean += loo[b];
    }
    jk_mean /= B;
    double ss = 0.0;
    for (int b = 0; b < B; ++b) ss += (loo[b] - jk_mean) * (loo[b] - jk_mean);
    *diff_stderr = std::sqrt((B - 1.0) / B * ss);
}

EnvelopeReport envelope_check(const FieldEnsemble& e, double c, double a_fit) {
    if (!e.sigma.vanishes_at_zero())
        throw domain_error("envelope_check: requires sigma(0) = 0");
    const ModelParams& p = e.params;
    if (p.d != 1 || p.alpha != 2.0)
        throw unsupported_error("envelope_check: requires d = 1, alpha = 2");
    EnvelopeReport rep;
    rep.c = c;
    const double c0 = std::sqrt(std::pow(2.0, 0.5 * p.beta + 0.5 - 1.0 / p.beta) /
                                (std::pow(p.nu, 1.0 / p.beta) * std::tgamma(1.0 - 0.5 * p.beta)));
    rep.admissible_c_min =
        std::pow(e.sigma.lip_sigma * c0, 2.0 * p.beta / (2.0 - p.beta));
    if (e.sigma.lip_sigma == 0.0) rep.admissible_c_min = 0.0;
    if (!(c > rep.admissible_c_min)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "envelope_check: c = %.6g is below the admissibility threshold %.6g",
                      c, rep.admissible_c_min);
        throw domain_error(buf);
    }
    rep.growth_rate = std::pow(2.0 * p.nu * c * c, 1.0 / p.beta);
    if (!std::isfinite(a_fit)) {
        a_fit = 0.0;
        for (int j = 0; j < e.grid.nx; ++j)
            a_fit = std::max(a_fit, e.u0[j] * e.u0[j] * std::exp(c * std::abs(e.grid.cell_center(j))));
    }
    rep.a_fit = a_fit;
    for (int level = 0; level <= e.grid.nt; ++level) {
        const double t = level * e.grid.dt();
        for (int j = 0; j < e.grid.nx; ++j) {
            MomentPoint m = estimate_moment(e, 2, level, j);
            double env = a_fit * std::exp(-c * std::abs(m.x) + rep.growth_rate * t);
            ++rep.cells_checked;
            if (m.estimate - 3.0 * m.stderr_ > env) ++rep.violations;
        }
    }
    rep.fraction_ok = 1.0 - static_cast<double>(rep.violations) / rep.cells_checked;
    return rep;
}

EnergyReport l2_energy_check(const FieldEnsemble& e, double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw domain_error("l2_energy_check: epsilon must lie in (0, 1)");
    const ModelParams& p = e.params;
    const double theta = p.beta * p.d / p.alpha;
    EnergyReport rep;
    rep.rate = std::pow(c_star(p) * std::tgamma(1.0 - theta) * e.sigma.lip_sigma *
                            e.sigma.lip_sigma / (1.0 - epsilon),
                        1.0 / (1.0 - theta));
    const double dx = e.grid.dx();
    double u0_norm2 = 0.0;
    for (double v : e.u0) u0_norm2 += v * v * dx;
    const std::vector<double> bn = block_sizes(e);
    const int B = e.n_blocks;
    const std::size_t cells = e.cells();
    for (int level = 0; level <= e.grid.nt; ++level) {
        const double t = level * e.grid.dt();
        double total = 0.0;
        for (int j = 0; j < e.grid.nx; ++j) total += e.sum_p2[grid_index(e, level, j)];
        double energy = dx * total / e.replicas;
        std::vector<double> loo(B);
        double jk_mean = 0.0;
        for (int b = 0; b < B; ++b) {
            double bs = 0.0;
            for (int j = 0; j < e.grid.nx; ++j)
                bs += e.block_p2[static_cast<std::size_t>(b) * cells + grid_index(e, level, j)];
            loo[b] = dx * (total - bs) / (e.replicas - bn[b]);
            jk_mean += loo[b];
        }
        jk_mean /= B;
        double ss = 0.0;
        for (int b = 0; b < B; ++b) ss += (loo[b] - jk_mean) * (loo[b] - jk_mean);
        double se = std::sqrt((B - 1.0) / B * ss);
        double bound = u0_norm2 / epsilon * std::exp(rep.rate * t);
        rep.t.push_back(t);
        rep.energy.push_back(energy);
        rep.energy_stderr.push_back(se);
        rep.bound.push_back(bound);
        if (energy - 3.0 * se > bound) rep.pass = false;
    }
    return rep;
}

ConvexityReport convexity_diagnostic(const std::vector<double>& k, const std::vector<double>& eta,
                                     const std::vector<double>& eta_stderr) {
    if (k.size() != eta.size() || k.size() != eta_stderr.size() || k.size() < 3)
        throw domain_error("convexity_diagnostic: need >= 3 matched (k, eta, stderr) triples");
    ConvexityReport rep;
    rep.k = k;
    rep.eta = eta;
    rep.eta_stderr = eta_stderr;
    for (std::size_t i = 1; i + 1 < k.size(); ++i) {
        // second difference on a possibly non-uniform k grid
        double h0 = k[i] - k[i - 1], h1 = k[i + 1] - k[i];
        double d2 = (eta[i + 1] - eta[i]) / h1 - (eta[i] - eta[i - 1]) / h0;
        double se = std::sqrt(eta_stderr[i + 1] * eta_stderr[i + 1] / (h1 * h1) +
                              eta_stderr[i - 1] * eta_stderr[i - 1] / (h0 * h0) +
                              eta_stderr[i] * eta_stderr[i] * std::pow(1.0 / h0 + 1.0 / h1, 2.0));
        if (d2 < -3.0 * se) rep.convex_ok = false;
    }
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
        double r0 = eta[i] / k[i], r1 = eta[i + 1] / k[i + 1];
        double se = std::sqrt(std::pow(eta_stderr[i] / k[i], 2.0) +
                              std::pow(eta_stderr[i + 1] / k[i + 1], 2.0));
        if (r1 < r0 - 3.0 * se) rep.ratio_nondecreasing_ok = false;
        if (r1 - r0 <= 3.0 * se) rep.strict = false;
    }
    return rep;
}

void write_moments_csv(const FieldEnsemble& e, const std::vector<int>& orders,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_moments_csv: cannot open " + path);
    out << "t,x,p,estimate,stderr,replicas,seed\n";
    char buf[192];
    for (int p : orders) {
        for (int level = 0; level <= e.grid.nt; ++level) {
            for (int j = 0; j < e.grid.nx; ++j) {
                MomentPoint m = estimate_moment(e, p, level, j);
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%.17g,%.17g,%d,%llu\n", m.t, m.x,
                              p, m.estimate, m.stderr_, e.replicas,
                              static_cast<unsigned long long>(e.seed));
                out << buf;
            }
        }
    }
}

}  // namespace fracspde
