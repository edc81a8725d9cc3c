#include "lab/chaos.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "lab/errors.hpp"
#include "lab/partition.hpp"
#include "lab/rng.hpp"
#include "lab/stats.hpp"

namespace lab {
namespace {

// Adaptive Simpson (same scheme as the renewal tail integral, local copy to
// keep the translation units independent).
template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
         + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

// J_j(s) = int_0^s g^{a-1} J_{j-1}(s-g) dg with J_0 == 1, via the
// substitution v = g^a that removes the endpoint singularity.
double nested_gap_integral(int level, double s, double a, double tol);

double nested_gap_integrand(int level, double v, double s, double a, double tol) {
    const double g = std::pow(v, 1.0 / a);
    return nested_gap_integral(level - 1, s - g, a, tol);
}

double nested_gap_integral(int level, double s, double a, double tol) {
    if (level == 0) return 1.0;
    if (s <= 0.0) return 0.0;
    if (level == 1) return std::pow(s, a) / a;
    const double v_hi = std::pow(s, a);
    const auto f = [&](double v) { return nested_gap_integrand(level, v, s, a, tol * 4.0); };
    return adaptive_simpson(f, 0.0, v_hi, tol * v_hi) / a;
}

} // namespace

// ------------------------------------------------ exhaustive expansions

double chaos_oracle_pinning(const RenewalLaw& law, std::span<const double> eta) {
    const std::int64_t n = static_cast<std::int64_t>(eta.size());
    if (n > 16) throw resource_error("chaos_oracle_pinning: N <= 16 (2^N subsets)");
    const auto u = law.renewal_mass(n);
    double total = 1.0;
    const std::uint32_t masks = static_cast<std::uint32_t>(1) << n;
    for (std::uint32_t mask = 1; mask < masks; ++mask) {
        double prod = 1.0;
        std::int64_t prev = 0;
        std::uint32_t bits = mask;
        while (bits != 0) {
            const int site = std::countr_zero(bits) + 1;
            bits &= bits - 1;
            prod *= u[static_cast<std::size_t>(site - prev)] * eta[static_cast<std::size_t>(site - 1)];
            prev = site;
        }
        total += prod;
    }
    return total;
}

double chaos_oracle_polymer(const WalkLaw& walk, std::int64_t n,
                            const std::function<double(std::int64_t, std::int64_t)>& eta) {
    if (walk.family != WalkFamily::ssrw_1d)
        throw validation_error("chaos_oracle_polymer: implemented for the 1d simple walk");
    if (n > 12) throw resource_error("chaos_oracle_polymer: N <= 12 (2^N time subsets)");

    // exact kernels q_d(x) for every gap d <= n
    std::vector<KernelColumn> kernels;
    kernels.reserve(static_cast<std::size_t>(n));
    for (std::int64_t d = 1; d <= n; ++d) kernels.push_back(kernel_column(walk, d, 1e-9));

    const std::int64_t w = n;
    const std::int64_t side = 2 * w + 1;
    std::vector<double> cur(static_cast<std::size_t>(side)), next(static_cast<std::size_t>(side));

    double total = 1.0;
    const std::uint32_t masks = static_cast<std::uint32_t>(1) << n;
    for (std::uint32_t mask = 1; mask < masks; ++mask) {
        std::fill(cur.begin(), cur.end(), 0.0);
        cur[static_cast<std::size_t>(w)] = 1.0; // position 0 at time 0
        std::int64_t prev_time = 0;
        std::uint32_t bits = mask;
        while (bits != 0) {
            const std::int64_t time = std::countr_zero(bits) + 1;
            bits &= bits - 1;
            const KernelColumn& q = kernels[static_cast<std::size_t>(time - prev_time - 1)];
            std::fill(next.begin(), next.end(), 0.0);
            for (std::int64_t x = -w; x <= w; ++x) {
                double s = 0.0;
                for (std::int64_t y = -w; y <= w; ++y) {
                    const double qv = q.at(x - y);
                    if (qv != 0.0) s += cur[static_cast<std::size_t>(y + w)] * qv;
                }
                next[static_cast<std::size_t>(x + w)] = s * eta(time, x);
            }
            std::swap(cur, next);
            prev_time = time;
        }
        double chain = 0.0;
        for (double v : cur) chain += v;
        total += chain;
    }
    return total;
}

// ------------------------------------------------ continuum kernels

double ContinuumKernel::c_alpha() const {
    return alpha * std::sin(M_PI * alpha) / M_PI;
}

ContinuumKernel pinning_kernel_alpha(double alpha) {
    if (!(alpha > 0.5) || !(alpha < 1.0))
        throw validation_error("continuum kernel: alpha branch requires alpha in (1/2, 1)");
    ContinuumKernel k;
    k.alpha_branch = true;
    k.alpha = alpha;
    k.constant = k.c_alpha();
    return k;
}

ContinuumKernel pinning_kernel_for_law(const RenewalLaw& law) {
    if (law.alpha > 1.0) return pinning_kernel_finite_mean(law.mean_interarrival);
    if (law.slowly_varying != SlowlyVarying::constant_one)
        throw validation_error("pinning_kernel_for_law: alpha branch requires L == 1");
    ContinuumKernel k = pinning_kernel_alpha(law.alpha);
    k.constant = k.c_alpha() * law.normalization;
    return k;
}

ContinuumKernel pinning_kernel_finite_mean(double m) {
    if (!(m > 0.0) || !std::isfinite(m))
        throw validation_error("continuum kernel: mean interarrival must be finite and > 0");
    ContinuumKernel k;
    k.alpha_branch = false;
    k.m = m;
    return k;
}

double continuum_kernel_psi(const ContinuumKernel& kernel, std::span<const double> times,
                            double t_horizon) {
    if (times.empty()) return 1.0;
    std::vector<double> ts(times.begin(), times.end());
    std::sort(ts.begin(), ts.end());
    if (ts.front() <= 0.0 || ts.back() >= t_horizon)
        throw validation_error("continuum_kernel_psi: times must lie strictly inside (0, t)");
    if (!kernel.alpha_branch)
        return std::pow(kernel.m, -static_cast<double>(ts.size()));
    const double c = kernel.constant;
    double value = 1.0;
    double prev = 0.0;
    for (double ti : ts) {
        const double gap = ti - prev;
        if (gap <= 0.0) throw validation_error("continuum_kernel_psi: coinciding times (singular kernel)");
        value *= c * std::pow(gap, kernel.alpha - 1.0);
        prev = ti;
    }
    return value;
}

SecondMomentResult chaos_second_moment(const ContinuumKernel& kernel, double beta_hat,
                                       double h_hat, double t, int k_max) {
    if (h_hat != 0.0)
        throw validation_error("chaos_second_moment: defined for h_hat = 0 (centered environment)");
    if (k_max < 1) throw validation_error("chaos_second_moment: k_max must be >= 1");
    if (kernel.alpha_branch && k_max > 3)
        throw validation_error("chaos_second_moment: alpha-branch quadrature is limited to k_max <= 3");

    SecondMomentResult res;
    res.terms.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
    res.terms[0] = 1.0;
    if (kernel.alpha_branch) {
        const double a = 2.0 * kernel.alpha - 1.0;
        const double c2 = kernel.constant * kernel.constant;
        for (int k = 1; k <= k_max; ++k) {
            const double simplex = nested_gap_integral(k, t, a, 1e-11);
            res.terms[static_cast<std::size_t>(k)] =
                std::pow(beta_hat * beta_hat * c2, k) * simplex;
        }
    } else {
        const double x = beta_hat * beta_hat * t / (kernel.m * kernel.m);
        double term = 1.0;
        for (int k = 1; k <= k_max; ++k) {
            term *= x / static_cast<double>(k); // simplex volume t^k/k! folded in
            res.terms[static_cast<std::size_t>(k)] = term;
        }
    }
    double value = 0.0;
    for (double v : res.terms) value += v;

    res.report.k_max = k_max;
    res.report.epsilon_margin = 0.0;
    const double last = res.terms[static_cast<std::size_t>(k_max)];
    const double prev = res.terms[static_cast<std::size_t>(k_max - 1)];
    const double rho = prev > 0.0 ? last / prev : 0.0;
    res.report.tail_bound = rho < 1.0 ? last * rho / (1.0 - rho)
                                      : std::numeric_limits<double>::infinity();
    res.value = value;
    return res;
}

double simulate_continuum_chaos(const ContinuumKernel& kernel, double beta_hat, double h_hat,
                                double t, double mesh, int k_max, SeedProvenance seed) {
    const std::int64_t cells = std::llround(t / mesh);
    if (cells < 4) throw validation_error("simulate_continuum_chaos: mesh too coarse");
    const double dt = t / static_cast<double>(cells);

    // mesh precondition: the k=1 term's L2 discretization error estimate,
    // from a mesh-doubling comparison, must be <= 1% of the term.
    if (kernel.alpha_branch) {
        const auto level_sum = [&](std::int64_t j_cells) {
            const double d = t / static_cast<double>(j_cells);
            double s = 0.0;
            for (std::int64_t j = 0; j < j_cells; ++j) {
                const double mid = (static_cast<double>(j) + 0.5) * d;
                const double psi = kernel.constant * std::pow(mid, kernel.alpha - 1.0);
                s += psi * psi * d;
            }
            return s;
        };
        const double s1 = level_sum(cells);
        const double s2 = level_sum(cells / 2);
        if (std::abs(s1 - s2) > 0.01 * s1)
            throw validation_error("simulate_continuum_chaos: mesh too coarse for the k=1 term ("
                                   + std::to_string(std::abs(s1 - s2) / s1) + " relative change on doubling)");
        if (static_cast<double>(cells) * static_cast<double>(cells) * k_max > 1e10)
            throw resource_error("simulate_continuum_chaos: alpha-branch transfer exceeds compute budget");
    }

    std::vector<double> xi(static_cast<std::size_t>(cells));
    const double sqrt_dt = std::sqrt(dt);
    for (std::int64_t j = 0; j < cells; ++j) {
        const double w = sqrt_dt * rng::gaussian(seed.master, seed.stream, static_cast<std::uint64_t>(j));
        xi[static_cast<std::size_t>(j)] = beta_hat * w + h_hat * dt;
    }

    if (!kernel.alpha_branch) {
        // constant kernel m^{-k}: the ordered sum over distinct cells is the
        // elementary symmetric polynomial in xi/m
        std::vector<double> e(static_cast<std::size_t>(k_max) + 1, 0.0);
        e[0] = 1.0;
        for (std::int64_t j = 0; j < cells; ++j) {
            const double v = xi[static_cast<std::size_t>(j)] / kernel.m;
            const int top = static_cast<int>(std::min<std::int64_t>(k_max, j + 1));
            for (int k = top; k >= 1; --k)
                e[static_cast<std::size_t>(k)] += e[static_cast<std::size_t>(k - 1)] * v;
        }
        double z = 0.0;
        for (double v : e) z += v;
        return z;
    }

    // alpha branch: psi factorizes over gaps, so each chaos level is a
    // one-pass transfer over ordered cell pairs.
    const double c = kernel.constant;
    const double a1 = kernel.alpha - 1.0;
    std::vector<double> mid(static_cast<std::size_t>(cells));
    for (std::int64_t j = 0; j < cells; ++j)
        mid[static_cast<std::size_t>(j)] = (static_cast<double>(j) + 0.5) * dt;

    std::vector<double> level(static_cast<std::size_t>(cells));
    std::vector<double> next(static_cast<std::size_t>(cells));
    double z = 1.0;
    for (std::int64_t j = 0; j < cells; ++j) {
        level[static_cast<std::size_t>(j)] = c * std::pow(mid[static_cast<std::size_t>(j)], a1)
                                           * xi[static_cast<std::size_t>(j)];
        z += level[static_cast<std::size_t>(j)];
    }
    for (int k = 2; k <= k_max; ++k) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::int64_t j = 1; j < cells; ++j) {
            double s = 0.0;
            for (std::int64_t i = 0; i < j; ++i)
                s += level[static_cast<std::size_t>(i)]
                   * std::pow(mid[static_cast<std::size_t>(j)] - mid[static_cast<std::size_t>(i)], a1);
            next[static_cast<std::size_t>(j)] = c * xi[static_cast<std::size_t>(j)] * s;
        }
        std::swap(level, next);
        for (double v : level) z += v;
    }
    return z;
}

void batch_continuum_chaos(const ContinuumKernel& kernel, double beta_hat, double h_hat,
                           double t, double mesh, int k_max, std::int64_t replicas,
                           std::uint64_t master, std::uint64_t stream0,
                           std::span<double> out, Exec exec) {
    if (out.size() < static_cast<std::size_t>(replicas))
        throw validation_error("batch_continuum_chaos: output span too small");
    for_each_index(replicas, exec, [&](std::int64_t r) {
        out[static_cast<std::size_t>(r)] = simulate_continuum_chaos(
            kernel, beta_hat, h_hat, t, mesh, k_max,
            {master, stream0 + static_cast<std::uint64_t>(r)});
    });
}

// ------------------------------------------------ rescaled kernels

namespace {

double power_integral(double lo, double hi, double p) {
    // int_lo^hi s^p ds, p > -1
    return (std::pow(hi, p + 1.0) - std::pow(lo, p + 1.0)) / (p + 1.0);
}

} // namespace

double rescaled_correlation_error(const RenewalLaw& law, int k, std::int64_t n_sites) {
    if (k < 1 || k > 3) throw validation_error("rescaled_correlation_error: k must be in {1,2,3}");
    if (n_sites > law.n_max) throw validation_error("rescaled_correlation_error: N exceeds N_max");
    const bool finite_mean = law.alpha > 1.0;
    if (!finite_mean && !(law.alpha > 0.5 && law.alpha < 1.0))
        throw validation_error("rescaled_correlation_error: alpha in (1/2,1) or > 1");
    const double gamma = finite_mean ? 0.0 : 1.0 - law.alpha;
    const ContinuumKernel kernel = pinning_kernel_for_law(law);
    const auto u = law.renewal_mass(n_sites);
    const double n = static_cast<double>(n_sites);
    const double scale = std::pow(n, gamma); // delta^{-gamma}, delta = 1/N

    if (k == 1) {
        // exact cell integrals: cells ((j-1/2)/N, (j+1/2)/N], widened to the
        // domain ends for j = 1 and j = N
        double err2 = 0.0;
        for (std::int64_t j = 1; j <= n_sites; ++j) {
            const double lo = j == 1 ? 0.0 : (static_cast<double>(j) - 0.5) / n;
            const double hi = j == n_sites ? 1.0 : (static_cast<double>(j) + 0.5) / n;
            const double aj = scale * u[static_cast<std::size_t>(j)];
            if (finite_mean) {
                const double d = aj - 1.0 / kernel.m;
                err2 += d * d * (hi - lo);
            } else {
                const double c = kernel.constant;
                err2 += aj * aj * (hi - lo)
                      - 2.0 * aj * c * power_integral(lo, hi, law.alpha - 1.0)
                      + c * c * power_integral(lo, hi, 2.0 * law.alpha - 2.0);
            }
        }
        return std::sqrt(std::max(err2, 0.0));
    }

    // k = 2, 3: midpoint grid on the ordered sector, diagonal excluded,
    // symmetric extension by k!
    const std::int64_t grid_cap = k == 2 ? 2048 : 160;
    if (n_sites > grid_cap)
        throw resource_error("rescaled_correlation_error: N too large for k = " + std::to_string(k));
    const double cell = 1.0 / n;
    double err2 = 0.0;
    if (k == 2) {
        for (std::int64_t i = 1; i < n_sites; ++i) {
            for (std::int64_t j = i + 1; j <= n_sites; ++j) {
                const double discrete = scale * scale * u[static_cast<std::size_t>(i)]
                                      * u[static_cast<std::size_t>(j - i)];
                const double ts[2] = {static_cast<double>(i) / n, static_cast<double>(j) / n};
                const double cont = continuum_kernel_psi(kernel, {ts, 2}, 1.0 + 1e-12);
                const double d = discrete - cont;
                err2 += 2.0 * d * d * cell * cell;
            }
        }
    } else {
        for (std::int64_t i = 1; i < n_sites - 1; ++i)
            for (std::int64_t j = i + 1; j < n_sites; ++j)
                for (std::int64_t l = j + 1; l <= n_sites; ++l) {
                    const double discrete = scale * scale * scale * u[static_cast<std::size_t>(i)]
                                          * u[static_cast<std::size_t>(j - i)]
                                          * u[static_cast<std::size_t>(l - j)];
                    const double ts[3] = {static_cast<double>(i) / n, static_cast<double>(j) / n,
                                          static_cast<double>(l) / n};
                    const double cont = continuum_kernel_psi(kernel, {ts, 3}, 1.0 + 1e-12);
                    const double d = discrete - cont;
                    err2 += 6.0 * d * d * cell * cell * cell;
                }
    }
    return std::sqrt(err2);
}

double continuum_kernel_l2_distance(const ContinuumKernel& a, const ContinuumKernel& b,
                                    int k, std::int64_t grid) {
    if (k < 1 || k > 2) throw validation_error("continuum_kernel_l2_distance: k in {1,2}");
    const double n = static_cast<double>(grid);
    double err2 = 0.0;
    if (k == 1) {
        for (std::int64_t i = 1; i <= grid; ++i) {
            const double ts[1] = {(static_cast<double>(i) - 0.5) / n};
            const double d = continuum_kernel_psi(a, {ts, 1}, 1.0)
                           - continuum_kernel_psi(b, {ts, 1}, 1.0);
            err2 += d * d / n;
        }
    } else {
        for (std::int64_t i = 1; i < grid; ++i)
            for (std::int64_t j = i + 1; j <= grid; ++j) {
                const double ts[2] = {(static_cast<double>(i) - 0.5) / n,
                                      (static_cast<double>(j) - 0.5) / n};
                const double d = continuum_kernel_psi(a, {ts, 2}, 1.0)
                               - continuum_kernel_psi(b, {ts, 2}, 1.0);
                err2 += 2.0 * d * d / (n * n);
            }
    }
    return std::sqrt(err2);
}

// ------------------------------------------------ Lindeberg distance

double lindeberg_distance(const LindebergModel& model, const DisorderSpec& spec_a,
                          const DisorderSpec& spec_b, std::int64_t n, std::int64_t samples,
                          std::uint64_t master, Exec exec) {
    std::vector<double> log_z_a(static_cast<std::size_t>(samples));
    std::vector<double> log_z_b(static_cast<std::size_t>(samples));
    const std::int64_t horizon[1] = {n};

    // the two environments use disjoint stream ranges, so spec_a == spec_b
    // produces two independent same-law samples (a genuine two-sample null)
    const auto run = [&](const DisorderSpec& spec, std::uint64_t stream0, std::span<double> out) {
        if (model.kind == LindebergModel::Kind::pinning) {
            const double alpha = model.law->alpha;
            const double beta_n = alpha < 1.0
                ? model.beta_hat * std::pow(static_cast<double>(n), -(alpha - 0.5))
                : model.beta_hat / std::sqrt(static_cast<double>(n));
            PinningBatch batch;
            batch.law = model.law;
            batch.disorder = spec;
            batch.beta = beta_n;
            batch.h = -log_mgf(spec, beta_n);
            batch_pinning_log_z(batch, {horizon, 1}, samples, master, stream0, out, exec);
        } else {
            const double r_n = polymer_overlap(*model.walk, n);
            const double beta_n = model.beta_hat / std::sqrt(r_n);
            PolymerBatch batch;
            batch.walk = model.walk;
            batch.disorder = spec;
            batch.beta = beta_n;
            batch_polymer_log_z(batch, {horizon, 1}, samples, master, stream0, out, exec);
        }
    };
    run(spec_a, 0, log_z_a);
    run(spec_b, std::uint64_t(1) << 32, log_z_b);
    // KS is invariant under the strictly increasing exp(), so the distance
    // between the log Z samples equals the distance between the Z samples.
    return ks_statistic(std::span<const double>(log_z_a), std::span<const double>(log_z_b));
}

} // namespace lab
