#include "lab/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lab/errors.hpp"
#include "lab/lattice.hpp"
#include "lab/partition.hpp"
#include "lab/rng.hpp"

namespace lab {

LognormalLimit limit_lognormal_params(double beta_hat) {
    if (beta_hat < 0.0) throw validation_error("limit_lognormal_params: beta_hat must be >= 0");
    LognormalLimit lim;
    lim.beta_hat = beta_hat;
    if (beta_hat >= 1.0) {
        lim.degenerate = true;
        lim.sigma_sq = std::numeric_limits<double>::infinity();
    } else {
        // int_0^1 beta^2/(1 - beta^2 t) dt
        lim.sigma_sq = std::log(1.0 / (1.0 - beta_hat * beta_hat));
    }
    return lim;
}

double marginal_beta(double beta_hat, double overlap) {
    if (!(overlap > 0.0)) throw validation_error("marginal_beta: overlap must be > 0");
    return beta_hat / std::sqrt(overlap);
}

std::vector<MarginalScanRow> marginal_scan(const MarginalModel& model,
                                           std::span<const double> beta_hat_grid,
                                           std::span<const std::int64_t> n_grid,
                                           std::int64_t samples, std::uint64_t master, Exec exec) {
    if (beta_hat_grid.empty() || n_grid.empty())
        throw validation_error("marginal_scan: beta_hat_grid and N_grid must be nonempty");
    if (samples < 4) throw validation_error("marginal_scan: samples must be >= 4");

    const std::int64_t n_top = *std::max_element(n_grid.begin(), n_grid.end());
    if (model.kind == MarginalModel::Kind::pinning) model.law->renewal_mass(n_top);

    std::vector<MarginalScanRow> rows;
    std::vector<double> log_z(static_cast<std::size_t>(samples));

    for (std::size_t bi = 0; bi < beta_hat_grid.size(); ++bi) {
        const double beta_hat = beta_hat_grid[bi];
        const LognormalLimit limit = limit_lognormal_params(beta_hat);
        // one sub-master per beta_hat, shared across the N grid (common
        // random numbers along N)
        const std::uint64_t sub_master = rng::derive_key(master, 0x4d41524au ^ bi);
        for (const std::int64_t n : n_grid) {
            MarginalScanRow row;
            row.beta_hat = beta_hat;
            row.n = n;
            row.overlap = model.kind == MarginalModel::Kind::pinning
                              ? pinning_overlap(*model.law, n)
                              : polymer_overlap(*model.walk, n);
            row.beta_n = beta_hat == 0.0 ? 0.0 : marginal_beta(beta_hat, row.overlap);

            const std::int64_t hz[1] = {n};
            if (model.kind == MarginalModel::Kind::pinning) {
                PinningBatch batch;
                batch.law = model.law;
                batch.disorder = model.disorder;
                batch.beta = row.beta_n;
                batch.h = -log_mgf(model.disorder, row.beta_n);
                batch_pinning_log_z(batch, {hz, 1}, samples, sub_master, 0, log_z, exec);
            } else {
                PolymerBatch batch;
                batch.walk = model.walk;
                batch.disorder = model.disorder;
                batch.beta = row.beta_n;
                batch.window_sigmas = model.window_sigmas;
                batch_polymer_log_z(batch, {hz, 1}, samples, sub_master, 0, log_z, exec);
            }

            MomentAccumulator acc_z;
            MomentAccumulator acc_z2;
            std::int64_t below = 0;
            for (double lz : log_z) {
                const double z = std::exp(lz);
                acc_z.add(z);
                acc_z2.add(z * z);
                if (lz < std::log(0.01)) ++below;
            }
            const MomentSummary s = moment_summary(acc_z);
            row.mean_z = s.mean;
            row.var_z = s.variance;
            row.e_z2 = acc_z2.mean;
            row.median_z = std::exp(median(log_z));
            row.p_below_001 = static_cast<double>(below) / static_cast<double>(samples);
            if (limit.degenerate) {
                row.ks_lognormal = std::numeric_limits<double>::quiet_NaN();
            } else {
                const double mu = limit.mean_log_z();
                const double sd = std::sqrt(limit.sigma_sq);
                row.ks_lognormal = ks_statistic(std::span<const double>(log_z),
                                                [&](double x) { return normal_cdf(x, mu, sd); });
            }
            rows.push_back(row);
        }
    }
    return rows;
}

// ------------------------------------------------ theta blocks

ThetaBlockStats theta_blocks(const WalkLaw& walk, const DisorderSpec& disorder, std::int64_t n,
                             int m, std::int64_t replicas, std::uint64_t master, Exec exec,
                             bool sitewise) {
    if (m < 1) throw validation_error("theta_blocks: M must be >= 1");
    if (n < 4) throw validation_error("theta_blocks: N must be >= 4");
    if (walk.family != WalkFamily::ssrw_2d)
        throw validation_error("theta_blocks: implemented for the 2d simple walk");

    ThetaBlockStats stats;
    stats.n = n;
    stats.m = m;
    stats.replicas = replicas;
    const double log_n = std::log(static_cast<double>(n));

    // I_i = (N^{(i-1)/M}, N^{i/M}]; note n = 1 belongs to no block.
    for (int i = 1; i <= m; ++i) {
        const double lo_edge = std::pow(static_cast<double>(n), static_cast<double>(i - 1) / m);
        const double hi_edge = std::pow(static_cast<double>(n), static_cast<double>(i) / m);
        const std::int64_t lo = static_cast<std::int64_t>(std::floor(lo_edge)) + 1;
        const std::int64_t hi = i == m ? n : static_cast<std::int64_t>(std::floor(hi_edge));
        if (lo > hi)
            throw validation_error("theta_blocks: block " + std::to_string(i)
                                   + " is empty (N too small for M)");
        stats.block_lo.push_back(lo);
        stats.block_hi.push_back(hi);
    }

    // per-layer coincidence masses q2(n) = sum_x q_n(x)^2 and their sd
    std::vector<double> layer_sd(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> layer_q2(static_cast<std::size_t>(n) + 1, 0.0);
    {
        double r = 1.0; // C(2k,k)/4^k running product; q2 = r^2 for the 2d walk
        for (std::int64_t k = 1; k <= n; ++k) {
            r *= (2.0 * static_cast<double>(k) - 1.0) / (2.0 * static_cast<double>(k));
            layer_q2[static_cast<std::size_t>(k)] = r * r;
            layer_sd[static_cast<std::size_t>(k)] = r;
        }
    }
    const double norm = std::sqrt(static_cast<double>(m) / log_n);
    stats.variance_oracle.resize(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::int64_t k = stats.block_lo[static_cast<std::size_t>(i)];
             k <= stats.block_hi[static_cast<std::size_t>(i)]; ++k)
            s += layer_q2[static_cast<std::size_t>(k)];
        stats.variance_oracle[static_cast<std::size_t>(i)] =
            s * static_cast<double>(m) / log_n;
    }

    std::vector<double> thetas(static_cast<std::size_t>(replicas) * static_cast<std::size_t>(m), 0.0);

    if (!sitewise) {
        if (disorder.family != DisorderFamily::standard_gaussian)
            throw validation_error("theta_blocks: the collapsed per-layer sampler is exact only "
                                   "for the gaussian family; use sitewise=true otherwise");
        for_each_index(replicas, exec, [&](std::int64_t r) {
            double* out = thetas.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(m);
            const std::uint64_t stream = static_cast<std::uint64_t>(r);
            for (int i = 0; i < m; ++i) {
                double acc = 0.0;
                for (std::int64_t k = stats.block_lo[static_cast<std::size_t>(i)];
                     k <= stats.block_hi[static_cast<std::size_t>(i)]; ++k) {
                    acc += layer_sd[static_cast<std::size_t>(k)]
                         * rng::gaussian(master, stream, static_cast<std::uint64_t>(k));
                }
                out[i] = norm * acc;
            }
        });
    } else {
        if (n > 512) throw resource_error("theta_blocks: sitewise horizon limited to N <= 512");
        // kernel columns for every layer, built once and shared read-only
        std::vector<KernelColumn> columns;
        columns.reserve(static_cast<std::size_t>(n));
        for (std::int64_t k = 1; k <= n; ++k) columns.push_back(kernel_column(walk, k, 1e-9));
        check_lattice_bounds(n, n + 1);

        for_each_index(replicas, exec, [&](std::int64_t r) {
            double* out = thetas.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(m);
            const std::uint64_t stream = static_cast<std::uint64_t>(r);
            std::vector<signed char> signs;
            for (int i = 0; i < m; ++i) {
                double acc = 0.0;
                for (std::int64_t k = stats.block_lo[static_cast<std::size_t>(i)];
                     k <= stats.block_hi[static_cast<std::size_t>(i)]; ++k) {
                    const KernelColumn& col = columns[static_cast<std::size_t>(k - 1)];
                    const std::int64_t w = col.half_width;
                    const std::int64_t side = 2 * w + 1;
                    // beyond ~6 standard deviations the kernel mass is
                    // negligible; skip those cells and the empty parity class
                    const std::int64_t w_eff = std::min<std::int64_t>(
                        w, static_cast<std::int64_t>(std::ceil(6.0 * std::sqrt(0.5 * static_cast<double>(k)))) + 2);
                    for (std::int64_t y = -w_eff; y <= w_eff; ++y) {
                        const double* row = col.values.data() + (y + w) * side;
                        if (disorder.family == DisorderFamily::rademacher) {
                            signs.resize(static_cast<std::size_t>(2 * w_eff + 1));
                            rng::fill_signs(master, stream, pack_site_2d(k, -w_eff, y),
                                            static_cast<std::size_t>(2 * w_eff + 1), signs.data());
                            const std::int64_t x0 = -w_eff + (((-w_eff + y + k) & 1) != 0 ? 1 : 0);
                            for (std::int64_t x = x0; x <= w_eff; x += 2)
                                acc += row[x + w] * static_cast<double>(signs[static_cast<std::size_t>(x + w_eff)]);
                        } else {
                            const std::int64_t x0 = -w_eff + (((-w_eff + y + k) & 1) != 0 ? 1 : 0);
                            for (std::int64_t x = x0; x <= w_eff; x += 2) {
                                const double q = row[x + w];
                                if (q == 0.0) continue;
                                acc += q * sample_site(disorder, master, stream, pack_site_2d(k, x, y));
                            }
                        }
                    }
                }
                out[i] = norm * acc;
            }
        });
    }

    stats.moments.resize(static_cast<std::size_t>(m));
    for (std::int64_t r = 0; r < replicas; ++r)
        for (int i = 0; i < m; ++i)
            stats.moments[static_cast<std::size_t>(i)].add(
                thetas[static_cast<std::size_t>(r) * static_cast<std::size_t>(m) + static_cast<std::size_t>(i)]);

    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            std::vector<double> a(static_cast<std::size_t>(replicas)), b(static_cast<std::size_t>(replicas));
            for (std::int64_t r = 0; r < replicas; ++r) {
                a[static_cast<std::size_t>(r)] = thetas[static_cast<std::size_t>(r) * m + static_cast<std::size_t>(i)];
                b[static_cast<std::size_t>(r)] = thetas[static_cast<std::size_t>(r) * m + static_cast<std::size_t>(j)];
            }
            stats.pairwise_corr.push_back(correlation(a, b));
        }
    }
    return stats;
}

// ------------------------------------------------ exact second moments

std::vector<double> replica_second_moment_exact(std::span<const double> coincidence_mass,
                                                double lambda,
                                                std::span<const std::int64_t> horizons) {
    const std::int64_t n_top = horizons.back();
    if (static_cast<std::int64_t>(coincidence_mass.size()) < n_top + 1)
        throw validation_error("replica_second_moment_exact: coincidence mass table too short");
    const double w = std::expm1(lambda);
    std::vector<double> g(static_cast<std::size_t>(n_top) + 1, 0.0);
    g[0] = 1.0;
    std::vector<double> out;
    out.reserve(horizons.size());
    double partial = 1.0;
    std::size_t next_checkpoint = 0;
    while (next_checkpoint < horizons.size() && horizons[next_checkpoint] == 0) {
        out.push_back(partial);
        ++next_checkpoint;
    }
    for (std::int64_t n = 1; n <= n_top; ++n) {
        double s = 0.0;
        for (std::int64_t m = 0; m < n; ++m)
            s += g[static_cast<std::size_t>(m)] * coincidence_mass[static_cast<std::size_t>(n - m)];
        g[static_cast<std::size_t>(n)] = w * s;
        partial += g[static_cast<std::size_t>(n)];
        while (next_checkpoint < horizons.size() && horizons[next_checkpoint] == n) {
            out.push_back(partial);
            ++next_checkpoint;
        }
    }
    return out;
}

std::vector<double> pinning_second_moment_exact(const RenewalLaw& law, double lambda,
                                                std::span<const std::int64_t> horizons) {
    const std::int64_t n_top = horizons.back();
    const auto u = law.renewal_mass(n_top);
    std::vector<double> v(static_cast<std::size_t>(n_top) + 1, 0.0);
    v[0] = 1.0;
    for (std::int64_t i = 1; i <= n_top; ++i)
        v[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
    return replica_second_moment_exact(v, lambda, horizons);
}

std::vector<double> polymer_second_moment_exact(const WalkLaw& walk, double lambda,
                                                std::span<const std::int64_t> horizons) {
    const std::int64_t n_top = horizons.back();
    std::vector<double> v(static_cast<std::size_t>(n_top) + 1, 0.0);
    v[0] = 1.0;
    for (std::int64_t i = 1; i <= n_top; ++i) v[static_cast<std::size_t>(i)] = coincidence_q2(walk, i);
    return replica_second_moment_exact(v, lambda, horizons);
}

} // namespace lab
