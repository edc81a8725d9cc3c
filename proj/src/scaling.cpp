#include "lab/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "lab/errors.hpp"
#include "lab/partition.hpp"
#include "lab/rng.hpp"
#include "lab/stats.hpp"

namespace lab {

FreeEnergyEstimate free_energy_estimate(const RenewalLaw& law, const DisorderSpec& disorder,
                                        double beta, double h, std::int64_t n,
                                        std::int64_t samples, std::uint64_t master, Exec exec) {
    if (n < 256) throw validation_error("free_energy_estimate: N must be >= 256");
    if (samples < 1) throw validation_error("free_energy_estimate: samples must be >= 1");

    const std::int64_t effective_samples = beta == 0.0 ? 1 : samples;
    const std::int64_t horizons[2] = {n / 2, n};
    std::vector<double> log_z(static_cast<std::size_t>(effective_samples) * 2);

    PinningBatch batch;
    batch.law = &law;
    batch.disorder = disorder;
    batch.beta = beta;
    batch.h = h - log_mgf(disorder, beta);
    batch_pinning_log_z(batch, {horizons, 2}, effective_samples, master, 0, log_z, exec);

    MomentAccumulator acc_full, acc_doubling;
    for (std::int64_t r = 0; r < effective_samples; ++r) {
        const double lz_half = log_z[static_cast<std::size_t>(r) * 2];
        const double lz_full = log_z[static_cast<std::size_t>(r) * 2 + 1];
        acc_full.add(lz_full / static_cast<double>(n));
        acc_doubling.add((lz_full - lz_half) / static_cast<double>(n - n / 2));
    }

    FreeEnergyEstimate est;
    est.n = n;
    est.samples = effective_samples;
    est.beta = beta;
    est.h = h;
    est.f_raw = acc_full.mean;
    est.f_hat = std::max(est.f_raw, 0.0);
    est.f_doubling = acc_doubling.mean;
    if (effective_samples > 1) {
        est.stderr_f = std::sqrt(acc_full.m2 / static_cast<double>(effective_samples - 1)
                                 / static_cast<double>(effective_samples));
        est.stderr_doubling = std::sqrt(acc_doubling.m2 / static_cast<double>(effective_samples - 1)
                                        / static_cast<double>(effective_samples));
    }
    return est;
}

double pure_pinning_free_energy(const RenewalLaw& law, double h) {
    if (h <= 0.0) return 0.0;
    // phi(F) = sum_n K(n) e^{-F n} is continuous and decreasing from 1 (up to
    // the table tail) to 0; solve phi(F) = e^{-h} by bisection.
    const auto phi = [&](double f) {
        double s = 0.0;
        for (std::int64_t n = law.n_max; n >= 1; --n)
            s += law.k_of(n) * std::exp(-f * static_cast<double>(n));
        return s;
    };
    double lo = 0.0, hi = 1.0;
    const double target = std::exp(-h);
    while (phi(hi) > target) hi *= 2.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (phi(mid) > target) lo = mid; else hi = mid;
        if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

CriticalPointEstimate critical_point_scan(const RenewalLaw& law, const DisorderSpec& disorder,
                                          double beta, std::span<const double> h_grid,
                                          std::int64_t n, std::int64_t samples,
                                          double threshold_stderr_mult, int bisection_levels,
                                          std::uint64_t master, Exec exec) {
    if (h_grid.size() < 2) throw validation_error("critical_point_scan: h_grid needs >= 2 points");
    if (!std::is_sorted(h_grid.begin(), h_grid.end()))
        throw validation_error("critical_point_scan: h_grid must be increasing");

    const auto detect = [&](double h) {
        const FreeEnergyEstimate est =
            free_energy_estimate(law, disorder, beta, h, n, samples, master, exec);
        const double threshold = std::max(threshold_stderr_mult * est.stderr_f, 1e-9);
        return std::make_pair(est.f_hat > threshold, threshold);
    };

    double h_lo = h_grid.front();
    auto [lo_hot, lo_thr] = detect(h_lo);
    if (lo_hot)
        throw validation_error("critical_point_scan: detector already positive at the grid start");
    double h_hi = 0.0;
    double threshold = lo_thr;
    bool bracketed = false;
    for (std::size_t i = 1; i < h_grid.size(); ++i) {
        auto [hot, thr] = detect(h_grid[i]);
        if (hot) {
            h_hi = h_grid[i];
            threshold = thr;
            bracketed = true;
            break;
        }
        h_lo = h_grid[i];
    }
    if (!bracketed)
        throw validation_error("critical_point_scan: no detector crossing on the h grid (bracketing failed)");

    for (int level = 0; level < bisection_levels; ++level) {
        const double mid = 0.5 * (h_lo + h_hi);
        auto [hot, thr] = detect(mid);
        if (hot) { h_hi = mid; threshold = thr; } else { h_lo = mid; }
    }

    CriticalPointEstimate est;
    est.beta = beta;
    est.h_lo = h_lo;
    est.h_hi = h_hi;
    est.h_c_hat = 0.5 * (h_lo + h_hi);
    est.threshold = threshold;
    return est;
}

std::vector<CollapsePoint> scaling_collapse(const RenewalLaw& law, const DisorderSpec& disorder,
                                            double beta_hat, double h_hat,
                                            std::span<const double> delta_grid,
                                            std::int64_t n_per_delta, std::int64_t samples,
                                            std::uint64_t master, Exec exec) {
    if (!(law.alpha > 0.5 && law.alpha < 1.0))
        throw validation_error("scaling_collapse: requires alpha in (1/2, 1)");
    std::vector<CollapsePoint> points;
    for (std::size_t i = 0; i < delta_grid.size(); ++i) {
        const double delta = delta_grid[i];
        if (!(delta > 0.0 && delta < 1.0))
            throw validation_error("scaling_collapse: delta must be in (0,1)");
        CollapsePoint p;
        p.delta = delta;
        p.beta = beta_hat * std::pow(delta, law.alpha - 0.5);
        p.h = h_hat * std::pow(delta, law.alpha);
        const FreeEnergyEstimate est = free_energy_estimate(
            law, disorder, p.beta, p.h, n_per_delta, samples,
            rng::derive_key(master, 0xC0111A95u + i), exec);
        p.collapsed_value = std::max(est.f_doubling, 0.0) / delta;
        p.collapsed_raw = est.f_hat / delta;
        p.stderr_collapsed = est.stderr_doubling / delta;
        points.push_back(p);
    }
    return points;
}

} // namespace lab
