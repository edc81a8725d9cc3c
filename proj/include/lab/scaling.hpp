#pragma once

// Free-energy estimation for the pinning model, critical-point scans, and
// the discrete-side continuum scaling collapse.  The h passed to every
// routine here is the recentered field: site weights use h - M(beta).

#include <cstdint>
#include <span>
#include <vector>

#include "lab/disorder.hpp"
#include "lab/parallel.hpp"
#include "lab/renewal.hpp"

namespace lab {

struct FreeEnergyEstimate {
    double f_hat = 0.0;      // (1/N) mean log Z, clamped at 0
    double f_raw = 0.0;      // unclamped value
    double f_doubling = 0.0; // (2/N)(mean log Z_N - mean log Z_{N/2}); cancels the O(1/N) offset
    double stderr_f = 0.0;   // replica standard error of f_raw
    double stderr_doubling = 0.0;
    std::int64_t n = 0;
    std::int64_t samples = 0;
    double beta = 0.0;
    double h = 0.0;
};

// Mean of (1/N) log Z over independent environments; free endpoint.
// Requires N >= 256 (documented floor).  At beta = 0 the replicas are
// identical and a single evaluation is used (stderr 0).
FreeEnergyEstimate free_energy_estimate(const RenewalLaw& law, const DisorderSpec& disorder,
                                        double beta, double h, std::int64_t n,
                                        std::int64_t samples, std::uint64_t master, Exec exec);

// Pure-model free energy: the unique root F >= 0 of
// sum_n K(n) e^{-F n} = e^{-h}; 0 for h <= 0.
double pure_pinning_free_energy(const RenewalLaw& law, double h);

struct CriticalPointEstimate {
    double beta = 0.0;
    double h_c_hat = 0.0;
    double h_lo = 0.0;
    double h_hi = 0.0;
    double threshold = 0.0;
};

// Walks the increasing h grid for the first detector crossing
// (f_hat > max(threshold_stderr_mult * stderr, 1e-9)), then bisects.
CriticalPointEstimate critical_point_scan(const RenewalLaw& law, const DisorderSpec& disorder,
                                          double beta, std::span<const double> h_grid,
                                          std::int64_t n, std::int64_t samples,
                                          double threshold_stderr_mult, int bisection_levels,
                                          std::uint64_t master, Exec exec);

struct CollapsePoint {
    double delta = 0.0;
    double beta = 0.0;   // beta_hat * delta^{alpha - 1/2}
    double h = 0.0;      // h_hat * delta^alpha
    double collapsed_value = 0.0; // F(beta, h)/delta, doubling estimator
    double collapsed_raw = 0.0;   // plain estimator variant
    double stderr_collapsed = 0.0;
};

// Evaluates F(beta_hat delta^{alpha-1/2}, h_hat delta^alpha)/delta along a
// decreasing delta grid (L == 1); approximate delta-independence of the
// values is the collapse.
std::vector<CollapsePoint> scaling_collapse(const RenewalLaw& law, const DisorderSpec& disorder,
                                            double beta_hat, double h_hat,
                                            std::span<const double> delta_grid,
                                            std::int64_t n_per_delta, std::int64_t samples,
                                            std::uint64_t master, Exec exec);

} // namespace lab
