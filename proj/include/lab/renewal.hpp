#pragma once

// Heavy-tailed renewal processes: inter-arrival law K(n) ~ L(n) n^{-(1+alpha)},
// renewal mass function u(n) = P(n is a renewal point), trace sampling, and
// the replica overlap R_N = sum u(n)^2.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lab/disorder.hpp"

namespace lab {

enum class SlowlyVarying { constant_one, log_power };

struct RenewalLaw {
    double alpha = 0.0;
    SlowlyVarying slowly_varying = SlowlyVarying::constant_one;
    double kappa = 0.0;          // exponent of (1+log n)^kappa, log_power only
    std::int64_t n_max = 0;

    std::vector<double> pmf;      // pmf[n] = K(n), n in [1, n_max]; pmf[0] = 0
    std::vector<double> pmf_reversed; // pmf_reversed[n_max - n] = K(n); contiguous dot products
    std::vector<double> survival; // survival[r] = P(tau_1 > r), r in [0, n_max]
    double normalization = 0.0;   // c with K(n) = L(n) n^{-(1+alpha)} / c
    double tail_mass = 0.0;       // sum_{n > n_max} K(n), analytic
    double mean_interarrival = 0.0; // +inf encoded as infinity() when alpha <= 1

    double k_of(std::int64_t n) const { return pmf[static_cast<std::size_t>(n)]; }
    double survival_of(std::int64_t r) const { return survival[static_cast<std::size_t>(r)]; }

    // Renewal mass function u(0..n); computed on demand and cached
    // (direct O(n^2) convolution up to 2^16, FFT divide-and-conquer above).
    std::span<const double> renewal_mass(std::int64_t n) const;

    // Partial sums of 1/(n L(n)^2), the marginal-dichotomy series at
    // alpha = 1/2; exposed as data, no criticality claim attached.
    double dichotomy_partial_sum(std::int64_t n) const;

private:
    mutable std::vector<double> u_cache_;
    friend RenewalLaw build_renewal_law(double, SlowlyVarying, double, std::int64_t);
    friend RenewalLaw deterministic_renewal_law(std::int64_t);
};

// Normalization constant computed as truncated sum plus Euler-Maclaurin tail,
// relative error <= 1e-12.
RenewalLaw build_renewal_law(double alpha, SlowlyVarying sv, double kappa, std::int64_t n_max);

// Convenience overload for L == 1.
inline RenewalLaw build_renewal_law(double alpha, std::int64_t n_max) {
    return build_renewal_law(alpha, SlowlyVarying::constant_one, 0.0, n_max);
}

// Degenerate period-1 law (K(1) = 1): every integer is a renewal point.
RenewalLaw deterministic_renewal_law(std::int64_t n_max);

// Pinning replica overlap R_N = sum_{n<=N} u(n)^2.
double pinning_overlap(const RenewalLaw& law, std::int64_t n);

struct RenewalTrace {
    std::vector<std::int64_t> points; // strictly increasing, in [1, horizon]
    std::int64_t horizon = 0;
};

// Gaps drawn i.i.d. from K (inverse CDF on the table; residual table tail mass
// beyond n_max counts as "past the horizon"), stopped at the horizon.
RenewalTrace sample_renewal(const RenewalLaw& law, std::int64_t horizon, SeedProvenance seed);

// sum_{n=pow} L(n) n^{-s} evaluated by partial sum + Euler-Maclaurin tail;
// exposed for tests (zeta values etc).
double power_series_tail_sum(double s, SlowlyVarying sv, double kappa, std::int64_t from);

} // namespace lab
