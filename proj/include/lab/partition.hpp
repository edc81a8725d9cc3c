#pragma once

// Exact partition functions of the disordered pinning and directed polymer
// models.  Single evaluations take an explicit disorder field; the batch
// drivers draw fields from replica-indexed streams and run the replica loop
// through the serial or OpenMP policy.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lab/disorder.hpp"
#include "lab/parallel.hpp"
#include "lab/renewal.hpp"
#include "lab/walk.hpp"

namespace lab {

enum class Endpoint { free_end, constrained };

struct PartitionValue {
    double value = 0.0;     // exp(log_value); may overflow to inf, log_value is authoritative
    double log_value = 0.0;
    std::string model;      // "pinning" | "polymer"
    std::int64_t n = 0;
    double beta = 0.0;
    double h = 0.0;
    Endpoint endpoint = Endpoint::free_end;
    SeedProvenance seed;
};

// ---- pinning ----

// z(0) = 1, z(n) = e^{beta w_n + h} sum_m z(m) K(n-m); free endpoint sums
// z(m) P(tau_1 > N-m), constrained returns z(N).  Accumulation runs in a
// rescaled linear domain with an exact log offset, so Z may span hundreds of
// orders of magnitude.
PartitionValue pinning_partition(const RenewalLaw& law, std::span<const double> omega,
                                 double beta, double h, std::int64_t n,
                                 Endpoint endpoint = Endpoint::free_end);

// Core recursion on precomputed site weights w[n] = e^{beta omega_n + h};
// returns log Z at each requested horizon (sorted ascending).  `work` must
// hold max(horizons)+1 doubles.
void pinning_log_z_multi(const RenewalLaw& law, std::span<const double> site_weights,
                         std::span<const std::int64_t> horizons, Endpoint endpoint,
                         std::span<double> work, std::span<double> log_z_out);

struct PinningBatch {
    const RenewalLaw* law = nullptr;
    DisorderSpec disorder;
    double beta = 0.0;
    double h = 0.0;
    Endpoint endpoint = Endpoint::free_end;
};

// out[r * horizons.size() + j] = log Z at horizons[j] for replica r; the
// environment of replica r is stream (stream0 + r) under `master`.
void batch_pinning_log_z(const PinningBatch& batch, std::span<const std::int64_t> horizons,
                         std::int64_t replicas, std::uint64_t master, std::uint64_t stream0,
                         std::span<double> out, Exec exec);

// ---- polymer ----

enum class PolymerMode { point_to_plane, point_to_point };

struct PolymerBatch {
    const WalkLaw* walk = nullptr;
    DisorderSpec disorder;
    double beta = 0.0;
    double window_sigmas = 4.5;  // transfer window half-width in units of the walk spread
    double window_tol = 5e-3;    // acceptable pure-walk mass loss at the final horizon
};

// Point-to-plane log Z with h = -M(beta) folded into the site weights.
void batch_polymer_log_z(const PolymerBatch& batch, std::span<const std::int64_t> horizons,
                         std::int64_t replicas, std::uint64_t master, std::uint64_t stream0,
                         std::span<double> out, Exec exec);

// Pure-walk mass kept inside the window at horizon n (1 - clipped mass);
// deterministic in (family, n, window_sigmas).  Used to enforce window_tol.
double polymer_window_loss(const WalkLaw& walk, std::int64_t n, double window_sigmas);

// Single evaluation on an explicit field omega(n, x[, y]) with site weights
// e^{beta*omega + h_shift}; pass h_shift = -M(beta) for the centered model.
// Small horizons (tests, oracle checks).
PartitionValue polymer_partition(const WalkLaw& walk,
                                 const std::function<double(std::int64_t, std::int64_t, std::int64_t)>& omega,
                                 double beta, double h_shift, std::int64_t n, PolymerMode mode,
                                 std::int64_t target_x = 0, std::int64_t target_y = 0,
                                 double window_sigmas = 6.0);

// Brute force over all step sequences (p^N paths); ssrw-1d and ssrw-2d only.
double polymer_partition_enumerate(const WalkLaw& walk,
                                   const std::function<double(std::int64_t, std::int64_t, std::int64_t)>& omega,
                                   double beta, double h_shift, std::int64_t n, PolymerMode mode,
                                   std::int64_t target_x = 0, std::int64_t target_y = 0);

// ---- continuum pinning (finite mean) ----

struct ContinuumPinningParams {
    double beta_hat = 0.0;
    double h_hat = 0.0;
    double t = 1.0;
    double mean_interarrival = 1.0;
};

// exp{ (bhat/m) W_t + (hhat/m - bhat^2/(2 m^2)) t }, W_t ~ N(0, t).
double continuum_pinning_sample(const ContinuumPinningParams& params, SeedProvenance seed);

} // namespace lab
