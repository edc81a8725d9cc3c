#pragma once

// Polynomial chaos machinery: exhaustive expansions of the discrete
// partition functions (oracles for the recursions), continuum kernels and
// their truncated L2 series, the white-noise simulation of the continuum
// partition function, rescaled-kernel convergence errors, and the
// distributional (Lindeberg) family-swap distance.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lab/disorder.hpp"
#include "lab/parallel.hpp"
#include "lab/renewal.hpp"
#include "lab/walk.hpp"

namespace lab {

// ---- exhaustive discrete expansions (independent oracles) ----

// Z = sum over subsets A of {1..N} of prod_j u(gap_j) * prod_{n in A} eta_n,
// with eta[i] the value at site i+1.  Free endpoint.  N <= 16.
double chaos_oracle_pinning(const RenewalLaw& law, std::span<const double> eta);

// Same expansion for the 1d polymer: sum over time subsets, with a spatial
// chain transfer per subset.  eta(n, x) over the reachable cone.  N <= 12.
double chaos_oracle_polymer(const WalkLaw& walk, std::int64_t n,
                            const std::function<double(std::int64_t, std::int64_t)>& eta);

// ---- continuum kernels ----

struct ContinuumKernel {
    bool alpha_branch = true;
    double alpha = 0.75;    // (1/2, 1)
    double m = 1.0;         // finite-mean branch: psi_k = m^{-k}
    double constant = 0.0;  // per-gap multiplier of the alpha branch
    double c_alpha() const; // alpha sin(pi alpha)/pi
};

// Kernel with the paper-normalized constant C_alpha (inter-arrival mass
// written as L(n) n^{-(1+alpha)} with L absorbing the normalization).
ContinuumKernel pinning_kernel_alpha(double alpha);
ContinuumKernel pinning_kernel_finite_mean(double m);

// Kernel matched to a concrete normalized law: for a pmf n^{-(1+alpha)}/c
// the renewal mass scales like (C_alpha * c) n^{alpha-1}, so the limiting
// per-gap constant is C_alpha * c.  Requires L == 1 in the alpha branch;
// dispatches to the finite-mean branch when alpha > 1.
ContinuumKernel pinning_kernel_for_law(const RenewalLaw& law);

// psi(t_1..t_k) evaluated after sorting; throws on coinciding arguments in
// the alpha branch.  k = 0 returns 1.
double continuum_kernel_psi(const ContinuumKernel& kernel, std::span<const double> times,
                            double t_horizon);

struct TruncationReport {
    int k_max = 0;
    double tail_bound = 0.0;
    double epsilon_margin = 0.0; // the epsilon in the (1+eps)^k weights; 0 when centered
};

struct SecondMomentResult {
    double value = 0.0;
    std::vector<double> terms; // terms[k], k = 0..k_max
    TruncationReport report;
};

// E[Z^2] for h_hat = 0: sum_k beta_hat^{2k} int_{ordered simplex} psi^2,
// each integral by adaptive quadrature (alpha branch limited to k_max <= 3).
SecondMomentResult chaos_second_moment(const ContinuumKernel& kernel, double beta_hat,
                                       double h_hat, double t, int k_max);

// Truncated white-noise chaos sum on a mesh of [0,t]: cells carry
// xi_j = beta_hat W_j + h_hat dt with W_j ~ N(0, dt), psi evaluated at cell
// midpoints, coinciding cells skipped.
double simulate_continuum_chaos(const ContinuumKernel& kernel, double beta_hat, double h_hat,
                                double t, double mesh, int k_max, SeedProvenance seed);

// Batch of samples with stream = stream0 + replica.
void batch_continuum_chaos(const ContinuumKernel& kernel, double beta_hat, double h_hat,
                           double t, double mesh, int k_max, std::int64_t replicas,
                           std::uint64_t master, std::uint64_t stream0,
                           std::span<double> out, Exec exec);

// ---- rescaled kernel convergence (Assumption-1 style check) ----

// L2([0,1]^k) distance between the delta^{-gamma k}-rescaled discrete k-point
// kernel (piecewise constant from the renewal mass function, gamma =
// max(1-alpha, 0)) and the continuum kernel; k = 1 uses exact cell
// integrals, k in {2,3} midpoint grid quadrature off the diagonal.
double rescaled_correlation_error(const RenewalLaw& law, int k, std::int64_t n_sites);

// Grid-quadrature L2 distance between two continuum kernels (diagonal cells
// skipped); the self-distance is exactly 0.
double continuum_kernel_l2_distance(const ContinuumKernel& a, const ContinuumKernel& b,
                                    int k, std::int64_t grid);

// ---- Lindeberg family swap ----

struct LindebergModel {
    enum class Kind { pinning, polymer_2d } kind = Kind::pinning;
    const RenewalLaw* law = nullptr; // pinning
    const WalkLaw* walk = nullptr;   // polymer_2d
    double beta_hat = 1.0;
};

// Two-sample KS distance between the laws of Z under environments a and b,
// each centered by h = -M(beta_N) of its own family, at matched beta_N.
double lindeberg_distance(const LindebergModel& model, const DisorderSpec& spec_a,
                          const DisorderSpec& spec_b, std::int64_t n, std::int64_t samples,
                          std::uint64_t master, Exec exec);

} // namespace lab
