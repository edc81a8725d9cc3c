#pragma once

// Marginal-relevance experiments: the beta_N = beta_hat/sqrt(R_N) scaling,
// the log-normal limit law and its beta_hat = 1 transition, coarse-grained
// block statistics on exponential time scales, and exact replica
// second-moment curves used as oracles.

#include <cstdint>
#include <span>
#include <vector>

#include "lab/disorder.hpp"
#include "lab/parallel.hpp"
#include "lab/renewal.hpp"
#include "lab/stats.hpp"
#include "lab/walk.hpp"

namespace lab {

struct LognormalLimit {
    double beta_hat = 0.0;
    double sigma_sq = 0.0; // log(1/(1-beta_hat^2)) for beta_hat < 1
    bool degenerate = false; // beta_hat >= 1: point mass at 0

    double mean_log_z() const { return -0.5 * sigma_sq; }
    double second_moment() const { return 1.0 / (1.0 - beta_hat * beta_hat); }
};

LognormalLimit limit_lognormal_params(double beta_hat);

// beta_hat / sqrt(R_N).
double marginal_beta(double beta_hat, double overlap);

struct MarginalModel {
    enum class Kind { pinning, polymer } kind = Kind::pinning;
    const RenewalLaw* law = nullptr;
    const WalkLaw* walk = nullptr;
    DisorderSpec disorder;
    double window_sigmas = 4.5; // polymer transfer window
};

struct MarginalScanRow {
    double beta_hat = 0.0;
    std::int64_t n = 0;
    double overlap = 0.0;
    double beta_n = 0.0;
    double mean_z = 0.0;
    double var_z = 0.0;
    double e_z2 = 0.0;
    double median_z = 0.0;
    double ks_lognormal = 0.0; // NaN when the limit is degenerate
    double p_below_001 = 0.0;  // empirical P(Z < 0.01)
};

// Environments are centered by h = -M(beta_N); streams are keyed by replica
// index, and the same sub-master is used across the N grid so the
// environments of replica r at different N share their prefix.
std::vector<MarginalScanRow> marginal_scan(const MarginalModel& model,
                                           std::span<const double> beta_hat_grid,
                                           std::span<const std::int64_t> n_grid,
                                           std::int64_t samples, std::uint64_t master, Exec exec);

struct ThetaBlockStats {
    std::int64_t n = 0;
    int m = 0;
    std::int64_t replicas = 0;
    std::vector<std::int64_t> block_lo, block_hi; // I_i = [lo_i, hi_i]
    std::vector<MomentAccumulator> moments;       // per block, over replicas
    std::vector<double> variance_oracle;          // (M/log N) sum_{I_i} q2(n)
    std::vector<double> pairwise_corr;            // upper triangle, row-major
};

// Theta_i = sqrt(M/log N) sum_{n in I_i, x} q_n(x) omega_{(n,x)} with
// standardized disorder omega.  For a Gaussian environment the spatial sum
// collapses exactly (in law) to one draw of sd sqrt(q2(n)) per layer, which
// is how horizons like 2^16 stay tractable; `sitewise` forces the literal
// per-site sum (small n, any family).
ThetaBlockStats theta_blocks(const WalkLaw& walk, const DisorderSpec& disorder, std::int64_t n,
                             int m, std::int64_t replicas, std::uint64_t master, Exec exec,
                             bool sitewise = false);

// Exact E[Z^2] = sum over coincidence chains of prod v(gap) (e^lambda - 1)^k,
// where v is the coincidence renewal mass (u(n)^2 for pinning, sum_x q_n(x)^2
// for the polymer).  O(N^2); the independent oracle for the Monte Carlo
// second moments.
std::vector<double> replica_second_moment_exact(std::span<const double> coincidence_mass,
                                                double lambda,
                                                std::span<const std::int64_t> horizons);

std::vector<double> pinning_second_moment_exact(const RenewalLaw& law, double lambda,
                                                std::span<const std::int64_t> horizons);

std::vector<double> polymer_second_moment_exact(const WalkLaw& walk, double lambda,
                                                std::span<const std::int64_t> horizons);

} // namespace lab
