#pragma once

// Lattice random walks: simple symmetric walks in d = 1, 2 and a truncated
// heavy-tailed 1d step family with tail ~ |x|^{-(1+alpha)}.  Provides n-step
// kernels q_n(x), coincidence sums q2(n) = sum_x q_n(x)^2, the replica
// overlap R_N, and path sampling.

#include <array>
#include <cstdint>
#include <vector>

#include "lab/disorder.hpp"

namespace lab {

enum class WalkFamily { ssrw_1d, ssrw_2d, stable_1d };

struct WalkLaw {
    WalkFamily family = WalkFamily::ssrw_1d;
    double alpha = 0.0;        // stable_1d only
    std::int64_t x_max = 0;    // stable_1d step truncation range
    int period = 2;

    // stable_1d tables: step_pmf[i] = P(step = i - x_max), and its CDF.
    std::vector<double> step_pmf;
    std::vector<double> step_cdf;

    double step_prob(std::int64_t dx) const;
};

WalkLaw make_ssrw_1d();
WalkLaw make_ssrw_2d();
// p(x) proportional to 1/(1 + |x|^{1+alpha}) on [-x_max, x_max]; at alpha = 1
// this is the truncated Cauchy-like surrogate.  alpha in (0.5, 2].
WalkLaw make_stable_1d(double alpha, std::int64_t x_max = 100000);

struct KernelColumn {
    std::int64_t n = 0;
    int dim = 1;
    std::int64_t x_min = 0;      // 1d: values[i] = q_n(x_min + i)
    std::int64_t half_width = 0; // 2d: (2w+1)^2 row-major, y outer
    std::vector<double> values;
    double truncation_mass = 0.0;

    double at(std::int64_t x) const;
    double at(std::int64_t x, std::int64_t y) const;
};

// Exact iterated convolution of the step law, trimming tail cells so the
// total trimmed mass stays <= tol * (m/n) after m steps.
KernelColumn kernel_column(const WalkLaw& walk, std::int64_t n, double tol = 1e-9);

// sum_x q_n(x)^2 (= probability two independent copies coincide at time n).
// Closed form for the simple walks, characteristic-function quadrature for
// the stable family.
double coincidence_q2(const WalkLaw& walk, std::int64_t n);

// R_N = sum_{n<=N} sum_x q_n(x)^2.
double polymer_overlap(const WalkLaw& walk, std::int64_t n, double tol = 1e-9);

// Reference implementation evolving the kernel column step by step; serial,
// for tests at small N.
double polymer_overlap_by_convolution(const WalkLaw& walk, std::int64_t n, double tol = 1e-9);

// P(1d SSRW returns to 0 at time 2n) = C(2n,n)/4^n.
double ssrw1d_return_prob(std::int64_t n);

struct LatticePath {
    int dim = 1;
    std::vector<std::int64_t> x; // positions after steps 1..N
    std::vector<std::int64_t> y; // 2d only
};

LatticePath sample_path(const WalkLaw& walk, std::int64_t n, SeedProvenance seed);

} // namespace lab
