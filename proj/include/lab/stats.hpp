#pragma once

// Shared statistical toolkit: streaming moment accumulators with an exact
// merge law, empirical CDF distances, and small summaries used by the
// experiment drivers.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lab {

// Count / mean / central power sums M2..M4.  merge() is associative up to
// floating round-off, so any tree of per-thread partials is valid.
struct MomentAccumulator {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;

    void add(double x);
    void merge(const MomentAccumulator& other);
};

struct MomentSummary {
    double mean = 0.0;
    double variance = 0.0;   // unbiased (n-1)
    double skewness = 0.0;
    double kurtosis = 0.0;   // raw standardized fourth moment, Gaussian -> 3
    double se_mean = 0.0;
    double se_variance = 0.0;
    double se_skewness = 0.0;
    double se_kurtosis = 0.0;
    bool shape_defined = true; // false for a constant stream (variance 0)
};

// Requires count >= 4.
MomentSummary moment_summary(const MomentAccumulator& acc);

// Sup distance between the empirical CDF of `sample` and `cdf`.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

// Two-sample sup distance.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Asymptotic 1% critical value 1.63/sqrt(n); for the two-sample statistic
// pass the effective size n*m/(n+m).
double ks_critical_1pct(double effective_n);

double normal_cdf(double x, double mu = 0.0, double sigma = 1.0);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

// Pearson correlation of two equal-length samples.
double correlation(std::span<const double> a, std::span<const double> b);

} // namespace lab
