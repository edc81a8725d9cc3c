#include "lab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lab/errors.hpp"

namespace lab {

void MomentAccumulator::add(double x) {
    // Pebay's one-pass update.
    const double n1 = static_cast<double>(count);
    count += 1;
    const double n = static_cast<double>(count);
    const double delta = x - mean;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean += delta_n;
    m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2 - 4.0 * delta_n * m3;
    m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2;
    m2 += term1;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.count == 0) return;
    if (count == 0) { *this = other; return; }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double n = na + nb;
    const double delta = other.mean - mean;
    const double d2 = delta * delta;
    const double d3 = d2 * delta;
    const double d4 = d2 * d2;

    MomentAccumulator r;
    r.count = count + other.count;
    r.mean = mean + delta * nb / n;
    r.m2 = m2 + other.m2 + d2 * na * nb / n;
    r.m3 = m3 + other.m3 + d3 * na * nb * (na - nb) / (n * n)
         + 3.0 * delta * (na * other.m2 - nb * m2) / n;
    r.m4 = m4 + other.m4
         + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
         + 6.0 * d2 * (na * na * other.m2 + nb * nb * m2) / (n * n)
         + 4.0 * delta * (na * other.m3 - nb * m3) / n;
    *this = r;
}

MomentSummary moment_summary(const MomentAccumulator& acc) {
    if (acc.count < 4) throw validation_error("moment_summary: need at least 4 observations");
    const double n = static_cast<double>(acc.count);
    MomentSummary s;
    s.mean = acc.mean;
    s.variance = acc.m2 / (n - 1.0);
    s.se_mean = std::sqrt(s.variance / n);
    s.se_variance = s.variance * std::sqrt(2.0 / (n - 1.0));
    if (acc.m2 <= 0.0) {
        s.shape_defined = false;
        return s;
    }
    s.skewness = std::sqrt(n) * acc.m3 / std::pow(acc.m2, 1.5);
    s.kurtosis = n * acc.m4 / (acc.m2 * acc.m2);
    s.se_skewness = std::sqrt(6.0 / n);
    s.se_kurtosis = std::sqrt(24.0 / n);
    return s;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.size() < 2) throw validation_error("ks_statistic: sample size must be >= 2");
    std::vector<double> xs(sample.begin(), sample.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw validation_error("ks_statistic: sample sizes must be >= 2");
    std::vector<double> xa(a.begin(), a.end());
    std::vector<double> xb(b.begin(), b.end());
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    const double na = static_cast<double>(xa.size());
    const double nb = static_cast<double>(xb.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < xa.size() && j < xb.size()) {
        const double x = std::min(xa[i], xb[j]);
        while (i < xa.size() && xa[i] == x) ++i;
        while (j < xb.size() && xb[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_1pct(double effective_n) {
    return 1.63 / std::sqrt(effective_n);
}

double normal_cdf(double x, double mu, double sigma) {
    return 0.5 * std::erfc(-(x - mu) / (sigma * 1.4142135623730950488));
}

double median(std::vector<double> values) {
    return quantile(std::move(values), 0.5);
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw validation_error("quantile: empty sample");
    if (q < 0.0 || q > 1.0) throw validation_error("quantile: q must be in [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * values[lo] + w * values[hi];
}

double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw validation_error("correlation: need equal sizes >= 2");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) { ma += a[i]; mb += b[i]; }
    ma /= n; mb /= n;
    double sab = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        sa += (a[i] - ma) * (a[i] - ma);
        sb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(sa * sb);
}

} // namespace lab
