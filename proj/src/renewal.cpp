#include "lab/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fft.hpp"
#include "lab/errors.hpp"
#include "lab/rng.hpp"

namespace lab {
namespace {

double slowly_varying_at(SlowlyVarying sv, double kappa, double x) {
    if (sv == SlowlyVarying::constant_one) return 1.0;
    return std::pow(1.0 + std::log(x), kappa);
}

// Adaptive Simpson on [a,b] for a smooth integrand.
template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
         + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// integral_a^inf L(x) x^{-s} dx for s > 1.
double tail_integral(double s, SlowlyVarying sv, double kappa, double a) {
    const double b = s - 1.0;
    if (sv == SlowlyVarying::constant_one || kappa == 0.0) {
        return std::pow(a, -b) / b;
    }
    // substitute x = a e^y:  a^{-b} int_0^inf (1 + ln a + y)^kappa e^{-b y} dy
    const double t0 = std::log(a);
    const double y_hi = 60.0 / b;
    const auto integrand = [&](double y) { return std::pow(1.0 + t0 + y, kappa) * std::exp(-b * y); };
    const double val = adaptive_simpson(integrand, 0.0, y_hi, 1e-16);
    return std::pow(a, -b) * val;
}

double f_derivative(double s, SlowlyVarying sv, double kappa, double x) {
    // d/dx [ L(x) x^{-s} ]
    if (sv == SlowlyVarying::constant_one || kappa == 0.0) return -s * std::pow(x, -s - 1.0);
    const double lg = 1.0 + std::log(x);
    return std::pow(x, -s - 1.0) * std::pow(lg, kappa - 1.0) * (kappa - s * lg);
}

constexpr std::int64_t kDirectConvolutionLimit = 1 << 16;

// Divide-and-conquer online convolution: fills u[lo..hi) given that acc[n]
// already holds all contributions sum_{m < lo} u[m] K[n-m].
void cdq_solve(std::vector<double>& u, std::vector<double>& acc,
               const std::vector<double>& K, std::int64_t lo, std::int64_t hi) {
    if (hi - lo <= 128) {
        for (std::int64_t n = lo; n < hi; ++n) {
            double s = acc[static_cast<std::size_t>(n)];
            for (std::int64_t m = lo; m < n; ++m)
                s += u[static_cast<std::size_t>(m)] * K[static_cast<std::size_t>(n - m)];
            u[static_cast<std::size_t>(n)] = s;
        }
        return;
    }
    const std::int64_t mid = lo + (hi - lo) / 2;
    cdq_solve(u, acc, K, lo, mid);
    // propagate u[lo..mid) into acc[mid..hi)
    std::vector<double> a(u.begin() + lo, u.begin() + mid);
    std::vector<double> b(K.begin() + 1, K.begin() + 1 + static_cast<std::size_t>(hi - lo - 1));
    const std::vector<double> conv = detail::convolve(a, b);
    for (std::int64_t n = mid; n < hi; ++n) {
        const std::int64_t t = n - lo - 1;
        if (t >= 0 && t < static_cast<std::int64_t>(conv.size()))
            acc[static_cast<std::size_t>(n)] += conv[static_cast<std::size_t>(t)];
    }
    cdq_solve(u, acc, K, mid, hi);
}

} // namespace

double power_series_tail_sum(double s, SlowlyVarying sv, double kappa, std::int64_t from) {
    const std::int64_t direct_to = std::max<std::int64_t>(from + 16, 1 << 16);
    double sum = 0.0;
    for (std::int64_t n = direct_to; n >= from; --n)
        sum += slowly_varying_at(sv, kappa, static_cast<double>(n)) * std::pow(static_cast<double>(n), -s);
    // Euler-Maclaurin for the remainder starting at a = direct_to + 1:
    //   sum_{n>=a} f(n) = int_a^inf f + f(a)/2 - f'(a)/12 + O(f'''(a))
    const double a = static_cast<double>(direct_to + 1);
    const double fa = slowly_varying_at(sv, kappa, a) * std::pow(a, -s);
    sum += tail_integral(s, sv, kappa, a) + 0.5 * fa - f_derivative(s, sv, kappa, a) / 12.0;
    return sum;
}

RenewalLaw build_renewal_law(double alpha, SlowlyVarying sv, double kappa, std::int64_t n_max) {
    if (!(alpha > 0.0)) throw validation_error("renewal.alpha: must be > 0");
    if (n_max < 2) throw validation_error("renewal.N_max: must be >= 2");

    RenewalLaw law;
    law.alpha = alpha;
    law.slowly_varying = sv;
    law.kappa = kappa;
    law.n_max = n_max;
    law.normalization = power_series_tail_sum(1.0 + alpha, sv, kappa, 1);

    law.pmf.resize(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (std::int64_t n = 1; n <= n_max; ++n) {
        law.pmf[static_cast<std::size_t>(n)] =
            slowly_varying_at(sv, kappa, static_cast<double>(n))
            * std::pow(static_cast<double>(n), -(1.0 + alpha)) / law.normalization;
    }
    law.tail_mass = power_series_tail_sum(1.0 + alpha, sv, kappa, n_max + 1) / law.normalization;
    law.pmf_reversed.resize(law.pmf.size());
    for (std::size_t i = 0; i < law.pmf.size(); ++i)
        law.pmf_reversed[law.pmf.size() - 1 - i] = law.pmf[i];

    law.survival.resize(static_cast<std::size_t>(n_max) + 1, 0.0);
    law.survival[static_cast<std::size_t>(n_max)] = law.tail_mass;
    for (std::int64_t r = n_max - 1; r >= 0; --r)
        law.survival[static_cast<std::size_t>(r)] =
            law.survival[static_cast<std::size_t>(r + 1)] + law.pmf[static_cast<std::size_t>(r + 1)];

    if (alpha > 1.0) {
        law.mean_interarrival = power_series_tail_sum(alpha, sv, kappa, 1) / law.normalization;
    } else {
        law.mean_interarrival = std::numeric_limits<double>::infinity();
    }
    law.u_cache_.push_back(1.0); // u(0) = 1
    return law;
}

RenewalLaw deterministic_renewal_law(std::int64_t n_max) {
    if (n_max < 2) throw validation_error("renewal.N_max: must be >= 2");
    RenewalLaw law;
    law.alpha = std::numeric_limits<double>::infinity();
    law.n_max = n_max;
    law.normalization = 1.0;
    law.pmf.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    law.pmf[1] = 1.0;
    law.pmf_reversed.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    law.pmf_reversed[static_cast<std::size_t>(n_max) - 1] = 1.0;
    law.survival.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    law.survival[0] = 1.0;
    law.tail_mass = 0.0;
    law.mean_interarrival = 1.0;
    law.u_cache_.push_back(1.0);
    return law;
}

std::span<const double> RenewalLaw::renewal_mass(std::int64_t n) const {
    if (n > n_max) throw validation_error("renewal_mass: N exceeds N_max of the law");
    if (static_cast<std::int64_t>(u_cache_.size()) > n)
        return {u_cache_.data(), static_cast<std::size_t>(n) + 1};

    if (n <= kDirectConvolutionLimit) {
        std::size_t start = u_cache_.size();
        u_cache_.resize(static_cast<std::size_t>(n) + 1, 0.0);
        for (std::size_t i = start; i <= static_cast<std::size_t>(n); ++i) {
            double s = 0.0;
            for (std::size_t m = 0; m < i; ++m) s += u_cache_[m] * pmf[i - m];
            u_cache_[i] = s;
        }
    } else {
        std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
        std::vector<double> acc(static_cast<std::size_t>(n) + 1, 0.0);
        u[0] = 1.0;
        for (std::int64_t m = 1; m <= n; ++m) acc[static_cast<std::size_t>(m)] = pmf[static_cast<std::size_t>(m)];
        cdq_solve(u, acc, pmf, 1, n + 1);
        u_cache_ = std::move(u);
    }
    return {u_cache_.data(), static_cast<std::size_t>(n) + 1};
}

double RenewalLaw::dichotomy_partial_sum(std::int64_t n) const {
    double s = 0.0;
    for (std::int64_t i = 1; i <= n; ++i) {
        const double L = slowly_varying_at(slowly_varying, kappa, static_cast<double>(i));
        s += 1.0 / (static_cast<double>(i) * L * L);
    }
    return s;
}

double pinning_overlap(const RenewalLaw& law, std::int64_t n) {
    const auto u = law.renewal_mass(n);
    double r = 0.0;
    for (std::int64_t i = 1; i <= n; ++i) r += u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
    return r;
}

RenewalTrace sample_renewal(const RenewalLaw& law, std::int64_t horizon, SeedProvenance seed) {
    if (horizon > law.n_max) throw validation_error("sample_renewal: horizon exceeds N_max");
    RenewalTrace trace;
    trace.horizon = horizon;
    std::int64_t position = 0;
    std::uint64_t draw_index = 0;
    while (true) {
        const double u = rng::u01(seed.master, seed.stream, draw_index++);
        // smallest gap g with CDF(g) = 1 - survival[g] >= u
        std::int64_t lo = 1, hi = law.n_max;
        if (law.survival_of(law.n_max) > 1.0 - u) break; // gap beyond the table, hence beyond horizon
        while (lo < hi) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            if (law.survival_of(mid) <= 1.0 - u) hi = mid; else lo = mid + 1;
        }
        position += lo;
        if (position > horizon) break;
        trace.points.push_back(position);
    }
    return trace;
}

} // namespace lab
