#include <doctest.h>

#include <cmath>
#include <vector>

#include "lab/disorder.hpp"
#include "lab/errors.hpp"
#include "lab/renewal.hpp"

using namespace lab;

namespace {

// Independent zeta oracle: partial sum + Euler-Maclaurin tail, written from
// scratch so it does not share code with the library normalization.
double zeta_oracle(double s) {
    const std::int64_t cut = 50000;
    double sum = 0.0;
    for (std::int64_t n = cut; n >= 1; --n) sum += std::pow(static_cast<double>(n), -s);
    const double a = static_cast<double>(cut + 1);
    sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s)
         + s / 12.0 * std::pow(a, -s - 1.0);
    return sum;
}

} // namespace

TEST_CASE("zeta-style normalization against known constants") {
    // pi^2/6 and pi^4/90 are exact references
    CHECK(power_series_tail_sum(2.0, SlowlyVarying::constant_one, 0.0, 1)
          == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-12));
    CHECK(power_series_tail_sum(4.0, SlowlyVarying::constant_one, 0.0, 1)
          == doctest::Approx(std::pow(M_PI, 4) / 90.0).epsilon(1e-12));
}

TEST_CASE("log-power tails match a closed-form integral oracle") {
    // For kappa = 2: int_a^inf (1+ln x)^2 x^{-s} dx has an elementary form.
    const double s = 1.75, kappa = 2.0;
    const std::int64_t cut = 200000;
    double direct = 0.0;
    for (std::int64_t n = cut; n >= 1; --n) {
        const double lg = 1.0 + std::log(static_cast<double>(n));
        direct += lg * lg * std::pow(static_cast<double>(n), -s);
    }
    const double a = static_cast<double>(cut + 1);
    const double b = s - 1.0;
    const double la = 1.0 + std::log(a);
    const double integral = std::pow(a, -b) * (la * la / b + 2.0 * la / (b * b) + 2.0 / (b * b * b));
    const double fa = la * la * std::pow(a, -s);
    direct += integral + 0.5 * fa;
    CHECK(power_series_tail_sum(s, SlowlyVarying::log_power, kappa, 1)
          == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("inter-arrival normalization: K(1) = 1/zeta(1+alpha) for L == 1") {
    const RenewalLaw law = build_renewal_law(0.75, 64);
    CHECK(law.k_of(1) == doctest::Approx(1.0 / zeta_oracle(1.75)).epsilon(1e-11));
}

TEST_CASE("finite mean: zeta(1.5)/zeta(2.5) at alpha = 1.5") {
    const RenewalLaw law = build_renewal_law(1.5, 64);
    CHECK(law.mean_interarrival == doctest::Approx(zeta_oracle(1.5) / zeta_oracle(2.5)).epsilon(1e-11));
    CHECK(std::isinf(build_renewal_law(0.75, 16).mean_interarrival));
}

TEST_CASE("pmf mass and tail deficit") {
    const RenewalLaw law = build_renewal_law(0.75, 4096);
    double mass = 0.0;
    for (std::int64_t n = 1; n <= law.n_max; ++n) {
        CHECK(law.k_of(n) >= 0.0);
        mass += law.k_of(n);
    }
    CHECK(mass <= 1.0);
    CHECK(mass + law.tail_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(law.survival_of(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("law tables are exactly reproducible") {
    const RenewalLaw a = build_renewal_law(0.5, SlowlyVarying::log_power, 1.0, 512);
    const RenewalLaw b = build_renewal_law(0.5, SlowlyVarying::log_power, 1.0, 512);
    CHECK(a.pmf == b.pmf);
    CHECK(a.normalization == b.normalization);
}

TEST_CASE("alpha <= 0 is rejected") {
    CHECK_THROWS_AS(build_renewal_law(0.0, 16), validation_error);
    CHECK_THROWS_AS(build_renewal_law(-1.0, 16), validation_error);
}

TEST_CASE("renewal mass function: origin, consistency, bounds") {
    const RenewalLaw law = build_renewal_law(0.75, 2048);
    const auto u = law.renewal_mass(2048);
    CHECK(u[0] == 1.0);
    for (std::int64_t n = 1; n <= 2048; ++n) {
        CHECK(u[static_cast<std::size_t>(n)] >= 0.0);
        CHECK(u[static_cast<std::size_t>(n)] <= 1.0);
    }
    // renewal equation residual, relative to u(n)
    for (std::int64_t n : {1, 2, 17, 256, 2047}) {
        double s = 0.0;
        for (std::int64_t m = 1; m <= n; ++m)
            s += law.k_of(m) * u[static_cast<std::size_t>(n - m)];
        CHECK(std::abs(s - u[static_cast<std::size_t>(n)]) <= 1e-12 * u[static_cast<std::size_t>(n)]);
    }
}

TEST_CASE("deterministic period-1 law: u == 1, overlap == N, full trace") {
    const RenewalLaw law = deterministic_renewal_law(64);
    const auto u = law.renewal_mass(64);
    for (std::int64_t n = 0; n <= 64; ++n) CHECK(u[static_cast<std::size_t>(n)] == doctest::Approx(1.0));
    CHECK(pinning_overlap(law, 64) == doctest::Approx(64.0).epsilon(1e-12));
    const RenewalTrace trace = sample_renewal(law, 10, {1, 2});
    REQUIRE(trace.points.size() == 10);
    for (std::int64_t i = 0; i < 10; ++i) CHECK(trace.points[static_cast<std::size_t>(i)] == i + 1);
}

TEST_CASE("renewal theorem constant: n^{1-alpha} u(n) -> C_alpha * normalization") {
    // For the normalized pmf K(n) = n^{-(1+alpha)}/c the slowly varying
    // factor of the mass function is 1/c, so the limit constant picks up c.
    const RenewalLaw law = build_renewal_law(0.75, 10000);
    const auto u = law.renewal_mass(10000);
    const double c_alpha = 0.75 * std::sin(0.75 * M_PI) / M_PI;
    CHECK(c_alpha == doctest::Approx(0.16878).epsilon(1e-3));
    const double limit = c_alpha * law.normalization;
    const double scaled = std::pow(10000.0, 0.25) * u[10000];
    CHECK(std::abs(scaled - limit) <= 0.10 * limit);
}

TEST_CASE("FFT doubling extension agrees with the direct recursion") {
    const RenewalLaw direct_law = build_renewal_law(0.5, 70000);
    const RenewalLaw fft_law = build_renewal_law(0.5, 70000);
    const auto u_direct = direct_law.renewal_mass(60000); // direct path (<= 2^16)
    const auto u_fft = fft_law.renewal_mass(70000);       // divide-and-conquer path
    for (std::int64_t n : {0, 1, 100, 999, 32768, 59999})
        CHECK(u_fft[static_cast<std::size_t>(n)]
              == doctest::Approx(u_direct[static_cast<std::size_t>(n)]).epsilon(1e-11));
    // renewal identity deep in the FFT-filled range
    for (std::int64_t n : {65536, 69999}) {
        double s = 0.0;
        for (std::int64_t m = 1; m <= n; ++m)
            s += fft_law.k_of(m) * u_fft[static_cast<std::size_t>(n - m)];
        CHECK(std::abs(s - u_fft[static_cast<std::size_t>(n)]) <= 1e-11 * u_fft[static_cast<std::size_t>(n)]);
    }
}

TEST_CASE("overlap: monotone; summable for alpha < 1/2; diverging like sqrt(N) for alpha = 3/4") {
    const RenewalLaw relevant = build_renewal_law(0.75, 1 << 18);
    const RenewalLaw irrelevant = build_renewal_law(0.3, 1 << 18);

    double prev = 0.0;
    for (std::int64_t n : {16, 64, 256, 1024}) {
        const double r = pinning_overlap(relevant, n);
        CHECK(r >= prev);
        prev = r;
    }
    // alpha = 0.3: sum u(n)^2 < inf since 2(1-alpha) > 1; tail increments vanish
    const double r16 = pinning_overlap(irrelevant, 1 << 16);
    const double r18 = pinning_overlap(irrelevant, 1 << 18);
    CHECK(r18 - r16 < 0.01 * r16);
    // alpha = 0.75: R_N ~ c sqrt(N), so R_{4N} ~ 2 R_N
    const double r_base = pinning_overlap(relevant, 1 << 16);
    const double r_quad = pinning_overlap(relevant, 1 << 18);
    CHECK(std::abs(r_quad / (2.0 * r_base) - 1.0) < 0.1);
}

TEST_CASE("marginal alpha = 1/2: slowly varying divergence, R_{N^2} ~ 2 R_N") {
    const RenewalLaw law = build_renewal_law(0.5, 1 << 20);
    const double r_n = pinning_overlap(law, 1 << 10);
    const double r_n2 = pinning_overlap(law, 1 << 20);
    CHECK(std::abs(r_n2 / (2.0 * r_n) - 1.0) <= 0.15);
    // R_N / log N: positive, slowly drifting
    double prev_ratio = 1e30;
    for (std::int64_t n : {1 << 10, 1 << 14, 1 << 18, 1 << 20}) {
        const double ratio = pinning_overlap(law, n) / std::log(static_cast<double>(n));
        CHECK(ratio > 0.0);
        CHECK(ratio < prev_ratio);
        prev_ratio = ratio;
    }
}

TEST_CASE("marginal dichotomy partial sums: L == 1 diverges, kappa = 1 saturates") {
    const RenewalLaw plain = build_renewal_law(0.5, 4);
    const RenewalLaw damped = build_renewal_law(0.5, SlowlyVarying::log_power, 1.0, 4);
    const double grow = plain.dichotomy_partial_sum(1 << 20) - plain.dichotomy_partial_sum(1 << 10);
    const double damp = damped.dichotomy_partial_sum(1 << 20) - damped.dichotomy_partial_sum(1 << 10);
    CHECK(grow > 6.0);  // ~ log(2^10)
    CHECK(damp < 0.15); // sum 1/(n (1+log n)^2) converges
}

TEST_CASE("sampled renewals reproduce the mass function") {
    const RenewalLaw law = build_renewal_law(0.75, 64);
    const auto u = law.renewal_mass(50);
    const std::int64_t traces = 100000;
    std::vector<std::int64_t> hits(51, 0);
    for (std::int64_t t = 0; t < traces; ++t) {
        const RenewalTrace trace = sample_renewal(law, 50, {900, static_cast<std::uint64_t>(t)});
        for (std::int64_t p : trace.points) ++hits[static_cast<std::size_t>(p)];
    }
    for (std::int64_t n = 1; n <= 50; ++n) {
        const double p = u[static_cast<std::size_t>(n)];
        const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(traces));
        CHECK(std::abs(static_cast<double>(hits[static_cast<std::size_t>(n)]) / traces - p) <= 5.0 * se);
    }
    const RenewalTrace a = sample_renewal(law, 50, {900, 1});
    const RenewalTrace b = sample_renewal(law, 50, {900, 1});
    CHECK(a.points == b.points);
}
