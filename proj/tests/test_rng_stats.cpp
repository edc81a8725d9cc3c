#include <doctest.h>

#include <cmath>
#include <vector>

#include "lab/rng.hpp"
#include "lab/stats.hpp"

using namespace lab;

TEST_CASE("philox blocks are pure functions of (key, stream, index)") {
    const auto a = rng::philox2x64(1, 2, 3);
    const auto b = rng::philox2x64(1, 2, 3);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
    const auto c = rng::philox2x64(1, 2, 4);
    CHECK(a.lo != c.lo);
}

TEST_CASE("uniforms stay inside (0,1) and pass a coarse moment check") {
    MomentAccumulator acc;
    for (int i = 0; i < 200000; ++i) {
        const double u = rng::u01(7, 11, static_cast<std::uint64_t>(i));
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        acc.add(u);
    }
    const auto s = moment_summary(acc);
    CHECK(std::abs(s.mean - 0.5) < 5.0 * s.se_mean);
    CHECK(std::abs(s.variance - 1.0 / 12.0) < 1e-3);
}

TEST_CASE("gaussian site draws have standard moments") {
    MomentAccumulator acc;
    for (int i = 0; i < 400000; ++i) acc.add(rng::gaussian(3, 5, static_cast<std::uint64_t>(i)));
    const auto s = moment_summary(acc);
    CHECK(std::abs(s.mean) < 5.0 * s.se_mean);
    CHECK(std::abs(s.variance - 1.0) < 0.02);
    CHECK(std::abs(s.kurtosis - 3.0) < 5.0 * s.se_kurtosis);
}

TEST_CASE("sign blocks match per-index signs") {
    std::vector<signed char> block(300);
    rng::fill_signs(9, 4, 1000, block.size(), block.data());
    for (std::size_t i = 0; i < block.size(); ++i)
        CHECK(static_cast<int>(block[i]) == rng::sign_at(9, 4, 1000 + i));
}

TEST_CASE("distinct streams decorrelate") {
    double dot = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        dot += rng::gaussian(3, 1, static_cast<std::uint64_t>(i)) * rng::gaussian(3, 2, static_cast<std::uint64_t>(i));
    CHECK(std::abs(dot / n) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("moment accumulator merge equals concatenation") {
    std::vector<double> xs;
    for (int i = 0; i < 1000; ++i) xs.push_back(std::sin(0.1 * i) + 0.01 * i);
    MomentAccumulator whole, left, right;
    for (int i = 0; i < 1000; ++i) (i < 400 ? left : right).add(xs[static_cast<std::size_t>(i)]);
    for (double x : xs) whole.add(x);
    left.merge(right);
    CHECK(left.count == whole.count);
    CHECK(std::abs(left.mean - whole.mean) < 1e-12 * std::abs(whole.mean));
    CHECK(std::abs(left.m2 - whole.m2) < 1e-10 * std::abs(whole.m2));
    CHECK(std::abs(left.m3 - whole.m3) < 1e-10 * std::abs(whole.m3) + 1e-12);
    CHECK(std::abs(left.m4 - whole.m4) < 1e-10 * std::abs(whole.m4));
}

TEST_CASE("merge is associative across a tree of partials") {
    std::vector<MomentAccumulator> parts(7);
    int k = 0;
    for (int i = 0; i < 700; ++i) parts[static_cast<std::size_t>(i % 7)].add(std::cos(0.3 * i) * (1 + i % 5)), ++k;
    MomentAccumulator forward;
    for (auto& p : parts) forward.merge(p);
    MomentAccumulator pairwise;
    MomentAccumulator ab = parts[0]; ab.merge(parts[1]);
    MomentAccumulator cd = parts[2]; cd.merge(parts[3]);
    MomentAccumulator ef = parts[4]; ef.merge(parts[5]);
    ab.merge(cd); ab.merge(ef); ab.merge(parts[6]);
    CHECK(std::abs(forward.m4 - ab.m4) < 1e-10 * std::abs(forward.m4));
}

TEST_CASE("constant stream flags undefined shape") {
    MomentAccumulator acc;
    for (int i = 0; i < 10; ++i) acc.add(2.5);
    const auto s = moment_summary(acc);
    CHECK(s.variance == 0.0);
    CHECK_FALSE(s.shape_defined);
}

TEST_CASE("one-sample KS against the sample's own law sits at the null scale") {
    std::vector<double> xs;
    const int n = 10000;
    for (int i = 0; i < n; ++i) xs.push_back(rng::gaussian(17, 1, static_cast<std::uint64_t>(i)));
    const double d = ks_statistic(xs, [](double x) { return normal_cdf(x); });
    CHECK(d < ks_critical_1pct(n));
}

TEST_CASE("identical samples have zero two-sample KS") {
    std::vector<double> xs{0.3, -1.0, 2.0, 0.0, 5.0};
    CHECK(ks_statistic(std::span<const double>(xs), std::span<const double>(xs)) == 0.0);
}

TEST_CASE("KS detects a unit mean shift at the analytic sup distance") {
    // sup_x |Phi(x-1) - Phi(x)| = Phi(1/2) - Phi(-1/2)
    std::vector<double> xs;
    const int n = 200000;
    for (int i = 0; i < n; ++i) xs.push_back(1.0 + rng::gaussian(23, 9, static_cast<std::uint64_t>(i)));
    const double d = ks_statistic(xs, [](double x) { return normal_cdf(x); });
    const double expected = normal_cdf(0.5) - normal_cdf(-0.5);
    CHECK(std::abs(d - expected) < 0.01);
}

TEST_CASE("KS is invariant under a strictly increasing transform") {
    std::vector<double> a, b;
    for (int i = 0; i < 2000; ++i) {
        a.push_back(rng::gaussian(31, 1, static_cast<std::uint64_t>(i)));
        b.push_back(0.5 + rng::gaussian(31, 2, static_cast<std::uint64_t>(i)));
    }
    const double d_raw = ks_statistic(std::span<const double>(a), std::span<const double>(b));
    std::vector<double> ea, eb;
    for (double x : a) ea.push_back(std::exp(x));
    for (double x : b) eb.push_back(std::exp(x));
    const double d_exp = ks_statistic(std::span<const double>(ea), std::span<const double>(eb));
    CHECK(d_raw == doctest::Approx(d_exp).epsilon(1e-12));
}
