#include <doctest.h>

#include <cmath>
#include <vector>

#include "lab/chaos.hpp"
#include "lab/lattice.hpp"
#include "lab/marginal.hpp"
#include "lab/partition.hpp"
#include "lab/rng.hpp"
#include "lab/scaling.hpp"
#include "lab/stats.hpp"

using namespace lab;

namespace {

// Direct enumeration over all renewal configurations in [1, N]: the
// probability of seeing exactly the set A is prod K(gaps) times either the
// survival of the last gap (free) or a final arrival constraint.
double pinning_enumerate(const RenewalLaw& law, std::span<const double> omega, double beta,
                         double h, std::int64_t n, Endpoint ep) {
    const std::uint32_t masks = static_cast<std::uint32_t>(1) << n;
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < masks; ++mask) {
        if (ep == Endpoint::constrained && ((mask >> (n - 1)) & 1) == 0) continue;
        double prob = 1.0;
        double field = 0.0;
        std::int64_t prev = 0;
        for (std::int64_t site = 1; site <= n; ++site) {
            if (((mask >> (site - 1)) & 1) == 0) continue;
            prob *= law.k_of(site - prev);
            field += beta * omega[static_cast<std::size_t>(site - 1)] + h;
            prev = site;
        }
        if (ep == Endpoint::free_end) prob *= law.survival_of(n - prev);
        total += prob * std::exp(field);
    }
    return total;
}

} // namespace

TEST_CASE("pinning: free endpoint with no coupling is exactly 1") {
    const RenewalLaw law = build_renewal_law(0.75, 64);
    std::vector<double> omega(32, 1.7);
    const PartitionValue z = pinning_partition(law, omega, 0.0, 0.0, 32, Endpoint::free_end);
    CHECK(z.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z.log_value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pinning: N = 1 constrained is a single configuration") {
    const RenewalLaw law = build_renewal_law(0.75, 64);
    std::vector<double> omega{0.9};
    const PartitionValue z = pinning_partition(law, omega, 0.6, -0.1, 1, Endpoint::constrained);
    CHECK(z.value == doctest::Approx(law.k_of(1) * std::exp(0.6 * 0.9 - 0.1)).epsilon(1e-14));
}

TEST_CASE("pinning recursion equals configuration enumeration at N = 12") {
    const RenewalLaw law = build_renewal_law(0.6, 64);
    const DisorderSpec spec;
    for (int env = 0; env < 20; ++env) {
        std::vector<double> omega(12);
        for (int i = 0; i < 12; ++i)
            omega[static_cast<std::size_t>(i)] =
                sample_site(spec, 5, static_cast<std::uint64_t>(env), static_cast<std::uint64_t>(i + 1));
        for (Endpoint ep : {Endpoint::free_end, Endpoint::constrained}) {
            const PartitionValue z = pinning_partition(law, omega, 0.5, -0.2, 12, ep);
            const double brute = pinning_enumerate(law, omega, 0.5, -0.2, 12, ep);
            CHECK(z.value == doctest::Approx(brute).epsilon(1e-12));
        }
    }
}

TEST_CASE("pinning rescaling: deep localized phase stays finite and accurate") {
    const RenewalLaw law = build_renewal_law(0.75, 4096);
    // beta = 0, large h: deterministic, Z ~ e^{F N} with F = pure free energy
    std::vector<double> omega(4096, 0.0);
    const PartitionValue z = pinning_partition(law, omega, 0.0, 3.0, 4096, Endpoint::free_end);
    CHECK(std::isfinite(z.log_value));
    const double f = pure_pinning_free_energy(law, 3.0);
    CHECK(z.log_value / 4096.0 == doctest::Approx(f).epsilon(1e-2));

    // long-double direct recursion (no rescaling) as an independent check
    std::vector<long double> zz(1025, 0.0L);
    zz[0] = 1.0L;
    const double h = 0.5;
    for (std::int64_t n = 1; n <= 1024; ++n) {
        long double s = 0.0L;
        for (std::int64_t m = 0; m < n; ++m) s += zz[static_cast<std::size_t>(m)] * static_cast<long double>(law.k_of(n - m));
        zz[static_cast<std::size_t>(n)] = std::exp(static_cast<long double>(h)) * s;
    }
    long double free_sum = 0.0L;
    for (std::int64_t m = 0; m <= 1024; ++m)
        free_sum += zz[static_cast<std::size_t>(m)] * static_cast<long double>(law.survival_of(1024 - m));
    std::vector<double> omega2(1024, 0.0);
    const PartitionValue z2 = pinning_partition(law, omega2, 0.0, h, 1024, Endpoint::free_end);
    CHECK(z2.log_value == doctest::Approx(static_cast<double>(std::log(free_sum))).epsilon(1e-11));
}

TEST_CASE("polymer transfer equals path enumeration (1d and 2d)") {
    const DisorderSpec spec;
    const double beta = 0.5;
    const double shift = -log_mgf(spec, beta);

    const WalkLaw w1 = make_ssrw_1d();
    for (int env = 0; env < 10; ++env) {
        const std::uint64_t stream = static_cast<std::uint64_t>(env);
        const auto omega = [&](std::int64_t n, std::int64_t x, std::int64_t) {
            return sample_site(spec, 21, stream, pack_site_1d(n, x));
        };
        const PartitionValue z = polymer_partition(w1, omega, beta, shift, 10, PolymerMode::point_to_plane);
        const double brute = polymer_partition_enumerate(w1, omega, beta, shift, 10, PolymerMode::point_to_plane);
        CHECK(z.value == doctest::Approx(brute).epsilon(1e-12));

        const PartitionValue zp = polymer_partition(w1, omega, beta, shift, 10, PolymerMode::point_to_point, 2);
        const double brute_p =
            polymer_partition_enumerate(w1, omega, beta, shift, 10, PolymerMode::point_to_point, 2);
        CHECK(zp.value == doctest::Approx(brute_p).epsilon(1e-12));
    }

    const WalkLaw w2 = make_ssrw_2d();
    for (int env = 0; env < 5; ++env) {
        const std::uint64_t stream = static_cast<std::uint64_t>(100 + env);
        const auto omega = [&](std::int64_t n, std::int64_t x, std::int64_t y) {
            return sample_site(spec, 21, stream, pack_site_2d(n, x, y));
        };
        const PartitionValue z = polymer_partition(w2, omega, beta, shift, 6, PolymerMode::point_to_plane);
        const double brute = polymer_partition_enumerate(w2, omega, beta, shift, 6, PolymerMode::point_to_plane);
        CHECK(z.value == doctest::Approx(brute).epsilon(1e-12));
    }
}

TEST_CASE("centered polymer has mean one: exact over enumerable environments") {
    // rademacher environment on the N = 3 cone of the 1d walk: 9 sites
    const WalkLaw w1 = make_ssrw_1d();
    DisorderSpec spec;
    spec.family = DisorderFamily::rademacher;
    const double beta = 0.7;
    const double shift = -log_mgf(spec, beta);

    std::vector<std::pair<std::int64_t, std::int64_t>> sites;
    for (std::int64_t n = 1; n <= 3; ++n)
        for (std::int64_t x = -n; x <= n; x += 2) sites.push_back({n, x});
    REQUIRE(sites.size() == 9);

    double mean = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << 9); ++mask) {
        const auto omega = [&](std::int64_t n, std::int64_t x, std::int64_t) {
            for (std::size_t i = 0; i < sites.size(); ++i)
                if (sites[i].first == n && sites[i].second == x)
                    return ((mask >> i) & 1) ? 1.0 : -1.0;
            return 0.0;
        };
        mean += polymer_partition(w1, omega, beta, shift, 3, PolymerMode::point_to_plane).value;
    }
    mean /= static_cast<double>(1u << 9);
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("centered polymer has mean one: Monte Carlo point-to-plane") {
    const WalkLaw w2 = make_ssrw_2d();
    PolymerBatch batch;
    batch.walk = &w2;
    batch.disorder = DisorderSpec{}; // gaussian
    batch.beta = 0.4;
    const std::int64_t horizon[1] = {48};
    const std::int64_t samples = 4000;
    std::vector<double> log_z(samples);
    batch_polymer_log_z(batch, {horizon, 1}, samples, 77, 0, log_z, Exec::serial);
    MomentAccumulator acc;
    for (double lz : log_z) acc.add(std::exp(lz));
    const auto s = moment_summary(acc);
    CHECK(std::abs(s.mean - 1.0) <= 5.0 * s.se_mean);
}

TEST_CASE("batch polymer equals the explicit-field evaluation replica by replica") {
    const WalkLaw w1 = make_ssrw_1d();
    DisorderSpec spec; // gaussian
    PolymerBatch batch;
    batch.walk = &w1;
    batch.disorder = spec;
    batch.beta = 0.35;
    const std::int64_t horizon[1] = {48};
    std::vector<double> log_z(4);
    batch_polymer_log_z(batch, {horizon, 1}, 4, 31, 0, log_z, Exec::serial);
    const double shift = -log_mgf(spec, 0.35);
    for (std::uint64_t r = 0; r < 4; ++r) {
        const auto omega = [&](std::int64_t n, std::int64_t x, std::int64_t) {
            return sample_site(spec, 31, r, pack_site_1d(n, x));
        };
        const PartitionValue z =
            polymer_partition(w1, omega, 0.35, shift, 48, PolymerMode::point_to_plane, 0, 0, 4.5);
        CHECK(z.log_value == doctest::Approx(log_z[r]).epsilon(1e-9));
    }
}

TEST_CASE("pinning replica identity: three routes at N = 8") {
    // E[Z^2] over an exhaustive rademacher environment equals the
    // coincidence-chain formula and the pair-enumeration expectation.
    const RenewalLaw law = build_renewal_law(0.6, 32);
    DisorderSpec spec;
    spec.family = DisorderFamily::rademacher;
    const double beta = 0.5;
    const double h = -log_mgf(spec, beta);
    const std::int64_t n = 8;

    double mean_sq = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<double> omega(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i)
            omega[static_cast<std::size_t>(i)] = ((mask >> i) & 1) ? 1.0 : -1.0;
        const double z = pinning_enumerate(law, omega, beta, h, n, Endpoint::free_end);
        mean_sq += z * z;
    }
    mean_sq /= static_cast<double>(1u << n);

    const double lambda = lambda_exponent(spec, beta);
    const std::int64_t horizon[1] = {n};
    const double oracle = pinning_second_moment_exact(law, lambda, {horizon, 1})[0];
    CHECK(mean_sq == doctest::Approx(oracle).epsilon(1e-12));

    // pair enumeration of E (x) E[e^{lambda |tau cap tau' cap [1,N]|}]
    double pair_sum = 0.0;
    const auto config_prob = [&](std::uint32_t mask) {
        double prob = 1.0;
        std::int64_t prev = 0;
        for (std::int64_t site = 1; site <= n; ++site) {
            if (((mask >> (site - 1)) & 1) == 0) continue;
            prob *= law.k_of(site - prev);
            prev = site;
        }
        return prob * law.survival_of(n - prev);
    };
    for (std::uint32_t a = 0; a < (1u << n); ++a)
        for (std::uint32_t b = 0; b < (1u << n); ++b)
            pair_sum += config_prob(a) * config_prob(b)
                      * std::exp(lambda * std::popcount(a & b));
    CHECK(pair_sum == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("continuum pinning sampler: closed-form moments") {
    ContinuumPinningParams params;
    params.beta_hat = 0.0;
    params.h_hat = 0.8;
    params.t = 1.0;
    params.mean_interarrival = 2.0;
    CHECK(continuum_pinning_sample(params, {1, 1}) == doctest::Approx(std::exp(0.4)).epsilon(1e-14));

    params.beta_hat = 1.0;
    MomentAccumulator acc;
    const std::int64_t samples = 1000000;
    for (std::int64_t r = 0; r < samples; ++r)
        acc.add(continuum_pinning_sample(params, {55, static_cast<std::uint64_t>(r)}));
    const auto s = moment_summary(acc);
    const double m = params.mean_interarrival;
    const double mean_expect = std::exp(params.h_hat * params.t / m);
    CHECK(std::abs(s.mean - mean_expect) <= 5.0 * s.se_mean);
    // E[Z^2] = e^{2 h t/m + beta^2 t/m^2}
    MomentAccumulator acc2;
    for (std::int64_t r = 0; r < samples; ++r) {
        const double z = continuum_pinning_sample(params, {55, static_cast<std::uint64_t>(r)});
        acc2.add(z * z);
    }
    const auto s2 = moment_summary(acc2);
    const double m2_expect = std::exp(2.0 * params.h_hat * params.t / m
                                      + params.beta_hat * params.beta_hat * params.t / (m * m));
    CHECK(std::abs(s2.mean - m2_expect) <= 5.0 * s2.se_mean);

    params.mean_interarrival = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(continuum_pinning_sample(params, {1, 1}), validation_error);
}

TEST_CASE("polymer window loss is small and certified") {
    const WalkLaw w2 = make_ssrw_2d();
    const double loss = polymer_window_loss(w2, 256, 4.5);
    CHECK(loss >= 0.0);
    CHECK(loss < 1e-3);
    PolymerBatch batch;
    batch.walk = &w2;
    batch.disorder = DisorderSpec{};
    batch.beta = 0.1;
    batch.window_sigmas = 1.0; // absurdly tight window
    batch.window_tol = 1e-3;
    const std::int64_t horizon[1] = {256};
    std::vector<double> out(1);
    CHECK_THROWS_AS(batch_polymer_log_z(batch, {horizon, 1}, 1, 5, 0, out, Exec::serial),
                    resource_error);
}

TEST_CASE("field length mismatch is a validation error") {
    const RenewalLaw law = build_renewal_law(0.75, 64);
    std::vector<double> omega(5, 0.0);
    CHECK_THROWS_AS(pinning_partition(law, omega, 0.1, 0.0, 6, Endpoint::free_end), validation_error);
}
