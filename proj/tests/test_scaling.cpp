#include <doctest.h>

#include <cmath>
#include <vector>

#include "lab/disorder.hpp"
#include "lab/errors.hpp"
#include "lab/scaling.hpp"

using namespace lab;

TEST_CASE("pure free energy: root property and monotonicity") {
    const RenewalLaw law = build_renewal_law(0.75, 1 << 16);
    CHECK(pure_pinning_free_energy(law, 0.0) == 0.0);
    CHECK(pure_pinning_free_energy(law, -1.0) == 0.0);
    double prev = 0.0;
    for (double h : {0.1, 0.3, 1.0}) {
        const double f = pure_pinning_free_energy(law, h);
        CHECK(f > prev);
        prev = f;
        double phi = 0.0;
        for (std::int64_t n = 1; n <= law.n_max; ++n)
            phi += law.k_of(n) * std::exp(-f * static_cast<double>(n));
        CHECK(phi == doctest::Approx(std::exp(-h)).epsilon(1e-9));
    }
}

TEST_CASE("free energy at beta = 0: exact zero at h = 0, doubling estimator hits the root") {
    const RenewalLaw law = build_renewal_law(0.75, 1 << 16);
    const DisorderSpec spec;
    const FreeEnergyEstimate at0 = free_energy_estimate(law, spec, 0.0, 0.0, 1 << 12, 100, 9, Exec::serial);
    CHECK(at0.f_raw == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(at0.stderr_f == 0.0);

    for (double h : {0.1, 0.3, 1.0}) {
        const FreeEnergyEstimate est =
            free_energy_estimate(law, spec, 0.0, h, 1 << 12, 100, 9, Exec::serial);
        const double root = pure_pinning_free_energy(law, h);
        CAPTURE(h);
        // plain estimator carries the O(1/N) offset; the doubling report cancels it
        CHECK(std::abs(est.f_doubling - root) <= 3.0 * est.stderr_doubling + 1e-9);
        CHECK(std::abs(est.f_hat - root) <= 0.02 * std::max(root, 0.05));
        CHECK(est.f_hat >= -3.0 * est.stderr_f);
    }
}

TEST_CASE("disordered free energy: nonnegative up to noise and monotone in h") {
    const RenewalLaw law = build_renewal_law(0.75, 1 << 12);
    const DisorderSpec spec;
    const FreeEnergyEstimate lo = free_energy_estimate(law, spec, 0.3, 0.2, 1 << 12, 200, 21, Exec::serial);
    const FreeEnergyEstimate hi = free_energy_estimate(law, spec, 0.3, 0.6, 1 << 12, 200, 21, Exec::serial);
    CHECK(lo.f_hat >= -3.0 * lo.stderr_f);
    CHECK(lo.f_hat <= hi.f_hat + 3.0 * (lo.stderr_f + hi.stderr_f));
}

TEST_CASE("N floor is validated") {
    const RenewalLaw law = build_renewal_law(0.75, 1 << 12);
    CHECK_THROWS_AS(free_energy_estimate(law, DisorderSpec{}, 0.1, 0.1, 128, 10, 1, Exec::serial),
                    validation_error);
}

TEST_CASE("critical point at beta = 0 brackets zero") {
    const RenewalLaw law = build_renewal_law(0.75, 1 << 16);
    const DisorderSpec spec;
    const std::vector<double> h_grid{-0.2, -0.1, 0.0, 0.05, 0.1, 0.2};
    const CriticalPointEstimate est =
        critical_point_scan(law, spec, 0.0, h_grid, 1 << 12, 50, 3.0, 6, 33, Exec::serial);
    CHECK(est.h_lo <= 0.0 + 1e-12);
    CHECK(est.h_hi > 0.0);
    CHECK(est.h_hi <= 0.05 + 1e-12);
    CHECK(est.h_c_hat == doctest::Approx(0.5 * (est.h_lo + est.h_hi)));
}

TEST_CASE("critical point scan validates its grid") {
    const RenewalLaw law = build_renewal_law(0.75, 1 << 12);
    const DisorderSpec spec;
    const std::vector<double> unsorted{0.2, -0.2};
    CHECK_THROWS_AS(critical_point_scan(law, spec, 0.0, unsorted, 1 << 12, 10, 3.0, 2, 1, Exec::serial),
                    validation_error);
    const std::vector<double> all_cold{-2.0, -1.5};
    CHECK_THROWS_WITH_AS(
        critical_point_scan(law, spec, 0.0, all_cold, 1 << 12, 10, 3.0, 2, 1, Exec::serial),
        doctest::Contains("bracketing"), validation_error);
}

TEST_CASE("scaling collapse: pure-model oracle at beta_hat = 0 and delocalized zero") {
    const RenewalLaw law = build_renewal_law(0.75, 1 << 14);
    const DisorderSpec spec;
    const std::vector<double> deltas{1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0};

    const auto pure = scaling_collapse(law, spec, 0.0, 1.0, deltas, 1 << 13, 8, 3, Exec::serial);
    for (const auto& p : pure) {
        const double root = pure_pinning_free_energy(law, p.h);
        CAPTURE(p.delta);
        CHECK(std::abs(p.collapsed_value - root / p.delta) <= 3.0 * p.stderr_collapsed + 1e-8);
    }

    const auto deloc = scaling_collapse(law, spec, 0.5, -50.0, deltas, 1 << 13, 8, 3, Exec::serial);
    for (const auto& p : deloc) CHECK(p.collapsed_value <= 1e-6);

    CHECK_THROWS_AS(scaling_collapse(build_renewal_law(1.5, 1024), spec, 1.0, 1.0, deltas, 512, 4, 1,
                                     Exec::serial),
                    validation_error);
}
