#include <doctest.h>

#include <cmath>
#include <vector>

#include "lab/disorder.hpp"
#include "lab/errors.hpp"
#include "lab/stats.hpp"

using namespace lab;

namespace {

DisorderSpec spec_of(DisorderFamily f) {
    DisorderSpec s;
    s.family = f;
    return s;
}

const DisorderFamily kFamilies[] = {DisorderFamily::standard_gaussian, DisorderFamily::rademacher,
                                    DisorderFamily::centered_exponential};

} // namespace

TEST_CASE("log-MGF closed forms") {
    CHECK(log_mgf(spec_of(DisorderFamily::standard_gaussian), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(log_mgf(spec_of(DisorderFamily::rademacher), 0.0) == 0.0);
    CHECK(log_mgf(spec_of(DisorderFamily::rademacher), 1.0)
          == doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-14));
    // exponential family: -beta - log(1-beta)
    CHECK(log_mgf(spec_of(DisorderFamily::centered_exponential), 0.3)
          == doctest::Approx(-0.3 - std::log(0.7)).epsilon(1e-14));
}

TEST_CASE("beta outside the admissible interval raises with family and bound") {
    const DisorderSpec spec = spec_of(DisorderFamily::centered_exponential);
    CHECK_THROWS_WITH_AS(log_mgf(spec, 0.75),
                         doctest::Contains("centered-exponential"), validation_error);
    CHECK_THROWS_AS(log_mgf(spec_of(DisorderFamily::standard_gaussian), 50.0), validation_error);
}

TEST_CASE("families are centered with unit variance (Monte Carlo)") {
    for (DisorderFamily f : kFamilies) {
        const DisorderSpec spec = spec_of(f);
        MomentAccumulator acc;
        for (int i = 0; i < 100000; ++i) acc.add(sample_site(spec, 42, 7, static_cast<std::uint64_t>(i)));
        const auto s = moment_summary(acc);
        CAPTURE(family_name(f));
        CHECK(std::abs(s.mean) < 5.0 * s.se_mean);
        CHECK(std::abs(s.variance - 1.0) < 5.0 * s.se_variance);
    }
}

TEST_CASE("sample_field is deterministic and respects support") {
    const DisorderSpec spec = spec_of(DisorderFamily::rademacher);
    std::vector<std::uint64_t> sites;
    for (std::uint64_t i = 1; i <= 1000; ++i) sites.push_back(i);
    const DisorderField a = sample_field(spec, sites, {11, 3});
    const DisorderField b = sample_field(spec, sites, {11, 3});
    CHECK(a.values == b.values);
    for (double v : a.values) CHECK((v == 1.0 || v == -1.0));

    const DisorderField c = sample_field(spec, sites, {11, 4});
    CHECK(a.values != c.values);
}

TEST_CASE("gaussian field sample mean obeys the CLT bound") {
    const DisorderSpec spec = spec_of(DisorderFamily::standard_gaussian);
    std::vector<std::uint64_t> sites;
    for (std::uint64_t i = 0; i < 100000; ++i) sites.push_back(i);
    const DisorderField f = sample_field(spec, sites, {5, 0});
    double mean = 0.0;
    for (double v : f.values) mean += v;
    mean /= static_cast<double>(f.values.size());
    CHECK(std::abs(mean) < 4.0 / std::sqrt(100000.0));
}

TEST_CASE("eta transform: beta = h = 0 gives exactly zero") {
    const DisorderSpec spec = spec_of(DisorderFamily::standard_gaussian);
    std::vector<std::uint64_t> sites{1, 2, 3};
    const EtaField eta = eta_transform(sample_field(spec, sites, {1, 1}), 0.0, 0.0);
    for (double v : eta.values) CHECK(v == 0.0);
}

TEST_CASE("centered eta has mean 0 and the MGF-algebra variance") {
    // gaussian, beta = 0.5, h = -M(beta) = -0.125: Var eta = e^{0.25} - 1
    const DisorderSpec spec = spec_of(DisorderFamily::standard_gaussian);
    const double beta = 0.5;
    const double h = -log_mgf(spec, beta);
    CHECK(h == doctest::Approx(-0.125).epsilon(1e-15));
    CHECK(eta_mean(spec, beta, h) == 0.0);
    const double var_closed = eta_variance(spec, beta, h);
    CHECK(var_closed == doctest::Approx(std::exp(0.25) - 1.0).epsilon(1e-13));

    MomentAccumulator acc;
    std::vector<std::uint64_t> sites;
    for (std::uint64_t i = 0; i < 1000000; ++i) sites.push_back(i);
    const EtaField eta = eta_transform(sample_field(spec, sites, {77, 0}), beta, h);
    for (double v : eta.values) acc.add(v);
    const auto s = moment_summary(acc);
    CHECK(std::abs(s.mean) < 5.0 * s.se_mean);
    CHECK(std::abs(s.variance - var_closed) < 5.0 * s.se_variance);
    for (double v : eta.values) CHECK(v > -1.0);
}

TEST_CASE("small-coupling moments track the Taylor values across families") {
    // |E[eta] - (h + beta^2/2)| <= C (|h|+beta^2)^{3/2}, |Var - beta^2| <= C |beta|^3
    const double c_bound = 4.0;
    for (DisorderFamily f : kFamilies) {
        const DisorderSpec spec = spec_of(f);
        for (double beta : {0.02, 0.05, 0.1}) {
            for (double h : {-0.1, -0.01, 0.0, 0.01, 0.1}) {
                CAPTURE(family_name(f));
                CAPTURE(beta);
                CAPTURE(h);
                const double mean = eta_mean(spec, beta, h);
                const double var = eta_variance(spec, beta, h);
                const double x = std::abs(h) + beta * beta;
                CHECK(std::abs(mean - (h + 0.5 * beta * beta)) <= c_bound * std::pow(x, 1.5));
                CHECK(std::abs(var - beta * beta) <= c_bound * beta * beta * beta
                                                      + c_bound * std::abs(h) * beta * beta);
            }
        }
    }
}

TEST_CASE("family swap at h = -M(beta) matches means exactly and variances to O(beta^3)") {
    const double beta = 0.1;
    for (DisorderFamily f : kFamilies) {
        const DisorderSpec spec = spec_of(f);
        const double h = -log_mgf(spec, beta);
        CHECK(eta_mean(spec, beta, h) == 0.0);
        CHECK(std::abs(eta_variance(spec, beta, h) - beta * beta) <= 4.0 * beta * beta * beta);
    }
}

TEST_CASE("eta overflow names the offending site") {
    const DisorderSpec spec = spec_of(DisorderFamily::standard_gaussian);
    DisorderField field;
    field.sites = {41, 42};
    field.values = {0.0, 30.0};
    CHECK_THROWS_WITH_AS(eta_transform(field, 30.0, 0.0), doctest::Contains("42"), resource_error);
}

TEST_CASE("lambda exponent reduces to beta^2 for the gaussian family") {
    const DisorderSpec spec = spec_of(DisorderFamily::standard_gaussian);
    CHECK(lambda_exponent(spec, 0.7) == doctest::Approx(0.49).epsilon(1e-14));
}
