#include <doctest.h>

#include <cmath>

#include "lab/chaos.hpp"
#include "lab/experiments.hpp"
#include "lab/marginal.hpp"
#include "lab/walk.hpp"

#include <filesystem>

using namespace lab;

// The less-traveled model-menu combinations: each must run end to end and
// produce sane numbers, even where no acceptance criterion exercises it.

TEST_CASE("marginal scan over the truncated-Cauchy polymer") {
    WalkLaw walk = make_stable_1d(1.0, 64);
    MarginalModel model;
    model.kind = MarginalModel::Kind::polymer;
    model.walk = &walk;
    model.disorder.family = DisorderFamily::rademacher;
    const double bgrid[1] = {0.5};
    const std::int64_t ngrid[2] = {32, 64};
    const auto rows = marginal_scan(model, {bgrid, 1}, {ngrid, 2}, 200, 88, Exec::serial);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(std::isfinite(row.e_z2));
        CHECK(row.e_z2 >= 1.0 - 0.2);
        CHECK(std::abs(row.mean_z - 1.0) <= 5.0 * std::sqrt(row.var_z / 200.0) + 1e-3);
    }
    CHECK(rows[1].overlap > rows[0].overlap);
}

TEST_CASE("lindeberg distance over the 2d polymer") {
    WalkLaw walk = make_ssrw_2d();
    LindebergModel model;
    model.kind = LindebergModel::Kind::polymer_2d;
    model.walk = &walk;
    model.beta_hat = 0.8;
    DisorderSpec gauss;
    DisorderSpec rade;
    rade.family = DisorderFamily::rademacher;
    const double d = lindeberg_distance(model, rade, rade, 64, 500, 9, Exec::serial);
    CHECK(d <= 1.63 * std::sqrt(2.0 / 500.0));
    const double d_swap = lindeberg_distance(model, gauss, rade, 64, 500, 9, Exec::serial);
    CHECK(d_swap < 0.25);
}

TEST_CASE("continuum-chaos experiment, alpha branch") {
    json c = default_config("continuum-chaos");
    c["branch"] = "alpha";
    c["alpha"] = 0.75;
    c.erase("m");
    c["mesh"] = 1.0 / 4096.0;
    c["k_max"] = 3;
    c["samples"] = 4;
    const auto dir = std::filesystem::temp_directory_path() / "lab_test_alpha_branch";
    std::filesystem::remove_all(dir);
    const RunResult res = run_experiment(c, dir.string());
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(dir / "continuum-chaos-series.csv"));
    CHECK(std::filesystem::exists(dir / "continuum-chaos-samples.csv"));
}
