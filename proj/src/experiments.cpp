#include "lab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "lab/chaos.hpp"
#include "lab/disorder.hpp"
#include "lab/errors.hpp"
#include "lab/lattice.hpp"
#include "lab/marginal.hpp"
#include "lab/partition.hpp"
#include "lab/rng.hpp"
#include "lab/scaling.hpp"
#include "lab/stats.hpp"
#include "lab/version.hpp"

namespace lab {
namespace {

// ---- config access with field-path error messages ----

const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key))
        throw validation_error(path.empty() ? key + ": missing" : path + "." + key + ": missing");
    return j.at(key);
}

double get_double(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_number()) throw validation_error(path + "." + key + ": expected a number");
    return v.get<double>();
}

double get_double_or(const json& j, const std::string& key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

std::int64_t get_int(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_number_integer()) throw validation_error(path + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
}

std::int64_t get_int_or(const json& j, const std::string& key, std::int64_t fallback) {
    return j.contains(key) ? j.at(key).get<std::int64_t>() : fallback;
}

std::string get_string(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_string()) throw validation_error(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> get_double_vec(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_array() || v.empty())
        throw validation_error(path + "." + key + ": expected a nonempty array");
    return v.get<std::vector<double>>();
}

std::vector<std::int64_t> get_int_vec(const json& j, const std::string& key, const std::string& path) {
    const json& v = require(j, key, path);
    if (!v.is_array() || v.empty())
        throw validation_error(path + "." + key + ": expected a nonempty array");
    return v.get<std::vector<std::int64_t>>();
}

RenewalLaw parse_renewal(const json& j, const std::string& path) {
    const double alpha = get_double(j, "alpha", path);
    if (!(alpha > 0.0)) throw validation_error(path + ".alpha: must be > 0");
    const std::string l = j.contains("L") ? j.at("L").get<std::string>() : "constant";
    SlowlyVarying sv;
    if (l == "constant") sv = SlowlyVarying::constant_one;
    else if (l == "log-power") sv = SlowlyVarying::log_power;
    else throw validation_error(path + ".L: expected 'constant' or 'log-power'");
    const double kappa = get_double_or(j, "kappa", 0.0);
    const std::int64_t n_max = get_int(j, "N_max", path);
    if (n_max < 2) throw validation_error(path + ".N_max: must be >= 2");
    return build_renewal_law(alpha, sv, kappa, n_max);
}

WalkLaw parse_walk(const json& j, const std::string& path) {
    const std::string family = get_string(j, "family", path);
    if (family == "ssrw-1d") return make_ssrw_1d();
    if (family == "ssrw-2d") return make_ssrw_2d();
    if (family == "stable-1d") {
        const double alpha = get_double(j, "alpha", path);
        const std::int64_t x_max = get_int_or(j, "X_max", 100000);
        return make_stable_1d(alpha, x_max);
    }
    throw validation_error(path + ".family: expected 'ssrw-1d', 'ssrw-2d' or 'stable-1d'");
}

DisorderSpec parse_disorder(const json& j, const std::string& path) {
    DisorderSpec spec;
    spec.family = family_from_name(get_string(j, "family", path));
    return spec;
}

Endpoint parse_endpoint(const json& j) {
    const std::string e = j.contains("endpoint") ? j.at("endpoint").get<std::string>() : "free";
    if (e == "free") return Endpoint::free_end;
    if (e == "constrained") return Endpoint::constrained;
    throw validation_error("endpoint: expected 'free' or 'constrained'");
}

// ---- CSV with a stable maximal-precision float format ----

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(std::int64_t v) { return std::to_string(v); }

struct Context {
    json config;
    std::filesystem::path out_dir;
    std::uint64_t master = 0;
    Exec exec = Exec::serial;
    std::int64_t samples = 0;
    bool json_records = false;
    std::vector<std::string> artifacts;

    std::filesystem::path file(const std::string& name) {
        artifacts.push_back((out_dir / name).string());
        return out_dir / name;
    }
};

// Tabular output as CSV (default) or an array of JSON records.  Cells arrive
// preformatted; numeric-looking cells are emitted as JSON numbers.
class RecordWriter {
public:
    RecordWriter(Context& ctx, const std::string& name, std::vector<std::string> header)
        : header_(std::move(header)), json_mode_(ctx.json_records) {
        const auto path = ctx.file(name + (json_mode_ ? ".json" : ".csv"));
        out_.open(path);
        if (!out_) throw resource_error("cannot open output file " + path.string());
        if (json_mode_) {
            out_ << "[";
        } else {
            for (std::size_t i = 0; i < header_.size(); ++i) {
                if (i) out_ << ',';
                out_ << header_[i];
            }
            out_ << '\n';
        }
    }

    ~RecordWriter() {
        if (json_mode_) out_ << "\n]\n";
    }

    void write_row(const std::vector<std::string>& cells) {
        if (!json_mode_) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out_ << ',';
                out_ << cells[i];
            }
            out_ << '\n';
            return;
        }
        out_ << (first_ ? "\n" : ",\n") << "  {";
        first_ = false;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ", ";
            out_ << '"' << header_[i] << "\": ";
            char* end = nullptr;
            const double v = std::strtod(cells[i].c_str(), &end);
            (void)v;
            const bool numeric = !cells[i].empty() && end == cells[i].c_str() + cells[i].size();
            if (numeric && cells[i] != "nan" && cells[i] != "inf" && cells[i] != "-inf")
                out_ << cells[i];
            else
                out_ << '"' << cells[i] << '"';
        }
        out_ << '}';
    }

private:
    std::vector<std::string> header_;
    bool json_mode_ = false;
    bool first_ = true;
    std::ofstream out_;
};

// ---------------------------------------------------------------- runners

std::string run_pinning_z(Context& ctx) {
    const json& c = ctx.config;
    RenewalLaw law = parse_renewal(require(c, "model", ""), "model");
    const DisorderSpec spec = parse_disorder(require(c, "disorder", ""), "disorder");
    const double beta = get_double(c, "beta", "");
    const double h = get_double(c, "h", "");
    const std::int64_t n = get_int(c, "N", "");
    const Endpoint ep = parse_endpoint(c);

    const std::int64_t horizons[1] = {n};
    std::vector<double> log_z(static_cast<std::size_t>(ctx.samples));
    PinningBatch batch{&law, spec, beta, h, ep};
    batch_pinning_log_z(batch, {horizons, 1}, ctx.samples, ctx.master, 0, log_z, ctx.exec);

    RecordWriter csv(ctx, "pinning-z", {"model", "N", "beta", "h", "endpoint", "seed", "logZ"});
    for (std::int64_t r = 0; r < ctx.samples; ++r)
        csv.write_row({"pinning", fmt(n), fmt(beta), fmt(h),
                       ep == Endpoint::free_end ? "free" : "constrained", fmt(r),
                       fmt(log_z[static_cast<std::size_t>(r)])});
    return "pinning-z: " + std::to_string(ctx.samples) + " replicas at N=" + std::to_string(n);
}

std::string run_polymer_z(Context& ctx) {
    const json& c = ctx.config;
    WalkLaw walk = parse_walk(require(c, "walk", ""), "walk");
    const DisorderSpec spec = parse_disorder(require(c, "disorder", ""), "disorder");
    const double beta = get_double(c, "beta", "");
    const std::int64_t n = get_int(c, "N", "");

    PolymerBatch batch;
    batch.walk = &walk;
    batch.disorder = spec;
    batch.beta = beta;
    batch.window_sigmas = get_double_or(c, "window_sigmas", 4.5);
    batch.window_tol = get_double_or(c, "window_tol", 5e-3);

    const std::int64_t horizons[1] = {n};
    std::vector<double> log_z(static_cast<std::size_t>(ctx.samples));
    batch_polymer_log_z(batch, {horizons, 1}, ctx.samples, ctx.master, 0, log_z, ctx.exec);

    const double h = -log_mgf(spec, beta);
    RecordWriter csv(ctx, "polymer-z", {"model", "N", "beta", "h", "endpoint", "seed", "logZ"});
    for (std::int64_t r = 0; r < ctx.samples; ++r)
        csv.write_row({"polymer", fmt(n), fmt(beta), fmt(h), "free", fmt(r),
                       fmt(log_z[static_cast<std::size_t>(r)])});
    return "polymer-z: " + std::to_string(ctx.samples) + " replicas at N=" + std::to_string(n);
}

std::string run_overlap(Context& ctx) {
    const json& c = ctx.config;
    const std::string kind = get_string(c, "kind", "");
    const auto n_grid = get_int_vec(c, "N_grid", "");
    RecordWriter csv(ctx, "overlap", {"N", "R_N", "R_over_logN"});
    if (kind == "pinning") {
        RenewalLaw law = parse_renewal(require(c, "model", ""), "model");
        for (std::int64_t n : n_grid) {
            const double r = pinning_overlap(law, n);
            csv.write_row({fmt(n), fmt(r), fmt(r / std::log(static_cast<double>(n)))});
        }
        // renewal mass function table up to the largest horizon
        const std::int64_t n_top = *std::max_element(n_grid.begin(), n_grid.end());
        const auto u = law.renewal_mass(n_top);
        RecordWriter ucsv(ctx, "overlap-u", {"n", "u_n"});
        for (std::int64_t n = 0; n <= n_top; ++n)
            ucsv.write_row({fmt(n), fmt(u[static_cast<std::size_t>(n)])});
    } else if (kind == "polymer") {
        WalkLaw walk = parse_walk(require(c, "walk", ""), "walk");
        for (std::int64_t n : n_grid) {
            const double r = polymer_overlap(walk, n);
            csv.write_row({fmt(n), fmt(r), fmt(r / std::log(static_cast<double>(n)))});
        }
        if (c.contains("kernel_export_n")) {
            const std::int64_t n = c.at("kernel_export_n").get<std::int64_t>();
            const KernelColumn col = kernel_column(walk, n, get_double_or(c, "kernel_tol", 1e-9));
            if (col.dim == 1) {
                RecordWriter kcsv(ctx, "overlap-kernel", {"n", "x", "q"});
                for (std::int64_t i = 0; i < static_cast<std::int64_t>(col.values.size()); ++i)
                    kcsv.write_row({fmt(n), fmt(col.x_min + i), fmt(col.values[static_cast<std::size_t>(i)])});
            } else {
                RecordWriter kcsv(ctx, "overlap-kernel", {"n", "x", "y", "q"});
                for (std::int64_t y = -col.half_width; y <= col.half_width; ++y)
                    for (std::int64_t x = -col.half_width; x <= col.half_width; ++x)
                        kcsv.write_row({fmt(n), fmt(x), fmt(y), fmt(col.at(x, y))});
            }
        }
    } else {
        throw validation_error("kind: expected 'pinning' or 'polymer'");
    }
    return "overlap: " + std::to_string(n_grid.size()) + " grid points";
}

std::string run_chaos_oracle_check(Context& ctx) {
    const json& c = ctx.config;
    const std::int64_t n_pin = get_int_or(c, "N_pinning", 12);
    const std::int64_t n_poly = get_int_or(c, "N_polymer", 10);
    const std::int64_t envs = get_int_or(c, "environments", 100);
    const double beta = get_double_or(c, "beta", 0.4);
    const double alpha = get_double_or(c, "alpha", 0.75);
    const double tolerance = get_double_or(c, "tolerance", 1e-10);
    const DisorderSpec spec = parse_disorder(require(c, "disorder", ""), "disorder");
    const double h = -log_mgf(spec, beta);

    RenewalLaw law = build_renewal_law(alpha, std::max<std::int64_t>(n_pin, 4));
    WalkLaw walk = make_ssrw_1d();

    RecordWriter csv(ctx, "chaos-oracle-check", {"model", "environment", "relative_error"});
    double max_err = 0.0;

    for (std::int64_t e = 0; e < envs; ++e) {
        std::vector<double> omega(static_cast<std::size_t>(n_pin));
        for (std::int64_t i = 1; i <= n_pin; ++i)
            omega[static_cast<std::size_t>(i - 1)] =
                sample_site(spec, ctx.master, static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(i));
        const PartitionValue direct = pinning_partition(law, omega, beta, h, n_pin, Endpoint::free_end);
        std::vector<double> eta(static_cast<std::size_t>(n_pin));
        for (std::int64_t i = 0; i < n_pin; ++i)
            eta[static_cast<std::size_t>(i)] = std::expm1(beta * omega[static_cast<std::size_t>(i)] + h);
        const double oracle = chaos_oracle_pinning(law, eta);
        const double err = std::abs(oracle - direct.value) / std::abs(direct.value);
        max_err = std::max(max_err, err);
        csv.write_row({"pinning", fmt(e), fmt(err)});
    }

    for (std::int64_t e = 0; e < envs; ++e) {
        const std::uint64_t stream = static_cast<std::uint64_t>(envs + e);
        const auto omega = [&](std::int64_t m, std::int64_t x, std::int64_t) {
            return sample_site(spec, ctx.master, stream, pack_site_1d(m, x));
        };
        const PartitionValue direct =
            polymer_partition(walk, omega, beta, h, n_poly, PolymerMode::point_to_plane);
        const auto eta = [&](std::int64_t m, std::int64_t x) {
            return std::expm1(beta * omega(m, x, 0) + h);
        };
        const double oracle = chaos_oracle_polymer(walk, n_poly, eta);
        const double err = std::abs(oracle - direct.value) / std::abs(direct.value);
        max_err = std::max(max_err, err);
        csv.write_row({"polymer", fmt(e), fmt(err)});
    }

    ctx.config["_max_relative_error"] = max_err;
    if (max_err > tolerance)
        return "chaos-oracle-check FAILED: max relative error " + fmt(max_err) + " > " + fmt(tolerance);
    return "chaos-oracle-check passed: max relative error " + fmt(max_err);
}

std::string run_lindeberg(Context& ctx) {
    const json& c = ctx.config;
    const auto n_grid = get_int_vec(c, "N_grid", "");
    const double beta_hat = get_double(c, "beta_hat", "");
    DisorderSpec spec_a = parse_disorder(require(c, "disorder_a", ""), "disorder_a");
    DisorderSpec spec_b = parse_disorder(require(c, "disorder_b", ""), "disorder_b");

    LindebergModel model;
    RenewalLaw law;
    WalkLaw walk;
    const std::string kind = get_string(c, "kind", "");
    if (kind == "pinning") {
        const json model_json = require(c, "model", "");
        json with_nmax = model_json;
        if (!with_nmax.contains("N_max")) with_nmax["N_max"] = *std::max_element(n_grid.begin(), n_grid.end());
        law = parse_renewal(with_nmax, "model");
        model.kind = LindebergModel::Kind::pinning;
        model.law = &law;
    } else if (kind == "polymer") {
        walk = parse_walk(require(c, "walk", ""), "walk");
        model.kind = LindebergModel::Kind::polymer_2d;
        model.walk = &walk;
    } else {
        throw validation_error("kind: expected 'pinning' or 'polymer'");
    }
    model.beta_hat = beta_hat;

    RecordWriter csv(ctx, "lindeberg", {"N", "ks_distance"});
    std::string summary = "lindeberg:";
    for (std::int64_t n : n_grid) {
        const double d = lindeberg_distance(model, spec_a, spec_b, n, ctx.samples,
                                            rng::derive_key(ctx.master, static_cast<std::uint64_t>(n)),
                                            ctx.exec);
        csv.write_row({fmt(n), fmt(d)});
        summary += " D(" + std::to_string(n) + ")=" + fmt(d);
    }
    return summary;
}

std::string run_continuum_chaos(Context& ctx) {
    const json& c = ctx.config;
    const std::string branch = get_string(c, "branch", "");
    ContinuumKernel kernel;
    if (branch == "finite-mean")
        kernel = pinning_kernel_finite_mean(get_double(c, "m", ""));
    else if (branch == "alpha")
        kernel = pinning_kernel_alpha(get_double(c, "alpha", ""));
    else
        throw validation_error("branch: expected 'finite-mean' or 'alpha'");
    const double beta_hat = get_double(c, "beta_hat", "");
    const double h_hat = get_double_or(c, "h_hat", 0.0);
    const double t = get_double_or(c, "t", 1.0);
    const double mesh = get_double(c, "mesh", "");
    const int k_max = static_cast<int>(get_int(c, "k_max", ""));

    std::string summary = "continuum-chaos:";
    if (h_hat == 0.0) {
        const int series_k = kernel.alpha_branch ? std::min(k_max, 3) : k_max;
        const SecondMomentResult series = chaos_second_moment(kernel, beta_hat, 0.0, t, series_k);
        RecordWriter csv(ctx, "continuum-chaos-series", {"k", "term_value"});
        for (std::size_t k = 0; k < series.terms.size(); ++k)
            csv.write_row({fmt(static_cast<std::int64_t>(k)), fmt(series.terms[k])});
        summary += " E[Z^2]<=" + fmt(series.value + series.report.tail_bound);
    }

    std::vector<double> z(static_cast<std::size_t>(ctx.samples));
    batch_continuum_chaos(kernel, beta_hat, h_hat, t, mesh, k_max, ctx.samples, ctx.master, 0,
                          z, ctx.exec);
    RecordWriter csv(ctx, "continuum-chaos-samples", {"replica", "z"});
    for (std::int64_t r = 0; r < ctx.samples; ++r)
        csv.write_row({fmt(r), fmt(z[static_cast<std::size_t>(r)])});

    if (!kernel.alpha_branch) {
        // closed-form reference draws and their two-sample distance
        ContinuumPinningParams params{beta_hat, h_hat, t, kernel.m};
        std::vector<double> ref(static_cast<std::size_t>(ctx.samples));
        for (std::int64_t r = 0; r < ctx.samples; ++r)
            ref[static_cast<std::size_t>(r)] = continuum_pinning_sample(
                params, {ctx.master, (std::uint64_t(1) << 32) + static_cast<std::uint64_t>(r)});
        RecordWriter ref_csv(ctx, "continuum-chaos-reference", {"replica", "z"});
        for (std::int64_t r = 0; r < ctx.samples; ++r)
            ref_csv.write_row({fmt(r), fmt(ref[static_cast<std::size_t>(r)])});
        const double d = ks_statistic(std::span<const double>(z), std::span<const double>(ref));
        summary += " KS(sim, closed-form)=" + fmt(d);
    }
    return summary;
}

std::string run_marginal_scan(Context& ctx) {
    const json& c = ctx.config;
    const auto beta_hat_grid = get_double_vec(c, "beta_hat_grid", "");
    const auto n_grid = get_int_vec(c, "N_grid", "");

    MarginalModel model;
    model.disorder = parse_disorder(require(c, "disorder", ""), "disorder");
    const std::string kind = get_string(c, "kind", "");
    RenewalLaw law;
    WalkLaw walk;
    if (kind == "pinning") {
        json model_json = require(c, "model", "");
        if (!model_json.contains("N_max"))
            model_json["N_max"] = *std::max_element(n_grid.begin(), n_grid.end());
        law = parse_renewal(model_json, "model");
        model.kind = MarginalModel::Kind::pinning;
        model.law = &law;
    } else if (kind == "polymer") {
        walk = parse_walk(require(c, "walk", ""), "walk");
        model.kind = MarginalModel::Kind::polymer;
        model.walk = &walk;
        model.window_sigmas = get_double_or(c, "window_sigmas", 4.5);
    } else {
        throw validation_error("kind: expected 'pinning' or 'polymer'");
    }

    const auto rows = marginal_scan(model, beta_hat_grid, n_grid, ctx.samples, ctx.master, ctx.exec);

    RecordWriter csv(ctx, "marginal-scan", {"beta_hat", "N", "mean_Z", "var_Z", "E_Z2", "median_Z", "ks_lognormal"});
    RecordWriter detail(ctx, "marginal-scan-detail", {"beta_hat", "N", "overlap", "beta_N", "median_Z", "p_below_001"});
    for (const auto& row : rows) {
        csv.write_row({fmt(row.beta_hat), fmt(row.n), fmt(row.mean_z), fmt(row.var_z),
                       fmt(row.e_z2), fmt(row.median_z), fmt(row.ks_lognormal)});
        detail.write_row({fmt(row.beta_hat), fmt(row.n), fmt(row.overlap), fmt(row.beta_n),
                          fmt(row.median_z), fmt(row.p_below_001)});
    }
    return "marginal-scan: " + std::to_string(rows.size()) + " rows";
}

std::string run_theta_blocks(Context& ctx) {
    const json& c = ctx.config;
    const std::int64_t n = get_int(c, "N", "");
    const int m = static_cast<int>(get_int(c, "M", ""));
    const std::int64_t replicas = get_int_or(c, "replicas", ctx.samples);
    const bool sitewise = c.contains("sitewise") && c.at("sitewise").get<bool>();
    const DisorderSpec spec = parse_disorder(require(c, "disorder", ""), "disorder");
    WalkLaw walk = make_ssrw_2d();

    const ThetaBlockStats stats =
        theta_blocks(walk, spec, n, m, replicas, ctx.master, ctx.exec, sitewise);

    RecordWriter csv(ctx, "theta-blocks", {"block", "mean", "var", "skew", "kurt"});
    for (int i = 0; i < m; ++i) {
        const MomentSummary s = moment_summary(stats.moments[static_cast<std::size_t>(i)]);
        csv.write_row({fmt(static_cast<std::int64_t>(i + 1)), fmt(s.mean), fmt(s.variance),
                       fmt(s.skewness), fmt(s.kurtosis)});
    }
    RecordWriter oracle(ctx, "theta-blocks-oracle", {"block", "var_oracle", "n_lo", "n_hi"});
    for (int i = 0; i < m; ++i)
        oracle.write_row({fmt(static_cast<std::int64_t>(i + 1)),
                          fmt(stats.variance_oracle[static_cast<std::size_t>(i)]),
                          fmt(stats.block_lo[static_cast<std::size_t>(i)]),
                          fmt(stats.block_hi[static_cast<std::size_t>(i)])});
    RecordWriter corr(ctx, "theta-blocks-corr", {"block_i", "block_j", "corr"});
    std::size_t idx = 0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            corr.write_row({fmt(static_cast<std::int64_t>(i + 1)), fmt(static_cast<std::int64_t>(j + 1)),
                            fmt(stats.pairwise_corr[idx++])});
    return "theta-blocks: N=" + std::to_string(n) + " M=" + std::to_string(m);
}

std::string run_free_energy(Context& ctx) {
    const json& c = ctx.config;
    RenewalLaw law = parse_renewal(require(c, "model", ""), "model");
    const DisorderSpec spec = parse_disorder(require(c, "disorder", ""), "disorder");
    const double beta = get_double(c, "beta", "");
    const auto h_grid = get_double_vec(c, "h_grid", "");
    const std::int64_t n = get_int(c, "N", "");

    RecordWriter csv(ctx, "free-energy", {"beta", "h", "N", "f_hat", "stderr"});
    RecordWriter doubling(ctx, "free-energy-doubling", {"beta", "h", "N", "f_doubling", "stderr"});
    for (double h : h_grid) {
        const FreeEnergyEstimate est =
            free_energy_estimate(law, spec, beta, h, n, ctx.samples, ctx.master, ctx.exec);
        csv.write_row({fmt(beta), fmt(h), fmt(n), fmt(est.f_hat), fmt(est.stderr_f)});
        doubling.write_row({fmt(beta), fmt(h), fmt(n), fmt(est.f_doubling), fmt(est.stderr_doubling)});
    }
    return "free-energy: " + std::to_string(h_grid.size()) + " h values at N=" + std::to_string(n);
}

std::string run_critical_point(Context& ctx) {
    const json& c = ctx.config;
    RenewalLaw law = parse_renewal(require(c, "model", ""), "model");
    const DisorderSpec spec = parse_disorder(require(c, "disorder", ""), "disorder");
    const double beta = get_double(c, "beta", "");
    const auto h_grid = get_double_vec(c, "h_grid", "");
    const std::int64_t n = get_int(c, "N", "");
    const double mult = get_double_or(c, "threshold_stderr_mult", 3.0);
    const int levels = static_cast<int>(get_int_or(c, "bisection_levels", 6));

    const CriticalPointEstimate est = critical_point_scan(
        law, spec, beta, h_grid, n, ctx.samples, mult, levels, ctx.master, ctx.exec);
    RecordWriter csv(ctx, "critical-point", {"beta", "h_lo", "h_hi", "h_c_hat", "threshold"});
    csv.write_row({fmt(est.beta), fmt(est.h_lo), fmt(est.h_hi), fmt(est.h_c_hat), fmt(est.threshold)});
    return "critical-point: h_c in [" + fmt(est.h_lo) + ", " + fmt(est.h_hi) + "]";
}

std::string run_scaling_collapse(Context& ctx) {
    const json& c = ctx.config;
    RenewalLaw law = parse_renewal(require(c, "model", ""), "model");
    const DisorderSpec spec = parse_disorder(require(c, "disorder", ""), "disorder");
    const double beta_hat = get_double(c, "beta_hat", "");
    const double h_hat = get_double(c, "h_hat", "");
    const auto delta_grid = get_double_vec(c, "delta_grid", "");
    const std::int64_t n_per_delta = get_int(c, "N_per_delta", "");

    const auto points = scaling_collapse(law, spec, beta_hat, h_hat, delta_grid, n_per_delta,
                                         ctx.samples, ctx.master, ctx.exec);
    RecordWriter csv(ctx, "scaling-collapse", {"delta", "collapsed_value"});
    RecordWriter detail(ctx, "scaling-collapse-detail", {"delta", "beta", "h", "collapsed_value", "collapsed_raw", "stderr"});
    for (const auto& p : points) {
        csv.write_row({fmt(p.delta), fmt(p.collapsed_value)});
        detail.write_row({fmt(p.delta), fmt(p.beta), fmt(p.h), fmt(p.collapsed_value),
                          fmt(p.collapsed_raw), fmt(p.stderr_collapsed)});
    }
    return "scaling-collapse: " + std::to_string(points.size()) + " delta values";
}

} // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "pinning-z",      "polymer-z",     "overlap",        "chaos-oracle-check",
        "lindeberg",      "continuum-chaos", "marginal-scan", "theta-blocks",
        "free-energy",    "critical-point", "scaling-collapse"};
    return names;
}

json default_config(const std::string& experiment) {
    json c;
    c["experiment"] = experiment;
    c["master_seed"] = 12345;
    c["threads"] = 1;
    c["samples"] = 1000;
    c["output"] = {{"format", "csv"}};
    if (experiment == "pinning-z") {
        c["model"] = {{"alpha", 0.75}, {"L", "constant"}, {"N_max", 1024}};
        c["disorder"] = {{"family", "gaussian"}, {"params", json::object()}};
        c["beta"] = 0.3;
        c["h"] = 0.0;
        c["N"] = 1024;
    } else if (experiment == "polymer-z") {
        c["walk"] = {{"family", "ssrw-1d"}};
        c["disorder"] = {{"family", "gaussian"}, {"params", json::object()}};
        c["beta"] = 0.3;
        c["N"] = 256;
    } else if (experiment == "overlap") {
        c["kind"] = "pinning";
        c["model"] = {{"alpha", 0.5}, {"L", "constant"}, {"N_max", 4096}};
        c["N_grid"] = {256, 1024, 4096};
    } else if (experiment == "chaos-oracle-check") {
        c["disorder"] = {{"family", "gaussian"}, {"params", json::object()}};
        c["N_pinning"] = 10;
        c["N_polymer"] = 8;
        c["environments"] = 50;
    } else if (experiment == "lindeberg") {
        c["kind"] = "pinning";
        c["model"] = {{"alpha", 0.75}, {"L", "constant"}};
        c["disorder_a"] = {{"family", "gaussian"}, {"params", json::object()}};
        c["disorder_b"] = {{"family", "rademacher"}, {"params", json::object()}};
        c["beta_hat"] = 1.0;
        c["N_grid"] = {64, 256};
    } else if (experiment == "continuum-chaos") {
        c["branch"] = "finite-mean";
        c["m"] = 2.0;
        c["beta_hat"] = 1.0;
        c["h_hat"] = 0.0;
        c["t"] = 1.0;
        c["mesh"] = 1.0 / 1024.0;
        c["k_max"] = 12;
    } else if (experiment == "marginal-scan") {
        c["kind"] = "pinning";
        c["model"] = {{"alpha", 0.5}, {"L", "constant"}};
        c["disorder"] = {{"family", "gaussian"}, {"params", json::object()}};
        c["beta_hat_grid"] = {0.5};
        c["N_grid"] = {256, 1024};
    } else if (experiment == "theta-blocks") {
        c["disorder"] = {{"family", "gaussian"}, {"params", json::object()}};
        c["N"] = 65536;
        c["M"] = 8;
        c["replicas"] = 1000;
    } else if (experiment == "free-energy") {
        c["model"] = {{"alpha", 0.75}, {"L", "constant"}, {"N_max", 4096}};
        c["disorder"] = {{"family", "gaussian"}, {"params", json::object()}};
        c["beta"] = 0.0;
        c["h_grid"] = {0.1, 0.3, 1.0};
        c["N"] = 4096;
    } else if (experiment == "critical-point") {
        c["model"] = {{"alpha", 0.75}, {"L", "constant"}, {"N_max", 4096}};
        c["disorder"] = {{"family", "gaussian"}, {"params", json::object()}};
        c["beta"] = 0.0;
        c["h_grid"] = {-0.2, -0.1, 0.0, 0.1, 0.2};
        c["N"] = 4096;
    } else if (experiment == "scaling-collapse") {
        c["model"] = {{"alpha", 0.75}, {"L", "constant"}, {"N_max", 16384}};
        c["disorder"] = {{"family", "gaussian"}, {"params", json::object()}};
        c["beta_hat"] = 1.0;
        c["h_hat"] = 1.0;
        c["delta_grid"] = {0.0625, 0.03125, 0.015625};
        c["N_per_delta"] = 8192;
    } else {
        throw validation_error("experiment: unknown name '" + experiment + "'");
    }
    return c;
}

void apply_override(json& config, const std::string& dotted_key, const std::string& value) {
    json* node = &config;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted_key.find('.', start);
        const std::string part = dotted_key.substr(start, dot - start);
        if (part.empty()) throw validation_error("--set: empty key segment in '" + dotted_key + "'");
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            (*node)[part] = parsed.is_discarded() ? json(value) : parsed;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

RunResult run_experiment(const json& config, const std::string& out_dir) {
    const auto started = std::chrono::system_clock::now();
    const auto t0 = std::chrono::steady_clock::now();

    Context ctx;
    ctx.config = config;
    ctx.out_dir = out_dir;
    std::filesystem::create_directories(ctx.out_dir);
    const std::string experiment = get_string(config, "experiment", "");
    ctx.master = config.contains("master_seed")
                     ? config.at("master_seed").get<std::uint64_t>()
                     : 12345;
    const int threads = static_cast<int>(get_int_or(config, "threads", 1));
    set_thread_count(threads);
    ctx.exec = threads == 1 ? Exec::serial : Exec::openmp;
    ctx.samples = get_int_or(config, "samples", 1000);
    if (ctx.samples < 1) throw validation_error("samples: must be >= 1");
    if (config.contains("output") && config.at("output").contains("format")) {
        const std::string format = config.at("output").at("format").get<std::string>();
        if (format == "json") ctx.json_records = true;
        else if (format != "csv") throw validation_error("output.format: expected 'csv' or 'json'");
    }

    RunResult result;
    std::string summary;
    if (experiment == "pinning-z") summary = run_pinning_z(ctx);
    else if (experiment == "polymer-z") summary = run_polymer_z(ctx);
    else if (experiment == "overlap") summary = run_overlap(ctx);
    else if (experiment == "chaos-oracle-check") summary = run_chaos_oracle_check(ctx);
    else if (experiment == "lindeberg") summary = run_lindeberg(ctx);
    else if (experiment == "continuum-chaos") summary = run_continuum_chaos(ctx);
    else if (experiment == "marginal-scan") summary = run_marginal_scan(ctx);
    else if (experiment == "theta-blocks") summary = run_theta_blocks(ctx);
    else if (experiment == "free-energy") summary = run_free_energy(ctx);
    else if (experiment == "critical-point") summary = run_critical_point(ctx);
    else if (experiment == "scaling-collapse") summary = run_scaling_collapse(ctx);
    else throw validation_error("experiment: unknown name '" + experiment + "'");

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["config"] = config;
    manifest["config_hash"] = std::hash<std::string>{}(config.dump());
    manifest["seed"] = ctx.master;
    manifest["version"] = kVersion;
    manifest["started"] = std::chrono::duration_cast<std::chrono::seconds>(
                              started.time_since_epoch()).count();
    manifest["elapsed_seconds"] = elapsed;
    {
        std::ofstream out(ctx.out_dir / "manifest.json");
        out << manifest.dump(2) << '\n';
        ctx.artifacts.push_back((ctx.out_dir / "manifest.json").string());
    }

    result.artifacts = ctx.artifacts;
    result.summary = summary;
    result.exit_code = summary.find("FAILED") != std::string::npos ? 4 : 0;
    return result;
}

} // namespace lab
