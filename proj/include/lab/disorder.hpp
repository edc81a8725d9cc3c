#pragma once

// I.i.d. disorder environments: zero mean, unit variance, closed-form
// log-moment generating function M(beta), and the site transform
// eta = exp(beta*omega + h) - 1 that drives the chaos expansion.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lab {

enum class DisorderFamily { standard_gaussian, rademacher, centered_exponential };

std::string family_name(DisorderFamily f);
DisorderFamily family_from_name(const std::string& name);

struct SeedProvenance {
    std::uint64_t master = 0;
    std::uint64_t stream = 0;
};

struct DisorderSpec {
    DisorderFamily family = DisorderFamily::standard_gaussian;

    // Closed interval of beta on which M(beta) is finite (and safely
    // representable); interval chosen per family and documented.
    double beta_min() const;
    double beta_max() const;
};

// log E[exp(beta*omega)] in closed form.  Throws validation_error outside
// the admissible interval, naming the family and bound.
double log_mgf(const DisorderSpec& spec, double beta);

// M(2b) - 2M(b): the replica coupling exponent; E[eta^2] = exp(lambda)-1
// when h = -M(beta).
double lambda_exponent(const DisorderSpec& spec, double beta);

// One draw of the environment at an abstract site index.  Pure in
// (spec, master, stream, index).
double sample_site(const DisorderSpec& spec, std::uint64_t master, std::uint64_t stream,
                   std::uint64_t index);

struct DisorderField {
    std::vector<std::uint64_t> sites; // caller-defined index set
    std::vector<double> values;
    SeedProvenance seed;
};

// I.i.d. field over an explicit site set; deterministic in (spec, sites, seed).
DisorderField sample_field(const DisorderSpec& spec, std::span<const std::uint64_t> sites,
                           SeedProvenance seed);

struct EtaField {
    std::vector<std::uint64_t> sites;
    std::vector<double> values;
    double beta = 0.0;
    double h = 0.0;
};

// eta_x = exp(beta*omega_x + h) - 1 per site.  Exponents beyond +/-700 raise
// resource_error naming the offending site.
EtaField eta_transform(const DisorderField& field, double beta, double h);

// Exact moments of eta under h = -M(beta) (or any h): E[eta] and Var[eta]
// from the MGF algebra; used as test oracles and by the truncation report.
double eta_mean(const DisorderSpec& spec, double beta, double h);
double eta_variance(const DisorderSpec& spec, double beta, double h);

} // namespace lab
