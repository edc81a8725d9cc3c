#include "lab/disorder.hpp"

#include <cmath>

#include "lab/errors.hpp"
#include "lab/rng.hpp"

namespace lab {

std::string family_name(DisorderFamily f) {
    switch (f) {
        case DisorderFamily::standard_gaussian: return "gaussian";
        case DisorderFamily::rademacher: return "rademacher";
        case DisorderFamily::centered_exponential: return "centered-exponential";
    }
    return "?";
}

DisorderFamily family_from_name(const std::string& name) {
    if (name == "gaussian" || name == "standard-gaussian") return DisorderFamily::standard_gaussian;
    if (name == "rademacher") return DisorderFamily::rademacher;
    if (name == "centered-exponential" || name == "exponential") return DisorderFamily::centered_exponential;
    throw validation_error("disorder.family: unknown family '" + name + "'");
}

double DisorderSpec::beta_min() const {
    switch (family) {
        case DisorderFamily::standard_gaussian: return -37.0;  // beta^2/2 <= 700
        case DisorderFamily::rademacher: return -700.0;
        case DisorderFamily::centered_exponential: return -700.0;
    }
    return 0.0;
}

double DisorderSpec::beta_max() const {
    switch (family) {
        case DisorderFamily::standard_gaussian: return 37.0;
        case DisorderFamily::rademacher: return 700.0;
        // M(beta) = -beta - log(1-beta) requires beta < 1; keep a margin so
        // M(2*beta) used by the replica exponent also stays finite.
        case DisorderFamily::centered_exponential: return 0.499;
    }
    return 0.0;
}

double log_mgf(const DisorderSpec& spec, double beta) {
    if (beta < spec.beta_min() || beta > spec.beta_max()) {
        throw validation_error("log_mgf: beta=" + std::to_string(beta) + " outside admissible interval ["
                               + std::to_string(spec.beta_min()) + ", " + std::to_string(spec.beta_max())
                               + "] of family " + family_name(spec.family));
    }
    switch (spec.family) {
        case DisorderFamily::standard_gaussian:
            return 0.5 * beta * beta;
        case DisorderFamily::rademacher:
            // log cosh beta, stable for large |beta|
            return std::abs(beta) + std::log1p(std::exp(-2.0 * std::abs(beta))) - std::log(2.0);
        case DisorderFamily::centered_exponential:
            return -beta - std::log1p(-beta);
    }
    return 0.0;
}

double lambda_exponent(const DisorderSpec& spec, double beta) {
    return log_mgf(spec, 2.0 * beta) - 2.0 * log_mgf(spec, beta);
}

double sample_site(const DisorderSpec& spec, std::uint64_t master, std::uint64_t stream,
                   std::uint64_t index) {
    switch (spec.family) {
        case DisorderFamily::standard_gaussian:
            return rng::gaussian(master, stream, index);
        case DisorderFamily::rademacher:
            return static_cast<double>(rng::sign_at(master, stream, index));
        case DisorderFamily::centered_exponential:
            return -std::log(rng::u01(master, stream, index)) - 1.0;
    }
    return 0.0;
}

DisorderField sample_field(const DisorderSpec& spec, std::span<const std::uint64_t> sites,
                           SeedProvenance seed) {
    if (sites.empty()) throw validation_error("sample_field: empty site set");
    DisorderField field;
    field.sites.assign(sites.begin(), sites.end());
    field.values.resize(sites.size());
    field.seed = seed;
    for (std::size_t i = 0; i < sites.size(); ++i)
        field.values[i] = sample_site(spec, seed.master, seed.stream, sites[i]);
    return field;
}

EtaField eta_transform(const DisorderField& field, double beta, double h) {
    EtaField eta;
    eta.sites = field.sites;
    eta.values.resize(field.values.size());
    eta.beta = beta;
    eta.h = h;
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        const double expo = beta * field.values[i] + h;
        if (expo > 700.0) {
            throw resource_error("eta_transform: exponent overflow (" + std::to_string(expo)
                                 + ") at site " + std::to_string(field.sites[i]));
        }
        eta.values[i] = std::expm1(expo);
    }
    return eta;
}

double eta_mean(const DisorderSpec& spec, double beta, double h) {
    return std::expm1(log_mgf(spec, beta) + h);
}

double eta_variance(const DisorderSpec& spec, double beta, double h) {
    // E[eta^2] - E[eta]^2 with eta = e^{beta w + h} - 1:
    //   E[e^{2bw+2h}] - 2 E[e^{bw+h}] + 1 - (E[e^{bw+h}] - 1)^2
    const double m1 = std::exp(log_mgf(spec, beta) + h);
    const double m2 = std::exp(log_mgf(spec, 2.0 * beta) + 2.0 * h);
    return m2 - m1 * m1;
}

} // namespace lab
