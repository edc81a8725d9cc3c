#include "lab/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "lab/errors.hpp"
#include "lab/lattice.hpp"
#include "lab/rng.hpp"

namespace lab {
namespace {

constexpr double kRescaleHigh = 1e100;
constexpr double kRescaleLow = 1e-100;

} // namespace

// ---------------------------------------------------------------- pinning

void pinning_log_z_multi(const RenewalLaw& law, std::span<const double> site_weights,
                         std::span<const std::int64_t> horizons, Endpoint endpoint,
                         std::span<double> work, std::span<double> log_z_out) {
    const std::int64_t n_total = horizons.empty() ? 0 : horizons.back();
    if (n_total > law.n_max) throw validation_error("pinning: horizon exceeds N_max of the law");
    if (static_cast<std::int64_t>(site_weights.size()) < n_total + 1)
        throw validation_error("pinning: disorder field shorter than the horizon");

    // pmf_reversed[L - j] = K(j) with L = n_max, so sum_m z[m] K(n-m) is a
    // contiguous forward dot product between z and pmf_reversed + (L - n).
    const double* krev = law.pmf_reversed.data();
    const std::int64_t rev_offset = law.n_max;
    double* z = work.data();
    z[0] = 1.0;
    double offset = 0.0;
    std::size_t next_checkpoint = 0;

    const auto emit = [&](std::int64_t n) {
        double s = 0.0;
        if (endpoint == Endpoint::free_end) {
            for (std::int64_t m = 0; m <= n; ++m) s += z[m] * law.survival_of(n - m);
        } else {
            s = z[n];
        }
        log_z_out[next_checkpoint] = std::log(s) + offset;
    };

    while (next_checkpoint < horizons.size() && horizons[next_checkpoint] == 0) {
        emit(0);
        ++next_checkpoint;
    }

    for (std::int64_t n = 1; n <= n_total; ++n) {
        double s = 0.0;
        const double* zrow = z;
        const double* krow = krev + (rev_offset - n);
#pragma omp simd reduction(+ : s)
        for (std::int64_t m = 0; m < n; ++m) s += zrow[m] * krow[m];
        double v = site_weights[static_cast<std::size_t>(n)] * s;
        if (v > kRescaleHigh || (v > 0.0 && v < kRescaleLow)) {
            const double factor = 1.0 / v;
            for (std::int64_t m = 0; m < n; ++m) z[m] *= factor;
            offset += std::log(v);
            v = 1.0;
        }
        z[n] = v;
        while (next_checkpoint < horizons.size() && horizons[next_checkpoint] == n) {
            emit(n);
            ++next_checkpoint;
        }
    }
}

PartitionValue pinning_partition(const RenewalLaw& law, std::span<const double> omega,
                                 double beta, double h, std::int64_t n, Endpoint endpoint) {
    if (static_cast<std::int64_t>(omega.size()) != n)
        throw validation_error("pinning_partition: omega must have exactly N entries");
    std::vector<double> weights(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::int64_t i = 1; i <= n; ++i) {
        const double expo = beta * omega[static_cast<std::size_t>(i - 1)] + h;
        if (expo > 700.0)
            throw resource_error("pinning_partition: weight overflow at site " + std::to_string(i));
        weights[static_cast<std::size_t>(i)] = std::exp(expo);
    }
    std::vector<double> work(static_cast<std::size_t>(n) + 1);
    const std::int64_t horizon[1] = {n};
    double log_z = 0.0;
    pinning_log_z_multi(law, weights, {horizon, 1}, endpoint, work, {&log_z, 1});

    PartitionValue out;
    out.log_value = log_z;
    out.value = std::exp(log_z);
    out.model = "pinning";
    out.n = n;
    out.beta = beta;
    out.h = h;
    out.endpoint = endpoint;
    return out;
}

void batch_pinning_log_z(const PinningBatch& batch, std::span<const std::int64_t> horizons,
                         std::int64_t replicas, std::uint64_t master, std::uint64_t stream0,
                         std::span<double> out, Exec exec) {
    const std::int64_t n_total = horizons.back();
    const std::size_t per_replica = horizons.size();
    if (out.size() < static_cast<std::size_t>(replicas) * per_replica)
        throw validation_error("batch_pinning_log_z: output span too small");
    batch.law->renewal_mass(0); // touch shared caches before the parallel region

    const RenewalLaw& law = *batch.law;
    for_each_index(replicas, exec, [&](std::int64_t r) {
        std::vector<double> weights(static_cast<std::size_t>(n_total) + 1, 0.0);
        const std::uint64_t stream = stream0 + static_cast<std::uint64_t>(r);
        for (std::int64_t i = 1; i <= n_total; ++i) {
            const double w = sample_site(batch.disorder, master, stream, static_cast<std::uint64_t>(i));
            weights[static_cast<std::size_t>(i)] = std::exp(batch.beta * w + batch.h);
        }
        std::vector<double> work(static_cast<std::size_t>(n_total) + 1);
        pinning_log_z_multi(law, weights, horizons, batch.endpoint, work,
                            out.subspan(static_cast<std::size_t>(r) * per_replica, per_replica));
    });
}

// ---------------------------------------------------------------- polymer

namespace {

struct WalkGeometry {
    int dim = 1;
    std::int64_t reach = 1;      // max |step| per coordinate
    bool parity = true;          // ssrw families live on the parity sublattice
    double spread_factor = 1.0;  // std dev of one step per coordinate
};

WalkGeometry geometry_of(const WalkLaw& walk) {
    WalkGeometry g;
    switch (walk.family) {
        case WalkFamily::ssrw_1d:
            g.dim = 1; g.reach = 1; g.parity = true; g.spread_factor = 1.0;
            break;
        case WalkFamily::ssrw_2d:
            g.dim = 2; g.reach = 1; g.parity = true; g.spread_factor = 0.7071067811865476;
            break;
        case WalkFamily::stable_1d: {
            g.dim = 1; g.reach = walk.x_max; g.parity = false;
            double var = 0.0;
            for (std::int64_t x = -walk.x_max; x <= walk.x_max; ++x)
                var += static_cast<double>(x) * static_cast<double>(x) * walk.step_prob(x);
            g.spread_factor = std::sqrt(var);
            break;
        }
    }
    return g;
}

std::int64_t window_half_width(const WalkGeometry& g, std::int64_t n, double sigmas) {
    if (n <= 0) return 0;
    const double spread = g.spread_factor * std::sqrt(static_cast<double>(n));
    const std::int64_t w = static_cast<std::int64_t>(std::ceil(sigmas * spread)) + 2
                         + (g.parity ? 0 : g.reach);
    return std::min<std::int64_t>(n * g.reach, w);
}

// Per-row disorder weights e^{beta*omega - M(beta)}.  The rademacher path
// decodes sign blocks into one of two precomputed weights; other families
// draw each site.
struct RowWeights {
    const DisorderSpec* spec = nullptr;
    double beta = 0.0;
    double log_shift = 0.0;
    std::uint64_t master = 0;
    std::uint64_t stream = 0;
    bool pure = false; // all weights exactly 1 (window-loss probe)
    double w_plus = 0.0, w_minus = 0.0;

    void init() {
        if (!pure && spec->family == DisorderFamily::rademacher) {
            w_plus = std::exp(beta + log_shift);
            w_minus = std::exp(-beta + log_shift);
        }
    }

    void fill(std::int64_t n, std::int64_t y, std::int64_t x_lo, std::int64_t count,
              int dim, double* out) {
        if (pure) {
            std::fill(out, out + count, 1.0);
            return;
        }
        const std::uint64_t idx0 = dim == 2 ? pack_site_2d(n, x_lo, y) : pack_site_1d(n, x_lo);
        if (spec->family == DisorderFamily::rademacher) {
            const double wsel[2] = {w_minus, w_plus};
            std::int64_t i = 0;
            std::uint64_t idx = idx0;
            while (i < count) {
                const rng::Block b = rng::philox2x64(master, idx >> 7, stream);
                unsigned bitpos = static_cast<unsigned>(idx & 127);
                while (bitpos < 128 && i < count) {
                    const std::uint64_t lane = (bitpos & 64) ? b.hi : b.lo;
                    for (unsigned k = bitpos & 63; k < 64 && i < count; ++k, ++i)
                        out[i] = wsel[(lane >> k) & 1];
                    bitpos = (bitpos & 64) ? 128 : 64;
                }
                idx = (idx & ~std::uint64_t(127)) + 128;
            }
        } else {
            for (std::int64_t i = 0; i < count; ++i) {
                const double w = sample_site(*spec, master, stream, idx0 + static_cast<std::uint64_t>(i));
                out[i] = std::exp(beta * w + log_shift);
            }
        }
    }
};

// One point-to-plane transfer for a single environment, emitting log Z at
// each horizon (sorted ascending).
void polymer_log_z_single(const WalkLaw& walk, RowWeights& weights, double sigmas,
                          std::span<const std::int64_t> horizons, std::span<double> log_z_out) {
    const WalkGeometry g = geometry_of(walk);
    const std::int64_t n_total = horizons.back();
    const std::int64_t w_final = window_half_width(g, n_total, sigmas);
    check_lattice_bounds(n_total, w_final + g.reach + 2);

    const std::int64_t pad = g.reach;
    const std::int64_t origin = w_final + pad;
    const std::int64_t side = 2 * origin + 1;
    const std::int64_t cells = g.dim == 2 ? side * side : side;
    if (cells > (std::int64_t(1) << 27))
        throw resource_error("polymer transfer window exceeds the cell budget at N=" + std::to_string(n_total));

    std::vector<double> bufa(static_cast<std::size_t>(cells), 0.0);
    std::vector<double> bufb(static_cast<std::size_t>(cells), 0.0);
    std::vector<double> wrow(static_cast<std::size_t>(2 * w_final + 1), 1.0);
    double* cur = bufa.data();
    double* next = bufb.data();
    cur[g.dim == 2 ? origin * side + origin : origin] = 1.0;

    double offset = 0.0;
    std::size_t next_checkpoint = 0;

    const auto plane_sum = [&](std::int64_t n, std::int64_t w, const double* layer) {
        double s = 0.0;
        if (g.dim == 2) {
            for (std::int64_t y = -w; y <= w; ++y) {
                const double* row = layer + (y + origin) * side;
                const std::int64_t x0 = g.parity ? -w + (((-w + y + n) & 1) != 0 ? 1 : 0) : -w;
                for (std::int64_t x = x0; x <= w; x += g.parity ? 2 : 1) s += row[x + origin];
            }
        } else {
            const std::int64_t x0 = g.parity ? -w + (((-w + n) & 1) != 0 ? 1 : 0) : -w;
            for (std::int64_t x = x0; x <= w; x += g.parity ? 2 : 1) s += layer[x + origin];
        }
        return s;
    };

    while (next_checkpoint < horizons.size() && horizons[next_checkpoint] == 0) {
        log_z_out[next_checkpoint] = 0.0;
        ++next_checkpoint;
    }

    for (std::int64_t n = 1; n <= n_total; ++n) {
        const std::int64_t w = std::min(window_half_width(g, n, sigmas), w_final);
        double layer_max = 0.0;
        if (g.dim == 2) {
            for (std::int64_t y = -w; y <= w; ++y) {
                weights.fill(n, y, -w, 2 * w + 1, 2, wrow.data());
                const double* c = cur + (y + origin) * side;
                const double* cu = cur + (y - 1 + origin) * side;
                const double* cd = cur + (y + 1 + origin) * side;
                double* nx = next + (y + origin) * side;
                const std::int64_t x0 = -w + (((-w + y + n) & 1) != 0 ? 1 : 0);
                for (std::int64_t x = x0; x <= w; x += 2) {
                    const std::int64_t i = x + origin;
                    const double v = 0.25 * (c[i - 1] + c[i + 1] + cu[i] + cd[i])
                                   * wrow[static_cast<std::size_t>(x + w)];
                    nx[i] = v;
                    layer_max = std::max(layer_max, v);
                }
            }
        } else if (walk.family == WalkFamily::ssrw_1d) {
            weights.fill(n, 0, -w, 2 * w + 1, 1, wrow.data());
            const std::int64_t x0 = -w + (((-w + n) & 1) != 0 ? 1 : 0);
            for (std::int64_t x = x0; x <= w; x += 2) {
                const std::int64_t i = x + origin;
                const double v = 0.5 * (cur[i - 1] + cur[i + 1]) * wrow[static_cast<std::size_t>(x + w)];
                next[i] = v;
                layer_max = std::max(layer_max, v);
            }
        } else {
            weights.fill(n, 0, -w, 2 * w + 1, 1, wrow.data());
            const std::int64_t prev_w = std::min(window_half_width(g, n - 1, sigmas), w_final);
            for (std::int64_t x = -w; x <= w; ++x) {
                double s = 0.0;
                const std::int64_t d_lo = std::max(-walk.x_max, x - prev_w);
                const std::int64_t d_hi = std::min(walk.x_max, x + prev_w);
                for (std::int64_t d = d_lo; d <= d_hi; ++d)
                    s += walk.step_prob(d) * cur[x - d + origin];
                const double v = s * wrow[static_cast<std::size_t>(x + w)];
                next[x + origin] = v;
                layer_max = std::max(layer_max, v);
            }
        }

        if (layer_max > kRescaleHigh || (layer_max > 0.0 && layer_max < kRescaleLow)) {
            const double factor = 1.0 / layer_max;
            if (g.dim == 2) {
                for (std::int64_t y = -w; y <= w; ++y) {
                    double* row = next + (y + origin) * side;
                    for (std::int64_t x = -w; x <= w; ++x) row[x + origin] *= factor;
                }
            } else {
                for (std::int64_t x = -w; x <= w; ++x) next[x + origin] *= factor;
            }
            offset += std::log(layer_max);
        }
        std::swap(cur, next);
        while (next_checkpoint < horizons.size() && horizons[next_checkpoint] == n) {
            log_z_out[next_checkpoint] = std::log(plane_sum(n, w, cur)) + offset;
            ++next_checkpoint;
        }
    }
}

} // namespace

double polymer_window_loss(const WalkLaw& walk, std::int64_t n, double window_sigmas) {
    struct Key {
        int family;
        double alpha;
        std::int64_t x_max;
        std::int64_t n;
        double sigmas;
        auto operator<=>(const Key&) const = default;
    };
    static std::mutex mu;
    static std::map<std::tuple<int, double, std::int64_t, std::int64_t, double>, double> cache;
    const auto key = std::make_tuple(static_cast<int>(walk.family), walk.alpha, walk.x_max, n, window_sigmas);
    {
        std::lock_guard<std::mutex> lock(mu);
        const auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    RowWeights pure;
    pure.pure = true;
    const std::int64_t horizon[1] = {n};
    double log_mass = 0.0;
    polymer_log_z_single(walk, pure, window_sigmas, {horizon, 1}, {&log_mass, 1});
    const double loss = -std::expm1(log_mass); // 1 - kept mass
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, loss);
    return loss;
}

void batch_polymer_log_z(const PolymerBatch& batch, std::span<const std::int64_t> horizons,
                         std::int64_t replicas, std::uint64_t master, std::uint64_t stream0,
                         std::span<double> out, Exec exec) {
    const std::size_t per_replica = horizons.size();
    if (out.size() < static_cast<std::size_t>(replicas) * per_replica)
        throw validation_error("batch_polymer_log_z: output span too small");
    const double loss = polymer_window_loss(*batch.walk, horizons.back(), batch.window_sigmas);
    if (loss > batch.window_tol)
        throw resource_error("polymer window loses " + std::to_string(loss)
                             + " of the walk mass at N=" + std::to_string(horizons.back())
                             + ", above tolerance " + std::to_string(batch.window_tol));

    const double shift = -log_mgf(batch.disorder, batch.beta);
    for_each_index(replicas, exec, [&](std::int64_t r) {
        RowWeights weights;
        weights.spec = &batch.disorder;
        weights.beta = batch.beta;
        weights.log_shift = shift;
        weights.master = master;
        weights.stream = stream0 + static_cast<std::uint64_t>(r);
        weights.init();
        polymer_log_z_single(*batch.walk, weights, batch.window_sigmas, horizons,
                             out.subspan(static_cast<std::size_t>(r) * per_replica, per_replica));
    });
}

PartitionValue polymer_partition(const WalkLaw& walk,
                                 const std::function<double(std::int64_t, std::int64_t, std::int64_t)>& omega,
                                 double beta, double h_shift, std::int64_t n, PolymerMode mode,
                                 std::int64_t target_x, std::int64_t target_y,
                                 double window_sigmas) {
    const WalkGeometry g = geometry_of(walk);
    const std::int64_t w_final = window_half_width(g, n, window_sigmas);
    const std::int64_t origin = w_final + g.reach;
    const std::int64_t side = 2 * origin + 1;
    const std::int64_t cells = g.dim == 2 ? side * side : side;
    if (cells > (std::int64_t(1) << 24))
        throw resource_error("polymer_partition: window exceeds the cell budget at N=" + std::to_string(n));

    std::vector<double> bufa(static_cast<std::size_t>(cells), 0.0);
    std::vector<double> bufb(static_cast<std::size_t>(cells), 0.0);
    double* cur = bufa.data();
    double* next = bufb.data();
    cur[g.dim == 2 ? origin * side + origin : origin] = 1.0;
    double offset = 0.0;

    for (std::int64_t m = 1; m <= n; ++m) {
        const std::int64_t w = std::min(window_half_width(g, m, window_sigmas), w_final);
        double layer_max = 0.0;
        const auto site_weight = [&](std::int64_t x, std::int64_t y) {
            return std::exp(beta * omega(m, x, y) + h_shift);
        };
        if (g.dim == 2) {
            for (std::int64_t y = -w; y <= w; ++y) {
                const double* c = cur + (y + origin) * side;
                const double* cu = cur + (y - 1 + origin) * side;
                const double* cd = cur + (y + 1 + origin) * side;
                double* nx = next + (y + origin) * side;
                const std::int64_t x0 = -w + (((-w + y + m) & 1) != 0 ? 1 : 0);
                for (std::int64_t x = x0; x <= w; x += 2) {
                    const std::int64_t i = x + origin;
                    const double v = 0.25 * (c[i - 1] + c[i + 1] + cu[i] + cd[i]) * site_weight(x, y);
                    nx[i] = v;
                    layer_max = std::max(layer_max, v);
                }
            }
        } else if (walk.family == WalkFamily::ssrw_1d) {
            const std::int64_t x0 = -w + (((-w + m) & 1) != 0 ? 1 : 0);
            for (std::int64_t x = x0; x <= w; x += 2) {
                const std::int64_t i = x + origin;
                const double v = 0.5 * (cur[i - 1] + cur[i + 1]) * site_weight(x, 0);
                next[i] = v;
                layer_max = std::max(layer_max, v);
            }
        } else {
            const std::int64_t prev_w = std::min(window_half_width(g, m - 1, window_sigmas), w_final);
            for (std::int64_t x = -w; x <= w; ++x) {
                double s = 0.0;
                const std::int64_t d_lo = std::max(-walk.x_max, x - prev_w);
                const std::int64_t d_hi = std::min(walk.x_max, x + prev_w);
                for (std::int64_t d = d_lo; d <= d_hi; ++d)
                    s += walk.step_prob(d) * cur[x - d + origin];
                const double v = s * site_weight(x, 0);
                next[x + origin] = v;
                layer_max = std::max(layer_max, v);
            }
        }
        if (layer_max > kRescaleHigh || (layer_max > 0.0 && layer_max < kRescaleLow)) {
            const double factor = 1.0 / layer_max;
            for (std::int64_t i = 0; i < cells; ++i) next[i] *= factor;
            offset += std::log(layer_max);
        }
        std::swap(cur, next);
    }

    double s = 0.0;
    if (mode == PolymerMode::point_to_plane) {
        const std::int64_t w = std::min(window_half_width(g, n, window_sigmas), w_final);
        if (g.dim == 2) {
            for (std::int64_t y = -w; y <= w; ++y)
                for (std::int64_t x = -w; x <= w; ++x) {
                    if (g.parity && (((x + y + n) & 1) != 0)) continue;
                    s += cur[(y + origin) * side + (x + origin)];
                }
        } else {
            for (std::int64_t x = -w; x <= w; ++x) {
                if (g.parity && (((x + n) & 1) != 0)) continue;
                s += cur[x + origin];
            }
        }
    } else {
        if (std::abs(target_x) > w_final || (g.dim == 2 && std::abs(target_y) > w_final))
            throw validation_error("polymer_partition: point-to-point target outside the window");
        s = g.dim == 2 ? cur[(target_y + origin) * side + (target_x + origin)]
                       : cur[target_x + origin];
    }

    PartitionValue out;
    out.log_value = std::log(s) + offset;
    out.value = std::exp(out.log_value);
    out.model = "polymer";
    out.n = n;
    out.beta = beta;
    out.h = h_shift;
    out.endpoint = mode == PolymerMode::point_to_plane ? Endpoint::free_end : Endpoint::constrained;
    return out;
}

double polymer_partition_enumerate(const WalkLaw& walk,
                                   const std::function<double(std::int64_t, std::int64_t, std::int64_t)>& omega,
                                   double beta, double h_shift, std::int64_t n, PolymerMode mode,
                                   std::int64_t target_x, std::int64_t target_y) {
    if (walk.family == WalkFamily::stable_1d)
        throw validation_error("polymer_partition_enumerate: only the simple walks enumerate");
    if (n > 12) throw resource_error("polymer_partition_enumerate: N too large");
    const int dirs = walk.family == WalkFamily::ssrw_1d ? 2 : 4;
    const double step_p = 1.0 / dirs;
    double total = 0.0;
    std::int64_t paths = 1;
    for (std::int64_t i = 0; i < n; ++i) paths *= dirs;
    for (std::int64_t code = 0; code < paths; ++code) {
        std::int64_t c = code, x = 0, y = 0;
        double weight = 1.0;
        for (std::int64_t m = 1; m <= n; ++m) {
            const int d = static_cast<int>(c % dirs);
            c /= dirs;
            if (walk.family == WalkFamily::ssrw_1d) {
                x += d == 0 ? 1 : -1;
            } else {
                x += (d == 0) - (d == 1);
                y += (d == 2) - (d == 3);
            }
            weight *= step_p * std::exp(beta * omega(m, x, y) + h_shift);
        }
        if (mode == PolymerMode::point_to_plane) total += weight;
        else if (x == target_x && (walk.family == WalkFamily::ssrw_1d || y == target_y)) total += weight;
    }
    return total;
}

// ---------------------------------------------------------------- continuum

double continuum_pinning_sample(const ContinuumPinningParams& params, SeedProvenance seed) {
    if (!(params.mean_interarrival > 0.0) || !std::isfinite(params.mean_interarrival))
        throw validation_error("continuum_pinning_sample: mean_interarrival must be finite and > 0");
    const double m = params.mean_interarrival;
    const double w_t = std::sqrt(params.t) * rng::gaussian(seed.master, seed.stream, 0);
    const double expo = params.beta_hat / m * w_t
                      + (params.h_hat / m - params.beta_hat * params.beta_hat / (2.0 * m * m)) * params.t;
    return std::exp(expo);
}

} // namespace lab
