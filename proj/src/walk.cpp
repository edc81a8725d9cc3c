#include "lab/walk.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>

#include "lab/errors.hpp"
#include "lab/rng.hpp"

namespace lab {
namespace {

constexpr std::int64_t kCellBudget = std::int64_t(1) << 26;

// Characteristic function of the stable step law on a cubically graded
// theta-grid in (0, pi], cached per (alpha, x_max).
struct StepCharacteristic {
    std::vector<double> theta;
    std::vector<double> log_abs_phi;
    std::vector<double> suffix_max; // max of log_abs_phi over [j, end)
};

const StepCharacteristic& characteristic_table(const WalkLaw& walk) {
    static std::mutex mu;
    static std::unordered_map<std::uint64_t, StepCharacteristic> cache;
    const std::uint64_t key = rng::mix64(static_cast<std::uint64_t>(walk.alpha * 1e9))
                            ^ static_cast<std::uint64_t>(walk.x_max);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    StepCharacteristic tab;
    const int grid = 4096;
    tab.theta.resize(grid);
    tab.log_abs_phi.resize(grid);
    const double p0 = walk.step_prob(0);
    for (int j = 0; j < grid; ++j) {
        const double frac = (static_cast<double>(j) + 1.0) / grid;
        const double th = M_PI * frac * frac * frac;
        double phi = p0;
        for (std::int64_t x = 1; x <= walk.x_max; ++x)
            phi += 2.0 * walk.step_prob(x) * std::cos(th * static_cast<double>(x));
        tab.theta[j] = th;
        tab.log_abs_phi[j] = std::log(std::max(std::abs(phi), 1e-300));
    }
    tab.suffix_max.resize(grid);
    double running = -1e300;
    for (int j = grid - 1; j >= 0; --j) {
        running = std::max(running, tab.log_abs_phi[j]);
        tab.suffix_max[j] = running;
    }
    return cache.emplace(key, std::move(tab)).first->second;
}

double stable_q2(const WalkLaw& walk, std::int64_t n) {
    // sum_x q_n(x)^2 = (1/pi) int_0^pi phi(theta)^{2n} dtheta
    const StepCharacteristic& tab = characteristic_table(walk);
    const double two_n = 2.0 * static_cast<double>(n);
    double integral = 0.0;
    double prev_theta = 0.0;
    double prev_val = 1.0; // phi(0) = 1
    for (std::size_t j = 0; j < tab.theta.size(); ++j) {
        const double expo = two_n * tab.log_abs_phi[j];
        const double val = expo < -46.0 ? 0.0 : std::exp(expo);
        integral += 0.5 * (prev_val + val) * (tab.theta[j] - prev_theta);
        prev_theta = tab.theta[j];
        prev_val = val;
        if (two_n * tab.suffix_max[j] < -46.0) break;
    }
    return integral / M_PI;
}

KernelColumn kernel_column_1d(const WalkLaw& walk, std::int64_t n, double tol) {
    const std::int64_t reach = walk.family == WalkFamily::ssrw_1d ? 1 : walk.x_max;
    std::vector<double> cur{1.0};
    std::int64_t x_min = 0;
    double trimmed = 0.0;
    for (std::int64_t m = 1; m <= n; ++m) {
        const std::int64_t len = static_cast<std::int64_t>(cur.size());
        const std::int64_t out_len = len + 2 * reach;
        if (out_len > kCellBudget)
            throw resource_error("kernel_column: window exceeds cell budget at n=" + std::to_string(m));
        std::vector<double> next(static_cast<std::size_t>(out_len), 0.0);
        if (walk.family == WalkFamily::ssrw_1d) {
            for (std::int64_t i = 0; i < len; ++i) {
                next[static_cast<std::size_t>(i)] += 0.5 * cur[static_cast<std::size_t>(i)];
                next[static_cast<std::size_t>(i + 2)] += 0.5 * cur[static_cast<std::size_t>(i)];
            }
        } else {
            for (std::int64_t i = 0; i < len; ++i) {
                const double q = cur[static_cast<std::size_t>(i)];
                if (q == 0.0) continue;
                for (std::int64_t s = -reach; s <= reach; ++s)
                    next[static_cast<std::size_t>(i + s + reach)] += q * walk.step_prob(s);
            }
        }
        x_min -= reach;
        cur = std::move(next);
        // mirror the positive half onto the negative one so q(x) == q(-x)
        // holds bit-exactly (the convolution order would otherwise leave
        // round-off asymmetry)
        const std::int64_t center = -x_min;
        for (std::int64_t x = 1; center - x >= 0; ++x) {
            if (center + x >= static_cast<std::int64_t>(cur.size())) break;
            cur[static_cast<std::size_t>(center - x)] = cur[static_cast<std::size_t>(center + x)];
        }
        // trim tail cells in symmetric pairs within the per-step budget
        const double budget = tol * static_cast<double>(m) / static_cast<double>(n);
        std::size_t lo = 0, hi = cur.size();
        while (hi - lo > 2 && trimmed + cur[lo] + cur[hi - 1] <= budget) {
            trimmed += cur[lo] + cur[hi - 1];
            ++lo;
            --hi;
        }
        if (lo > 0 || hi < cur.size()) {
            cur = std::vector<double>(cur.begin() + static_cast<std::ptrdiff_t>(lo),
                                      cur.begin() + static_cast<std::ptrdiff_t>(hi));
            x_min += static_cast<std::int64_t>(lo);
        }
    }
    KernelColumn col;
    col.n = n;
    col.dim = 1;
    col.x_min = x_min;
    col.values = std::move(cur);
    col.truncation_mass = trimmed;
    return col;
}

KernelColumn kernel_column_2d(std::int64_t n, double /*tol*/) {
    // exact on the full diamond |x|+|y| <= n (no truncation)
    const std::int64_t w = n;
    const std::int64_t side = 2 * w + 1;
    if (side * side > kCellBudget)
        throw resource_error("kernel_column: 2d window exceeds cell budget at n=" + std::to_string(n));
    std::vector<double> cur(static_cast<std::size_t>(side * side), 0.0);
    std::vector<double> next(cur.size(), 0.0);
    const auto idx = [&](std::int64_t x, std::int64_t y) {
        return static_cast<std::size_t>((y + w) * side + (x + w));
    };
    cur[idx(0, 0)] = 1.0;
    for (std::int64_t m = 1; m <= n; ++m) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::int64_t y = -m; y <= m; ++y) {
            for (std::int64_t x = -m; x <= m; ++x) {
                if (((x + y + m) & 1) != 0) continue;
                double s = 0.0;
                if (x - 1 >= -w) s += cur[idx(x - 1, y)];
                if (x + 1 <= w) s += cur[idx(x + 1, y)];
                if (y - 1 >= -w) s += cur[idx(x, y - 1)];
                if (y + 1 <= w) s += cur[idx(x, y + 1)];
                next[idx(x, y)] = 0.25 * s;
            }
        }
        // enforce exact central symmetry q(x,y) == q(-x,-y)
        for (std::int64_t y = 0; y <= m; ++y)
            for (std::int64_t x = (y == 0 ? 1 : -m); x <= m; ++x)
                next[idx(-x, -y)] = next[idx(x, y)];
        std::swap(cur, next);
    }
    KernelColumn col;
    col.n = n;
    col.dim = 2;
    col.half_width = w;
    col.values = std::move(cur);
    col.truncation_mass = 0.0;
    return col;
}

} // namespace

double WalkLaw::step_prob(std::int64_t dx) const {
    switch (family) {
        case WalkFamily::ssrw_1d:
            return (dx == 1 || dx == -1) ? 0.5 : 0.0;
        case WalkFamily::ssrw_2d:
            throw validation_error("step_prob: 2d steps are vector-valued, use the kernel routines");
        case WalkFamily::stable_1d: {
            if (dx < -x_max || dx > x_max) return 0.0;
            return step_pmf[static_cast<std::size_t>(dx + x_max)];
        }
    }
    return 0.0;
}

WalkLaw make_ssrw_1d() {
    WalkLaw w;
    w.family = WalkFamily::ssrw_1d;
    w.period = 2;
    return w;
}

WalkLaw make_ssrw_2d() {
    WalkLaw w;
    w.family = WalkFamily::ssrw_2d;
    w.period = 2;
    return w;
}

WalkLaw make_stable_1d(double alpha, std::int64_t x_max) {
    if (!(alpha > 0.5) || alpha > 2.0)
        throw validation_error("walk.alpha: stable-1d supports alpha in (0.5, 2]");
    if (x_max < 1) throw validation_error("walk.X_max: must be >= 1");
    WalkLaw w;
    w.family = WalkFamily::stable_1d;
    w.alpha = alpha;
    w.x_max = x_max;
    w.period = 1;
    w.step_pmf.resize(static_cast<std::size_t>(2 * x_max + 1));
    double total = 0.0;
    for (std::int64_t x = -x_max; x <= x_max; ++x) {
        const double p = 1.0 / (1.0 + std::pow(std::abs(static_cast<double>(x)), 1.0 + alpha));
        w.step_pmf[static_cast<std::size_t>(x + x_max)] = p;
        total += p;
    }
    w.step_cdf.resize(w.step_pmf.size());
    double c = 0.0;
    for (std::size_t i = 0; i < w.step_pmf.size(); ++i) {
        w.step_pmf[i] /= total;
        c += w.step_pmf[i];
        w.step_cdf[i] = c;
    }
    return w;
}

double KernelColumn::at(std::int64_t x) const {
    if (dim != 1) throw validation_error("KernelColumn::at(x): column is 2d");
    const std::int64_t i = x - x_min;
    if (i < 0 || i >= static_cast<std::int64_t>(values.size())) return 0.0;
    return values[static_cast<std::size_t>(i)];
}

double KernelColumn::at(std::int64_t x, std::int64_t y) const {
    if (dim != 2) throw validation_error("KernelColumn::at(x,y): column is 1d");
    if (std::abs(x) > half_width || std::abs(y) > half_width) return 0.0;
    const std::int64_t side = 2 * half_width + 1;
    return values[static_cast<std::size_t>((y + half_width) * side + (x + half_width))];
}

KernelColumn kernel_column(const WalkLaw& walk, std::int64_t n, double tol) {
    if (n < 1) throw validation_error("kernel_column: n must be >= 1");
    if (!(tol > 0.0) || tol > 1e-3) throw validation_error("kernel_column: tol must be in (0, 1e-3]");
    if (walk.family == WalkFamily::ssrw_2d) return kernel_column_2d(n, tol);
    return kernel_column_1d(walk, n, tol);
}

double ssrw1d_return_prob(std::int64_t n) {
    // C(2n,n)/4^n via the stable product recurrence
    double r = 1.0;
    for (std::int64_t k = 1; k <= n; ++k)
        r *= (2.0 * static_cast<double>(k) - 1.0) / (2.0 * static_cast<double>(k));
    return r;
}

double coincidence_q2(const WalkLaw& walk, std::int64_t n) {
    switch (walk.family) {
        case WalkFamily::ssrw_1d: return ssrw1d_return_prob(n);
        case WalkFamily::ssrw_2d: {
            const double r = ssrw1d_return_prob(n);
            return r * r;
        }
        case WalkFamily::stable_1d: return stable_q2(walk, n);
    }
    return 0.0;
}

double polymer_overlap(const WalkLaw& walk, std::int64_t n, double /*tol*/) {
    if (n < 1) throw validation_error("polymer_overlap: N must be >= 1");
    if (walk.family == WalkFamily::ssrw_1d || walk.family == WalkFamily::ssrw_2d) {
        double total = 0.0;
        double r = 1.0;
        for (std::int64_t k = 1; k <= n; ++k) {
            r *= (2.0 * static_cast<double>(k) - 1.0) / (2.0 * static_cast<double>(k));
            total += walk.family == WalkFamily::ssrw_1d ? r : r * r;
        }
        return total;
    }
    double total = 0.0;
    for (std::int64_t m = 1; m <= n; ++m) total += stable_q2(walk, m);
    return total;
}

double polymer_overlap_by_convolution(const WalkLaw& walk, std::int64_t n, double tol) {
    if (walk.family == WalkFamily::ssrw_2d) {
        double total = 0.0;
        for (std::int64_t m = 1; m <= n; ++m) {
            const KernelColumn col = kernel_column_2d(m, tol);
            double s = 0.0;
            for (double q : col.values) s += q * q;
            total += s;
        }
        return total;
    }
    // evolve the 1d column once, accumulating sum q^2 per step
    double total = 0.0;
    for (std::int64_t m = 1; m <= n; ++m) {
        const KernelColumn col = kernel_column_1d(walk, m, tol);
        double s = 0.0;
        for (double q : col.values) s += q * q;
        total += s;
    }
    return total;
}

LatticePath sample_path(const WalkLaw& walk, std::int64_t n, SeedProvenance seed) {
    LatticePath path;
    path.x.reserve(static_cast<std::size_t>(n));
    std::int64_t x = 0, y = 0;
    switch (walk.family) {
        case WalkFamily::ssrw_1d:
            path.dim = 1;
            for (std::int64_t i = 0; i < n; ++i) {
                x += rng::sign_at(seed.master, seed.stream, static_cast<std::uint64_t>(i));
                path.x.push_back(x);
            }
            break;
        case WalkFamily::ssrw_2d: {
            path.dim = 2;
            path.y.reserve(static_cast<std::size_t>(n));
            for (std::int64_t i = 0; i < n; ++i) {
                const double u = rng::u01(seed.master, seed.stream, static_cast<std::uint64_t>(i));
                const int dir = static_cast<int>(u * 4.0);
                x += (dir == 0) - (dir == 1);
                y += (dir == 2) - (dir == 3);
                path.x.push_back(x);
                path.y.push_back(y);
            }
            break;
        }
        case WalkFamily::stable_1d:
            path.dim = 1;
            for (std::int64_t i = 0; i < n; ++i) {
                const double u = rng::u01(seed.master, seed.stream, static_cast<std::uint64_t>(i));
                const auto it = std::lower_bound(walk.step_cdf.begin(), walk.step_cdf.end(), u);
                const std::int64_t j = it == walk.step_cdf.end()
                    ? static_cast<std::int64_t>(walk.step_cdf.size()) - 1
                    : static_cast<std::int64_t>(it - walk.step_cdf.begin());
                x += j - walk.x_max;
                path.x.push_back(x);
            }
            break;
    }
    return path;
}

} // namespace lab
