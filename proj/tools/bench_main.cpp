// Micro-benchmark comparing the serial reference loops against the OpenMP
// replica drivers on the two transfer kernels that dominate every
// experiment.  Not part of the test suite.

#include <chrono>
#include <cstdio>
#include <vector>

#include "lab/disorder.hpp"
#include "lab/marginal.hpp"
#include "lab/parallel.hpp"
#include "lab/partition.hpp"
#include "lab/renewal.hpp"
#include "lab/walk.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename Fn>
double timed(const Fn& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return seconds_since(t0);
}

} // namespace

int main() {
    using namespace lab;
    const std::int64_t replicas = 64;
    const std::uint64_t master = 99;

    std::printf("threads available: %d\n", hardware_threads());

    {
        RenewalLaw law = build_renewal_law(0.5, 4096);
        law.renewal_mass(4096);
        PinningBatch batch{&law, DisorderSpec{}, 0.6, -0.18, Endpoint::free_end};
        const std::int64_t horizons[1] = {4096};
        std::vector<double> out_serial(replicas), out_parallel(replicas);
        const double ts = timed([&] {
            batch_pinning_log_z(batch, {horizons, 1}, replicas, master, 0, out_serial, Exec::serial);
        });
        const double tp = timed([&] {
            batch_pinning_log_z(batch, {horizons, 1}, replicas, master, 0, out_parallel, Exec::openmp);
        });
        bool same = true;
        for (std::int64_t r = 0; r < replicas; ++r)
            same = same && out_serial[static_cast<std::size_t>(r)] == out_parallel[static_cast<std::size_t>(r)];
        std::printf("pinning batch  N=4096 x%lld | serial %.3fs  openmp %.3fs  speedup %.2fx  bit-identical %s\n",
                    static_cast<long long>(replicas), ts, tp, ts / tp, same ? "yes" : "NO");
    }

    {
        WalkLaw walk = make_ssrw_2d();
        DisorderSpec spec;
        spec.family = DisorderFamily::rademacher;
        PolymerBatch batch;
        batch.walk = &walk;
        batch.disorder = spec;
        batch.beta = 0.4;
        const std::int64_t horizons[1] = {512};
        std::vector<double> out_serial(replicas), out_parallel(replicas);
        const double ts = timed([&] {
            batch_polymer_log_z(batch, {horizons, 1}, replicas, master, 0, out_serial, Exec::serial);
        });
        const double tp = timed([&] {
            batch_polymer_log_z(batch, {horizons, 1}, replicas, master, 0, out_parallel, Exec::openmp);
        });
        bool same = true;
        for (std::int64_t r = 0; r < replicas; ++r)
            same = same && out_serial[static_cast<std::size_t>(r)] == out_parallel[static_cast<std::size_t>(r)];
        std::printf("polymer batch  N=512  x%lld | serial %.3fs  openmp %.3fs  speedup %.2fx  bit-identical %s\n",
                    static_cast<long long>(replicas), ts, tp, ts / tp, same ? "yes" : "NO");
    }

    {
        WalkLaw walk = make_ssrw_2d();
        DisorderSpec spec; // gaussian
        const double ts = timed([&] {
            theta_blocks(walk, spec, 65536, 8, 512, master, Exec::serial);
        });
        const double tp = timed([&] {
            theta_blocks(walk, spec, 65536, 8, 512, master, Exec::openmp);
        });
        std::printf("theta blocks   N=2^16 x512 | serial %.3fs  openmp %.3fs  speedup %.2fx\n",
                    ts, tp, ts / tp);
    }
    return 0;
}
