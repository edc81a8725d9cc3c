#pragma once

// Counter-based random numbers (Philox 2x64, 10 rounds).  Every draw is a
// pure function of (key, stream, index), so replicas can be evaluated in any
// order, on any number of threads, and still reproduce bit-exactly.
//
// Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC 2011.

#include <cmath>
#include <cstdint>
#include <utility>

namespace lab::rng {

inline constexpr uint64_t kPhiloxM2x64 = 0xD2B74407B1CE6E93ULL;
inline constexpr uint64_t kPhiloxW64   = 0x9E3779B97F4A7C15ULL;

struct Block {
    uint64_t lo;
    uint64_t hi;
};

// One 128-bit Philox block for counter (ctr0, ctr1) under `key`.
inline Block philox2x64(uint64_t key, uint64_t ctr0, uint64_t ctr1) {
    uint64_t x0 = ctr0, x1 = ctr1, k = key;
    for (int round = 0; round < 10; ++round) {
        const unsigned __int128 prod = static_cast<unsigned __int128>(kPhiloxM2x64) * x0;
        const uint64_t hi = static_cast<uint64_t>(prod >> 64);
        const uint64_t lo = static_cast<uint64_t>(prod);
        x0 = hi ^ k ^ x1;
        x1 = lo;
        k += kPhiloxW64;
    }
    return {x0, x1};
}

// 64-bit finalizer used for deriving sub-keys (task seeds) from a master
// seed.  SplitMix64 constants.
inline uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_key(uint64_t master, uint64_t tag) {
    return mix64(master ^ mix64(tag));
}

// Uniform in the open interval (0,1); never returns 0 or 1, so logs are safe.
inline double to_u01(uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double u01(uint64_t key, uint64_t stream, uint64_t index) {
    return to_u01(philox2x64(key, index, stream).lo);
}

// One standard normal per site index (Box-Muller on the two block lanes;
// the sine lane is discarded to keep one-draw-per-index addressing).
inline double gaussian(uint64_t key, uint64_t stream, uint64_t index) {
    const Block b = philox2x64(key, index, stream);
    const double u1 = to_u01(b.lo);
    const double u2 = to_u01(b.hi);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// +/-1 with equal probability.  Site i consumes one bit of the 128-bit block
// that covers indices [i & ~127, i & ~127 + 127], so consecutive indices
// share blocks; fill_signs exploits that.
inline int sign_at(uint64_t key, uint64_t stream, uint64_t index) {
    const Block b = philox2x64(key, index >> 7, stream);
    const uint64_t lane = (index & 64) ? b.hi : b.lo;
    return (lane >> (index & 63)) & 1 ? 1 : -1;
}

// Fill out[0..count) with the signs at indices index0..index0+count-1,
// touching each Philox block once.
inline void fill_signs(uint64_t key, uint64_t stream, uint64_t index0,
                       std::size_t count, signed char* out) {
    std::size_t done = 0;
    while (done < count) {
        const uint64_t idx = index0 + done;
        const Block b = philox2x64(key, idx >> 7, stream);
        const unsigned offset = static_cast<unsigned>(idx & 127);
        for (unsigned j = offset; j < 128 && done < count; ++j, ++done) {
            const uint64_t lane = (j & 64) ? b.hi : b.lo;
            out[done] = (lane >> (j & 63)) & 1 ? 1 : -1;
        }
    }
}

} // namespace lab::rng
