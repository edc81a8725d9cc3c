#pragma once

// Stable 64-bit site indices for disorder fields.  The packing is independent
// of any truncation window, so a site's draw never depends on how wide the
// transfer window happened to be.

#include <cstdint>

#include "lab/errors.hpp"

namespace lab {

inline constexpr std::int64_t kLatticeCoordOffset = std::int64_t(1) << 21;

// 1d space-time site (n, x): n < 2^20, |x| < 2^21.
inline std::uint64_t pack_site_1d(std::int64_t n, std::int64_t x) {
    return (static_cast<std::uint64_t>(n) << 22)
         | static_cast<std::uint64_t>(x + kLatticeCoordOffset);
}

// 2d space-time site (n, x, y): n < 2^20, |x|,|y| < 2^21.
inline std::uint64_t pack_site_2d(std::int64_t n, std::int64_t x, std::int64_t y) {
    return (static_cast<std::uint64_t>(n) << 44)
         | (static_cast<std::uint64_t>(y + kLatticeCoordOffset) << 22)
         | static_cast<std::uint64_t>(x + kLatticeCoordOffset);
}

inline void check_lattice_bounds(std::int64_t n, std::int64_t coord_extent) {
    if (n >= (std::int64_t(1) << 20) || coord_extent >= kLatticeCoordOffset)
        throw resource_error("lattice index space exceeded (n or window too large)");
}

} // namespace lab
