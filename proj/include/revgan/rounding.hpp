#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "revgan/error.hpp"

namespace revgan {

/// The single rounding rule used for on-chain integers: half away from zero.
inline double round_half_away(double x) noexcept { return std::round(x); }

/// Rounds a generated amount to the on-chain integer it becomes.
inline std::uint64_t to_amount(double x) {
    const double r = round_half_away(x);
    if (!(r >= 0.0 && r < 0x1.0p64))
        throw RangeError("amount " + std::to_string(x) + " not representable as a uint64");
    return static_cast<std::uint64_t>(r);
}

/// 10^k as binary64 for |k| <= 22 (exact for k >= 0).
inline double pow10(int k) {
    double p = 1.0;
    for (int i = 0; i < (k < 0 ? -k : k); ++i) p *= 10.0;
    return k < 0 ? 1.0 / p : p;
}

inline std::uint64_t pow10_u64(int k) {
    if (k < 0 || k > 19) throw RangeError("10^" + std::to_string(k) + " out of uint64 range");
    std::uint64_t p = 1;
    for (int i = 0; i < k; ++i) p *= 10;
    return p;
}

}  // namespace revgan
