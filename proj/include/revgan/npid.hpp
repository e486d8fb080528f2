#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>

#include "revgan/codec.hpp"
#include "revgan/error.hpp"
#include "revgan/rounding.hpp"

namespace revgan {

inline constexpr int kNpidCap10 = 17;
inline constexpr int kNpidCap2 = 52;

inline int npid_cap(int base) {
    if (base == 10) return kNpidCap10;
    if (base == 2) return kNpidCap2;
    throw DomainError("npid base must be 10 or 2, got " + std::to_string(base));
}

namespace detail {

/// Shortest round-trip decimal, split into integer and fraction digits.
inline std::pair<std::string, std::string> decimal_digits(double x) {
    char buf[400];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed);
    std::string s(buf, res.ptr);
    const auto dot = s.find('.');
    if (dot == std::string::npos) return {s, ""};
    return {s.substr(0, dot), s.substr(dot + 1)};
}

inline int npid10(double a, double b) {
    auto [ia, fa] = decimal_digits(a);
    auto [ib, fb] = decimal_digits(b);
    const std::size_t iw = std::max(ia.size(), ib.size());
    ia.insert(0, iw - ia.size(), '0');
    ib.insert(0, iw - ib.size(), '0');
    const std::size_t fw = std::max(fa.size(), fb.size());
    fa.append(fw - fa.size(), '0');
    fb.append(fw - fb.size(), '0');
    const std::string da = ia + fa, db = ib + fb;
    int n = 0;
    while (n < kNpidCap10 && static_cast<std::size_t>(n) < da.size() && da[static_cast<std::size_t>(n)] == db[static_cast<std::size_t>(n)])
        ++n;
    // Beyond the printed digits both expansions continue with zeros.
    if (static_cast<std::size_t>(n) == da.size()) n = kNpidCap10;
    return n;
}

/// Exact binary expansion: scale both into [0, 1) by the same power of two,
/// then peel digits by doubling (every step is exact in binary64).
inline int npid2(double a, double b) {
    int width = 1;
    for (double v : {a, b})
        if (v >= 1.0) width = std::max(width, std::ilogb(v) + 1);
    double fa = std::ldexp(a, -width), fb = std::ldexp(b, -width);
    int n = 0;
    while (n < kNpidCap2) {
        fa *= 2.0;
        fb *= 2.0;
        const int da = fa >= 1.0, db = fb >= 1.0;
        if (da != db) break;
        fa -= da;
        fb -= db;
        ++n;
    }
    return n;
}

}  // namespace detail

/// Number of identical leading digits, counted from the integer digit. Identical
/// inputs return the cap (17 decimal, 52 binary). Operands of opposite sign
/// share no digits.
inline int npid(double a, double b, int base = 10) {
    const int cap = npid_cap(base);
    if (!std::isfinite(a) || !std::isfinite(b)) return 0;
    if (a == b) return cap;
    if ((a < 0.0) != (b < 0.0)) return 0;
    a = std::fabs(a);
    b = std::fabs(b);
    return base == 10 ? detail::npid10(a, b) : detail::npid2(a, b);
}

/// round(y Q) / Q with the shared rounding rule.
inline double rounding_oracle(double y, double q) {
    if (!(y > 0.0 && y < 1.0)) throw DomainError("rounding oracle needs 0 < y < 1");
    if (!(q > 0.0)) throw DomainError("rounding oracle needs Q > 0");
    return round_half_away(y * q) / q;
}

/// Leading bits shared by the n-bit layout representations of two noise values.
/// A recovered value outside the tolerated range shares nothing.
inline int recovery_bits(double x, double recovered, int n = 52) {
    std::uint64_t va = 0, vb = 0;
    try {
        va = noise_to_value(x, n);
        vb = noise_to_value(recovered, n);
    } catch (const RangeError&) {
        return 0;
    }
    const std::uint64_t diff = va ^ vb;
    if (diff == 0) return n;
    return n - std::bit_width(diff);
}

}  // namespace revgan
