#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "revgan/error.hpp"

namespace revgan {

/// Bits carried by one expansion field: n_bits / n_fields.
inline double absolute_capacity(double n_bits, double n_fields) {
    if (!(n_fields >= 1.0)) throw DomainError("absolute capacity needs n_fields >= 1");
    return n_bits / n_fields;
}

/// Capacity expansion rate in percent.
inline double cer(double ac_ecc, double ac_occ) {
    if (!(ac_occ > 0.0)) throw DomainError("cer needs a positive baseline capacity");
    return 100.0 * ac_ecc / ac_occ;
}

/// Percentage 100 * num / den rounded half-up to hundredths, exact in integers.
inline std::int64_t percent_hundredths(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw DomainError("zero denominator");
    const unsigned __int128 n = static_cast<unsigned __int128>(num) * 20000U + den;
    return static_cast<std::int64_t>(n / (2U * static_cast<unsigned __int128>(den)));
}

inline std::string format_hundredths(std::int64_t h) {
    std::string frac = std::to_string(h % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return std::to_string(h / 100) + "." + frac;
}

/// Exact CER for an integer expansion capacity, e.g. "91.67".
inline std::string cer_exact(std::uint64_t ac_ecc, std::uint64_t ac_occ) {
    if (ac_occ == 0) throw DomainError("cer needs a positive baseline capacity");
    return format_hundredths(percent_hundredths(ac_ecc, ac_occ));
}

/// Bits per transaction of the original (embedding-field) channels.
struct Baseline {
    std::string_view name;
    std::uint64_t bits_per_tx;
};

inline constexpr std::array<Baseline, 4> kBaselines{{
    {"HC-CDE", 12},
    {"DSA", 256},
    {"Un-UTXO", 160},
    {"DLchain", 128},
}};

}  // namespace revgan
