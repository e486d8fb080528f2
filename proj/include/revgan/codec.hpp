#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "revgan/generator.hpp"
#include "revgan/rng.hpp"
#include "revgan/rounding.hpp"

namespace revgan {

/// Bit layout of one noise element, most significant first:
/// [1 random MSB | m covert bits | n - m - 1 random padding bits].
struct NoiseLayout {
    int n = 52;
    int m = 1;

    int padding_bits() const noexcept { return n - m - 1; }

    /// m = 0 is accepted and carries nothing.
    void validate() const {
        if (n < 2 || n > 52) throw LayoutError("n must lie in [2, 52], got " + std::to_string(n));
        if (m < 0 || m > n - 2)
            throw LayoutError("m must lie in [0, n - 2], got m=" + std::to_string(m) +
                              " n=" + std::to_string(n));
    }
};

using Bits = std::vector<bool>;

inline std::uint64_t max_value(int n) noexcept { return (std::uint64_t{1} << n) - 1; }

/// x = 2 v / (2^n - 1) - 1, computed as a single rounded division.
inline double value_to_noise(std::uint64_t v, int n) {
    const auto d = static_cast<std::int64_t>(max_value(n));
    const auto w = 2 * static_cast<std::int64_t>(v) - d;
    return static_cast<double>(w) / static_cast<double>(d);
}

/// Nearest v to (x + 1)(2^n - 1) / 2. Exact inverse of value_to_noise for
/// n <= 52: 2v - D is odd, and x * D (taken exactly with fma) lies within
/// 1/2 of it. Inputs beyond [-1, 1] by more than 2^-(n+1) are rejected; smaller
/// excursions clamp.
inline std::uint64_t noise_to_value(double x, int n) {
    const double tol = std::ldexp(1.0, -(n + 1));
    if (!(x >= -1.0 - tol && x <= 1.0 + tol))
        throw RangeError("noise " + std::to_string(x) + " outside [-1, 1]");
    const auto dmax = static_cast<std::int64_t>(max_value(n));
    const double d = static_cast<double>(dmax);
    const double p = x * d;
    const double err = std::fma(x, d, -p);
    const double k = std::nearbyint(p);
    const double r = (p - k) + err;
    auto w = static_cast<std::int64_t>(k);
    if ((w & 1) == 0) w += r >= 0.0 ? 1 : -1;
    std::int64_t v = (w + dmax) / 2;
    v = std::clamp<std::int64_t>(v, 0, dmax);
    return static_cast<std::uint64_t>(v);
}

inline Bits value_to_bits(std::uint64_t v, int n) {
    Bits b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = (v >> (n - 1 - i)) & 1U;
    return b;
}

inline std::uint64_t bits_to_value(const Bits& b) {
    if (b.size() > 64) throw LayoutError("more than 64 bits");
    std::uint64_t v = 0;
    for (bool bit : b) v = (v << 1) | (bit ? 1U : 0U);
    return v;
}

inline double bits_to_noise(const Bits& bits, int n) {
    if (static_cast<int>(bits.size()) != n)
        throw LayoutError("expected " + std::to_string(n) + " bits, got " +
                          std::to_string(bits.size()));
    if (n < 1 || n > 52) throw LayoutError("n must lie in [1, 52]");
    return value_to_noise(bits_to_value(bits), n);
}

inline Bits noise_to_bits(double x, int n) { return value_to_bits(noise_to_value(x, n), n); }

/// Bits 2..m+1 of an n-bit noise value.
inline std::uint64_t covert_slice(std::uint64_t v, const NoiseLayout& l) noexcept {
    if (l.m == 0) return 0;
    return (v >> l.padding_bits()) & max_value(l.m);
}

inline std::uint64_t compose_value(std::uint64_t msb, std::uint64_t covert, std::uint64_t padding,
                                   const NoiseLayout& l) noexcept {
    return (msb << (l.n - 1)) | (covert << l.padding_bits()) | padding;
}

/// Covert slices for one noise vector; element i holds an m-bit integer.
using Chunk = std::vector<std::uint64_t>;

struct EncodeOptions {
    std::size_t max_attempts = 10'000;
    /// Resample only failing elements between attempts instead of the whole vector.
    bool per_element = false;
};

struct EncodeResult {
    std::vector<std::uint64_t> amounts;
    nn::Vec noise;
    std::size_t attempts = 0;
    double elapsed_seconds = 0.0;
};

inline nlohmann::ordered_json to_json(const EncodeResult& r) {
    return {{"amounts", r.amounts}, {"attempts", r.attempts}, {"elapsed_seconds", r.elapsed_seconds}};
}

namespace detail {

/// Marks elements whose recovered covert bits match; false everywhere when the
/// attempt cannot be decoded at all.
inline bool verify(const ReversibleGenerator& gen, const std::vector<std::uint64_t>& values,
                   const Chunk& chunk, const NoiseLayout& layout, std::vector<std::uint64_t>& amounts,
                   std::vector<bool>& ok) {
    std::fill(ok.begin(), ok.end(), false);
    nn::Vec noise(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) noise[i] = value_to_noise(values[i], layout.n);
    nn::Vec recovered;
    try {
        const nn::Vec a = gen.generate(noise);
        for (std::size_t i = 0; i < a.size(); ++i) amounts[i] = to_amount(a[i]);
        recovered = gen.invert(std::span<const std::uint64_t>(amounts));
    } catch (const Error&) {
        return false;
    }
    bool all = true;
    for (std::size_t i = 0; i < recovered.size(); ++i) {
        try {
            ok[i] = covert_slice(noise_to_value(recovered[i], layout.n), layout) == chunk[i];
        } catch (const RangeError&) {
            ok[i] = false;
        }
        all = all && ok[i];
    }
    return all;
}

}  // namespace detail

/// Embeds one chunk: draws MSB and padding, generates, rounds, inverts, and
/// repeats until every element's covert bits survive the round trip.
inline EncodeResult encode(const ReversibleGenerator& gen, const Chunk& chunk,
                           const NoiseLayout& layout, Rng& rng, const EncodeOptions& opt = {}) {
    layout.validate();
    const std::size_t dims = gen.dims();
    if (chunk.size() != dims)
        throw LayoutError("chunk has " + std::to_string(chunk.size()) + " elements, expected " +
                          std::to_string(dims));
    for (auto c : chunk)
        if (c > max_value(layout.m)) throw LayoutError("covert slice wider than m bits");

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::uint64_t> values(dims), amounts(dims);
    std::vector<bool> ok(dims, false);
    for (std::size_t attempt = 1; attempt <= opt.max_attempts; ++attempt) {
        for (std::size_t i = 0; i < dims; ++i) {
            if (opt.per_element && ok[i]) continue;
            const std::uint64_t msb = rng.bits(1);
            const std::uint64_t pad = rng.bits(layout.padding_bits());
            values[i] = compose_value(msb, chunk[i], pad, layout);
        }
        if (detail::verify(gen, values, chunk, layout, amounts, ok)) {
            EncodeResult r;
            r.amounts = amounts;
            for (auto v : values) r.noise.push_back(value_to_noise(v, layout.n));
            r.attempts = attempt;
            r.elapsed_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return r;
        }
    }
    throw EncodingTimeout("no verified noise vector within " + std::to_string(opt.max_attempts) +
                          " attempts at m=" + std::to_string(layout.m));
}

/// Receiver side: invert the amounts and read bits 2..m+1 of each element.
inline Chunk decode(const ReversibleGenerator& gen, std::span<const std::uint64_t> amounts,
                    const NoiseLayout& layout) {
    layout.validate();
    if (amounts.size() != gen.dims())
        throw LayoutError("expected " + std::to_string(gen.dims()) + " amounts, got " +
                          std::to_string(amounts.size()));
    if (layout.m == 0) return Chunk(amounts.size(), 0);
    const nn::Vec x = gen.invert(amounts);
    Chunk out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = covert_slice(noise_to_value(x[i], layout.n), layout);
    return out;
}

// ---------------------------------------------------------------------------
// Payload framing. The stream is a 64-bit big-endian bit-length header followed
// by the payload, zero padded to whole chunks; the header alone is padded to
// whole chunks too, so it never shares a chunk with data.

inline Bits bytes_to_bits(std::span<const std::uint8_t> bytes) {
    Bits b;
    b.reserve(bytes.size() * 8);
    for (auto byte : bytes)
        for (int i = 7; i >= 0; --i) b.push_back((byte >> i) & 1U);
    return b;
}

inline std::vector<std::uint8_t> bits_to_bytes(const Bits& bits) {
    std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80U >> (i % 8));
    return out;
}

namespace detail {

inline std::vector<Chunk> pack(const Bits& stream, std::size_t dims, int m) {
    const std::size_t per_chunk = dims * static_cast<std::size_t>(m);
    std::vector<Chunk> out;
    for (std::size_t base = 0; base < stream.size(); base += per_chunk) {
        Chunk c(dims, 0);
        for (std::size_t e = 0; e < dims; ++e)
            for (int b = 0; b < m; ++b) {
                const std::size_t idx = base + e * static_cast<std::size_t>(m) + static_cast<std::size_t>(b);
                c[e] = (c[e] << 1) | ((idx < stream.size() && stream[idx]) ? 1U : 0U);
            }
        out.push_back(std::move(c));
    }
    return out;
}

inline Bits unpack(std::span<const Chunk> chunks, int m) {
    Bits out;
    for (const auto& c : chunks)
        for (auto slice : c)
            for (int b = m - 1; b >= 0; --b) out.push_back((slice >> b) & 1U);
    return out;
}

inline std::size_t header_chunks(std::size_t dims, int m) {
    const std::size_t per = dims * static_cast<std::size_t>(m);
    return (64 + per - 1) / per;
}

}  // namespace detail

inline std::vector<Chunk> chunk_payload(const Bits& payload, const NoiseLayout& layout,
                                        std::size_t dims = 64) {
    layout.validate();
    if (layout.m < 1) throw LayoutError("framing a payload needs m >= 1");
    const std::size_t per = dims * static_cast<std::size_t>(layout.m);
    Bits header(detail::header_chunks(dims, layout.m) * per, false);
    const std::uint64_t len = payload.size();
    for (int i = 0; i < 64; ++i) header[static_cast<std::size_t>(i)] = (len >> (63 - i)) & 1U;
    std::vector<Chunk> chunks = detail::pack(header, dims, layout.m);
    auto data = detail::pack(payload, dims, layout.m);
    chunks.insert(chunks.end(), data.begin(), data.end());
    return chunks;
}

inline Bits assemble_payload(std::span<const Chunk> chunks, const NoiseLayout& layout,
                             std::size_t dims = 64) {
    layout.validate();
    if (layout.m < 1) throw LayoutError("framing a payload needs m >= 1");
    const std::size_t hc = detail::header_chunks(dims, layout.m);
    if (chunks.size() < hc) throw PayloadError("stream shorter than its header");
    for (const auto& c : chunks)
        if (c.size() != dims) throw PayloadError("chunk of wrong width");
    const Bits header = detail::unpack(chunks.subspan(0, hc), layout.m);
    std::uint64_t len = 0;
    for (int i = 0; i < 64; ++i) len = (len << 1) | (header[static_cast<std::size_t>(i)] ? 1U : 0U);
    for (std::size_t i = 64; i < header.size(); ++i)
        if (header[i]) throw PayloadError("non-zero header padding");
    const std::size_t per = dims * static_cast<std::size_t>(layout.m);
    const std::uint64_t expected = (len + per - 1) / per;
    if (chunks.size() - hc != expected)
        throw PayloadError("header says " + std::to_string(len) + " bits (" +
                           std::to_string(expected) + " chunks), stream has " +
                           std::to_string(chunks.size() - hc));
    Bits data = detail::unpack(chunks.subspan(hc), layout.m);
    for (std::size_t i = len; i < data.size(); ++i)
        if (data[i]) throw PayloadError("non-zero tail padding");
    data.resize(len);
    return data;
}

}  // namespace revgan
