#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace revgan;

namespace {

Bits parse_bits(const std::string& s) {
    Bits b;
    for (char c : s) b.push_back(c == '1');
    return b;
}

const ReversibleGenerator& model() {
    static const ReversibleGenerator gen(testing_support::synthetic_model().generator);
    return gen;
}

}  // namespace

TEST(Layout, Validation) {
    EXPECT_NO_THROW((NoiseLayout{52, 11}.validate()));
    EXPECT_NO_THROW((NoiseLayout{52, 0}.validate()));
    EXPECT_NO_THROW((NoiseLayout{52, 50}.validate()));
    EXPECT_THROW((NoiseLayout{52, 51}.validate()), LayoutError);
    EXPECT_THROW((NoiseLayout{53, 1}.validate()), LayoutError);
    EXPECT_THROW((NoiseLayout{52, -1}.validate()), LayoutError);
    EXPECT_EQ((NoiseLayout{52, 11}.padding_bits()), 40);
}

TEST(BitsToNoise, Endpoints) {
    EXPECT_EQ(bits_to_noise(Bits(52, false), 52), -1.0);
    EXPECT_EQ(bits_to_noise(Bits(52, true), 52), 1.0);
    EXPECT_DOUBLE_EQ(bits_to_noise(parse_bits("10"), 2), 1.0 / 3.0);
    EXPECT_THROW(bits_to_noise(Bits(51, false), 52), LayoutError);
}

TEST(NoiseToBits, ExhaustiveAtTen) {
    for (std::uint64_t v = 0; v < 1024; ++v) {
        const Bits b = value_to_bits(v, 10);
        EXPECT_EQ(noise_to_bits(bits_to_noise(b, 10), 10), b);
    }
}

TEST(NoiseToBits, ExactInverseAtFullWidth) {
    Rng rng(3);
    for (int i = 0; i < 200'000; ++i) {
        const std::uint64_t v = rng.bits(52);
        ASSERT_EQ(noise_to_value(value_to_noise(v, 52), 52), v);
    }
    const std::uint64_t edges[] = {0, 1, 2, (1ULL << 51) - 1, 1ULL << 51, (1ULL << 52) - 2, (1ULL << 52) - 1};
    for (auto v : edges) EXPECT_EQ(noise_to_value(value_to_noise(v, 52), 52), v);
}

TEST(NoiseToBits, EndpointsClampAndRange) {
    EXPECT_EQ(noise_to_bits(-1.0, 52), Bits(52, false));
    EXPECT_EQ(noise_to_bits(1.0 + 0x1.0p-43, 40), Bits(40, true));
    EXPECT_EQ(noise_to_bits(-1.0 - 1e-17, 52), Bits(52, false));
    EXPECT_THROW(noise_to_bits(1.001, 52), RangeError);
    EXPECT_THROW(noise_to_bits(-1.5, 10), RangeError);
    EXPECT_THROW(noise_to_bits(std::nan(""), 10), RangeError);
}

TEST(NoiseToBits, MonotoneAndSignHalves) {
    double prev = -2.0;
    for (std::uint64_t v = 0; v < 4096; ++v) {
        const double x = value_to_noise(v, 12);
        EXPECT_GT(x, prev);
        prev = x;
        EXPECT_EQ(x > 0.0, (v >> 11) == 1);
    }
}

TEST(Slices, ComposeAndExtract) {
    const NoiseLayout l{52, 11};
    const std::uint64_t v = compose_value(1, 0x5A5, 0x123456789, l);
    EXPECT_EQ(covert_slice(v, l), 0x5A5u);
    EXPECT_EQ(v >> 51, 1u);
    EXPECT_EQ(v & ((1ULL << 40) - 1), 0x123456789u);
}

TEST(Encode, RoundTripsAndRecordsAttempts) {
    const NoiseLayout l{52, 11};
    Rng rng(1);
    for (int k = 0; k < 10; ++k) {
        Chunk c(64);
        for (auto& s : c) s = rng.bits(11);
        const auto r = encode(model(), c, l, rng);
        EXPECT_GE(r.attempts, 1u);
        EXPECT_EQ(r.amounts.size(), 64u);
        EXPECT_EQ(decode(model(), r.amounts, l), c);
        const auto j = to_json(r);
        EXPECT_EQ(j["attempts"].get<std::size_t>(), r.attempts);
    }
}

TEST(Encode, SmallMAcceptedImmediately) {
    Rng rng(2);
    const auto r = encode(model(), Chunk(64, 1), {52, 1}, rng);
    EXPECT_EQ(r.attempts, 1u);
}

TEST(Encode, PerElementModeAlsoRoundTrips) {
    const NoiseLayout l{52, 24};
    Rng rng(6);
    Chunk c(64);
    for (auto& s : c) s = rng.bits(24);
    const auto r = encode(model(), c, l, rng, {10'000, true});
    EXPECT_EQ(decode(model(), r.amounts, l), c);
}

TEST(Encode, Errors) {
    Rng rng(1);
    EXPECT_THROW(encode(model(), Chunk(64, 0), {52, 4}, rng, {0, false}), EncodingTimeout);
    EXPECT_THROW(encode(model(), Chunk(63, 0), {52, 4}, rng), LayoutError);
    EXPECT_THROW(encode(model(), Chunk(64, 16), {52, 4}, rng), LayoutError);
    // Far beyond what rounding allows.
    EXPECT_THROW(encode(model(), Chunk(64, 0), {52, 50}, rng, {50, false}), EncodingTimeout);
}

TEST(Decode, EmptyPayloadAndPerturbation) {
    EXPECT_EQ(decode(model(), std::vector<std::uint64_t>(64, 0), {52, 0}), Chunk(64, 0));
    const NoiseLayout l{52, 20};
    Rng rng(4);
    Chunk c(64);
    for (auto& s : c) s = rng.bits(20);
    auto r = encode(model(), c, l, rng);
    // Shifting one amount moves the recovered noise; the slice is not
    // protected against it. (+1 on a large amount can stay below the slice.)
    std::size_t differs = 0;
    for (std::size_t i = 0; i < 64; ++i) {
        auto a = r.amounts;
        a[i] += std::max<std::uint64_t>(1, a[i] / 1000);
        try {
            if (decode(model(), a, l) != c) ++differs;
        } catch (const Error&) {
            ++differs;
        }
    }
    EXPECT_GT(differs, 0u);
}

TEST(Payload, BytesAndBits) {
    const std::vector<std::uint8_t> bytes{0x80, 0x01, 0xFF};
    const Bits b = bytes_to_bits(bytes);
    EXPECT_EQ(b.size(), 24u);
    EXPECT_TRUE(b[0]);
    EXPECT_FALSE(b[1]);
    EXPECT_TRUE(b[15]);
    EXPECT_EQ(bits_to_bytes(b), bytes);
}

TEST(Payload, ChunkCounts) {
    const NoiseLayout l{52, 11};
    // Header occupies its own chunk; 64 * m bits fill exactly one data chunk.
    EXPECT_EQ(chunk_payload(Bits(64 * 11, true), l).size(), 2u);
    EXPECT_EQ(chunk_payload(Bits(64 * 11 + 1, true), l).size(), 3u);
    const auto empty = chunk_payload(Bits{}, l);
    EXPECT_EQ(empty.size(), 1u);
    EXPECT_TRUE(assemble_payload(empty, l).empty());
    EXPECT_THROW(chunk_payload(Bits(8), {52, 0}), LayoutError);
}

TEST(Payload, RandomRoundTrip) {
    Rng rng(10);
    for (int m : {1, 3, 11, 24, 32}) {
        const NoiseLayout l{52, m};
        for (std::size_t len : {0u, 1u, 63u, 64u, 1000u, 100'000u}) {
            Bits p(len);
            for (std::size_t i = 0; i < len; ++i) p[i] = rng.bits(1);
            EXPECT_EQ(assemble_payload(chunk_payload(p, l), l), p) << "m=" << m << " len=" << len;
        }
    }
}

TEST(Payload, NarrowVectorsSpreadTheHeader) {
    const NoiseLayout l{52, 1};
    const Bits p{true, false, true};
    const auto chunks = chunk_payload(p, l, 8);
    EXPECT_EQ(chunks.size(), 9u);  // 64 header bits over 8-bit chunks, then data
    EXPECT_EQ(assemble_payload(chunks, l, 8), p);
}

TEST(Payload, MismatchDetected) {
    const NoiseLayout l{52, 8};
    auto chunks = chunk_payload(Bits(1000, true), l);
    chunks.pop_back();
    EXPECT_THROW(assemble_payload(chunks, l), PayloadError);
    auto more = chunk_payload(Bits(10, true), l);
    more.push_back(Chunk(64, 0));
    EXPECT_THROW(assemble_payload(more, l), PayloadError);
    EXPECT_THROW(assemble_payload(std::vector<Chunk>{}, l), PayloadError);
}

TEST(Attempts, MedianGrowsWithM) {
    std::vector<double> medians;
    for (int m = 24; m <= 31; ++m) {
        std::vector<double> att;
        for (int v = 0; v < 30; ++v) {
            Rng rng(Rng::derive(77, static_cast<std::uint64_t>(m * 100 + v)));
            Chunk c(64);
            for (auto& s : c) s = rng.bits(m);
            att.push_back(static_cast<double>(encode(model(), c, {52, m}, rng).attempts));
        }
        medians.push_back(quantile(att, 0.5));
    }
    int inversions = 0;
    for (std::size_t i = 1; i < medians.size(); ++i)
        if (medians[i] < medians[i - 1]) ++inversions;
    EXPECT_LE(inversions, 1);
    EXPECT_GT(medians.back(), medians.front());
}
