#pragma once

#include <cstdint>
#include <limits>

namespace revgan {

/// Counter-based generator. Draw k of stream `seed` is
/// splitmix64_finalize(seed + (k + 1) * 0x9E3779B97F4A7C15), so the stream is a
/// pure function of (seed, counter) and identical on every platform.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Independent stream for sub-task `index` (trial, vector, run).
    static constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t index) noexcept {
        return mix(seed ^ mix(index + 0x632BE59BD9B4E019ULL));
    }

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix(seed_ + counter_ * kGolden);
    }

    result_type operator()() noexcept { return next_u64(); }
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi].
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, bound) by rejection; bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = max() - max() % bound;
        std::uint64_t r = next_u64();
        while (r >= limit) r = next_u64();
        return r % bound;
    }

    /// `count` low random bits (count <= 64).
    std::uint64_t bits(int count) noexcept {
        if (count <= 0) return 0;
        const std::uint64_t r = next_u64();
        return count >= 64 ? r : (r >> (64 - count));
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace revgan
