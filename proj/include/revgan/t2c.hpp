#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "revgan/dataset.hpp"

// Magnitude trading: train on values scaled by 10^-lambda, then put the
// lambda low digits back by sampling real suffixes. The receiver drops those
// digits again, so decoding sees exactly the rounded generator output.

namespace revgan {

/// x_i / 10^lambda as binary64, not re-rounded. Negative lambda scales up.
inline std::vector<double> decrease_magnitude(std::span<const std::uint64_t> values, int lambda) {
    std::vector<double> out;
    out.reserve(values.size());
    const double scale = pow10(lambda < 0 ? -lambda : lambda);
    for (auto v : values) {
        const double x = static_cast<double>(v);
        out.push_back(lambda >= 0 ? x / scale : x * scale);
    }
    return out;
}

/// Frequencies of the zero-padded last-lambda-digit suffixes of a dataset.
struct SuffixTable {
    int lambda = 1;
    std::map<std::string, std::uint64_t> counts;

    std::uint64_t total() const noexcept {
        std::uint64_t t = 0;
        for (const auto& [_, c] : counts) t += c;
        return t;
    }
};

inline std::string suffix_of(std::uint64_t v, int lambda) {
    std::string s(static_cast<std::size_t>(lambda), '0');
    for (int i = lambda - 1; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = static_cast<char>('0' + v % 10);
        v /= 10;
    }
    return s;
}

inline SuffixTable build_suffix_table(std::span<const std::uint64_t> values, int lambda) {
    if (lambda < 1) throw DomainError("suffix table needs lambda >= 1");
    SuffixTable t;
    t.lambda = lambda;
    for (auto v : values) ++t.counts[suffix_of(v, lambda)];
    return t;
}

/// Draws a suffix with probability proportional to its count.
inline std::string sample_suffix(const SuffixTable& t, Rng& rng) {
    const std::uint64_t total = t.total();
    if (total == 0) throw RecoveryError("suffix table is empty");
    std::uint64_t r = rng.below(total);
    for (const auto& [s, c] : t.counts) {
        if (r < c) return s;
        r -= c;
    }
    return t.counts.rbegin()->first;
}

/// Restores on-chain magnitude. lambda >= 1: round(a) * 10^lambda + sampled
/// suffix. lambda <= 0: round(a * 10^lambda), no table needed.
inline std::vector<std::uint64_t> recover_magnitude(std::span<const double> generated,
                                                    const SuffixTable* table, int lambda, Rng& rng) {
    std::vector<std::uint64_t> out;
    out.reserve(generated.size());
    if (lambda <= 0) {
        const double scale = pow10(-lambda);
        for (double a : generated) out.push_back(to_amount(a / scale));
        return out;
    }
    if (table == nullptr || table->total() == 0) throw RecoveryError("empty suffix table");
    if (table->lambda != lambda) throw RecoveryError("suffix table built for a different lambda");
    const std::uint64_t scale = pow10_u64(lambda);
    for (double a : generated) {
        const std::uint64_t head = to_amount(a);
        const std::uint64_t tail = std::stoull(sample_suffix(*table, rng));
        out.push_back(head * scale + tail);
    }
    return out;
}

/// Receiver side: maps on-chain values back to the generator's rounded scale.
/// lambda >= 1 truncates the last lambda digits.
inline std::vector<double> truncate_magnitude(std::span<const std::uint64_t> onchain, int lambda) {
    std::vector<double> out;
    out.reserve(onchain.size());
    if (lambda >= 1) {
        const std::uint64_t scale = pow10_u64(lambda);
        for (auto v : onchain) out.push_back(static_cast<double>(v / scale));
    } else {
        const double scale = pow10(-lambda);
        for (auto v : onchain) out.push_back(static_cast<double>(v) * scale);
    }
    return out;
}

inline nlohmann::ordered_json to_json(const SuffixTable& t) {
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (const auto& [s, c] : t.counts) counts[s] = c;
    return {{"lambda", t.lambda}, {"total", t.total()}, {"counts", counts}};
}

inline SuffixTable suffix_table_from_json(const nlohmann::ordered_json& j) {
    SuffixTable t;
    t.lambda = j.at("lambda").get<int>();
    for (const auto& [k, v] : j.at("counts").items()) {
        if (static_cast<int>(k.size()) != t.lambda)
            throw FormatError("suffix '" + k + "' does not have lambda digits");
        t.counts[k] = v.get<std::uint64_t>();
    }
    return t;
}

}  // namespace revgan
