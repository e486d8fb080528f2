#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "revgan/error.hpp"
#include "revgan/nn/matrix.hpp"
#include "revgan/rng.hpp"
#include "revgan/rounding.hpp"

namespace revgan {

enum class FieldKind { amount, fee };

inline std::string to_string(FieldKind k) { return k == FieldKind::amount ? "amount" : "fee"; }

inline FieldKind field_kind_from_string(const std::string& s) {
    if (s == "amount") return FieldKind::amount;
    if (s == "fee") return FieldKind::fee;
    throw DomainError("unknown field kind '" + s + "'");
}

/// Ordered transaction-field values (satoshi, wei or fee units).
struct FieldDataset {
    std::vector<std::uint64_t> values;
    std::string source_tag;
    FieldKind kind = FieldKind::amount;

    void validate() const {
        if (values.empty()) throw DomainError("dataset is empty");
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        if (*lo < 1) throw DomainError("dataset contains a value below 1");
        if (!(*hi > *lo)) throw DomainError("dataset needs max > min");
    }
};

inline std::vector<double> as_reals(const FieldDataset& ds) {
    return {ds.values.begin(), ds.values.end()};
}

struct RejectedRecord {
    std::size_t line;  // 1-based
    std::string reason;
};

struct LoadResult {
    FieldDataset dataset;
    std::vector<RejectedRecord> rejected;
};

/// Reads JSONL with one {"value": <positive integer>} object per line. Blank
/// lines are skipped; malformed or non-positive records are rejected with their
/// line number and the rest are kept.
inline LoadResult load_fields(const std::string& path, FieldKind kind) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open dataset '" + path + "'");
    LoadResult out;
    out.dataset.kind = kind;
    out.dataset.source_tag = path;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = nlohmann::ordered_json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("value")) {
            out.rejected.push_back({lineno, "malformed record"});
            continue;
        }
        const auto& v = j["value"];
        if (v.is_number_unsigned() && v.get<std::uint64_t>() >= 1) {
            out.dataset.values.push_back(v.get<std::uint64_t>());
        } else if (v.is_number_integer()) {
            out.rejected.push_back({lineno, "value must be >= 1"});
        } else {
            out.rejected.push_back({lineno, "value is not an integer"});
        }
    }
    if (out.dataset.values.empty())
        throw IngestionError("no valid records in '" + path + "' (" +
                             std::to_string(out.rejected.size()) + " rejected)");
    return out;
}

inline void save_fields(const std::string& path, const FieldDataset& ds) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write dataset '" + path + "'");
    for (auto v : ds.values) out << "{\"value\":" << v << "}\n";
}

inline int digit_count(std::uint64_t v) noexcept {
    int d = 1;
    while (v >= 10) {
        v /= 10;
        ++d;
    }
    return d;
}

/// Keeps values whose decimal length lies in [lo, hi], preserving order.
inline FieldDataset filter_by_digit_length(const FieldDataset& ds, int lo, int hi) {
    if (lo < 1 || hi < lo) throw FilterError("digit bounds need 1 <= lo <= hi");
    FieldDataset out{{}, ds.source_tag, ds.kind};
    std::copy_if(ds.values.begin(), ds.values.end(), std::back_inserter(out.values),
                 [&](std::uint64_t v) {
                     const int d = digit_count(v);
                     return d >= lo && d <= hi;
                 });
    if (out.values.empty())
        throw FilterError("no values with " + std::to_string(lo) + ".." + std::to_string(hi) +
                          " digits");
    return out;
}

/// How the training corpus is chosen: the common digit lengths only, or every
/// value including the extremes (wider max - min, smaller relative rounding error).
enum class Selection { common_lengths, keep_all };

inline FieldDataset select_training_set(const FieldDataset& ds, Selection sel, int lo = 5,
                                        int hi = 7) {
    if (sel == Selection::keep_all) return ds;
    return filter_by_digit_length(ds, lo, hi);
}

struct NormalizationParams {
    double min_x = 0.0;
    double max_x = 1.0;
    std::size_t group_width = 64;

    static NormalizationParams fit(std::span<const double> values, std::size_t width = 64) {
        if (values.empty()) throw DomainError("cannot fit normalization to no values");
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        if (!(*hi > *lo)) throw DomainError("normalization needs max > min");
        return {*lo, *hi, width};
    }

    double range() const noexcept { return max_x - min_x; }
    bool operator==(const NormalizationParams&) const = default;
};

inline double normalize_value(double x, const NormalizationParams& p) {
    if (!(x >= p.min_x && x <= p.max_x))
        throw RangeError("value " + std::to_string(x) + " outside [" + std::to_string(p.min_x) +
                         ", " + std::to_string(p.max_x) + "]");
    return (x - p.min_x) / (p.max_x - p.min_x);
}

inline nn::Vec normalize(std::span<const double> xs, const NormalizationParams& p) {
    nn::Vec out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(normalize_value(x, p));
    return out;
}

inline double denormalize(double y, const NormalizationParams& p) noexcept {
    return y * (p.max_x - p.min_x) + p.min_x;
}

struct Batches {
    std::vector<nn::Vec> groups;
    std::size_t discarded = 0;
};

/// Consecutive groups of `width` values; a trailing partial group is dropped.
inline Batches group_batches(std::span<const double> values, std::size_t width = 64) {
    if (values.size() < width)
        throw BatchingError("need at least " + std::to_string(width) + " values, got " +
                            std::to_string(values.size()));
    Batches b;
    const std::size_t n = values.size() / width;
    for (std::size_t g = 0; g < n; ++g)
        b.groups.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(g * width),
                              values.begin() + static_cast<std::ptrdiff_t>((g + 1) * width));
    b.discarded = values.size() - n * width;
    return b;
}

struct DatasetSummary {
    std::size_t count = 0;
    std::uint64_t min = 0;
    std::uint64_t max = 0;
    std::map<int, std::size_t> digit_histogram;
};

inline DatasetSummary summarize(const FieldDataset& ds) {
    DatasetSummary s;
    s.count = ds.values.size();
    if (s.count == 0) return s;
    const auto [lo, hi] = std::minmax_element(ds.values.begin(), ds.values.end());
    s.min = *lo;
    s.max = *hi;
    for (auto v : ds.values) ++s.digit_histogram[digit_count(v)];
    return s;
}

inline nlohmann::ordered_json to_json(const DatasetSummary& s) {
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [d, c] : s.digit_histogram) {
        hist[std::to_string(d)] = {{"count", c},
                                   {"fraction", static_cast<double>(c) / static_cast<double>(s.count)}};
    }
    return {{"count", s.count}, {"min", s.min}, {"max", s.max}, {"digit_histogram", hist}};
}

/// Seeded log-uniform integers over [10^lo_exp, 10^hi_exp]; stands in for chain data.
inline FieldDataset synthetic_log_uniform(std::size_t count, double lo_exp, double hi_exp,
                                          std::uint64_t seed, FieldKind kind = FieldKind::amount) {
    Rng rng(seed);
    FieldDataset ds;
    ds.kind = kind;
    ds.source_tag = "synthetic-log-uniform:" + std::to_string(lo_exp) + ":" +
                    std::to_string(hi_exp) + ":" + std::to_string(seed);
    ds.values.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double e = rng.uniform(lo_exp, hi_exp);
        ds.values.push_back(std::max<std::uint64_t>(1, to_amount(std::pow(10.0, e))));
    }
    return ds;
}

}  // namespace revgan
