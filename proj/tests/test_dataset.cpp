#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace revgan;

namespace {

std::string write_lines(const std::string& name, const std::string& body) {
    const auto path = testing_support::scratch_dir("dataset") / name;
    std::ofstream(path) << body;
    return path.string();
}

FieldDataset make(std::vector<std::uint64_t> v) {
    FieldDataset ds;
    ds.values = std::move(v);
    return ds;
}

}  // namespace

TEST(Load, PaperRange) {
    const auto p = write_lines("a.jsonl", "{\"value\":296}\n{\"value\":1000}\n{\"value\":2874993345277}\n");
    const auto r = load_fields(p, FieldKind::amount);
    EXPECT_EQ(r.dataset.values, (std::vector<std::uint64_t>{296, 1000, 2874993345277}));
    EXPECT_TRUE(r.rejected.empty());
}

TEST(Load, EmptyFileIsAnIngestionError) {
    const auto p = write_lines("empty.jsonl", "");
    EXPECT_THROW(load_fields(p, FieldKind::amount), IngestionError);
    EXPECT_THROW(load_fields("/nonexistent/x.jsonl", FieldKind::amount), IngestionError);
}

TEST(Load, BadLinesRejectedWithLineNumbers) {
    const auto p = write_lines("b.jsonl", "{\"value\":5}\nvalue: -5\n{\"value\":-5}\n{\"value\":0}\n\n{\"value\":7}\n");
    const auto r = load_fields(p, FieldKind::fee);
    EXPECT_EQ(r.dataset.values, (std::vector<std::uint64_t>{5, 7}));
    ASSERT_EQ(r.rejected.size(), 3u);
    EXPECT_EQ(r.rejected[0].line, 2u);
    EXPECT_EQ(r.rejected[1].line, 3u);
    EXPECT_EQ(r.rejected[2].line, 4u);
    EXPECT_EQ(r.dataset.kind, FieldKind::fee);
}

TEST(Load, SaveLoadRoundTrip) {
    const auto ds = synthetic_log_uniform(100, 2, 13, 5);
    const auto p = (testing_support::scratch_dir("dataset-rt") / "d.jsonl").string();
    save_fields(p, ds);
    EXPECT_EQ(load_fields(p, FieldKind::amount).dataset.values, ds.values);
}

TEST(Filter, DigitLength) {
    const auto out = filter_by_digit_length(make({296, 18105990, 123456}), 5, 7);
    EXPECT_EQ(out.values, (std::vector<std::uint64_t>{123456}));
    const auto all = make({296, 18105990, 123456});
    EXPECT_EQ(filter_by_digit_length(all, 1, 99).values, all.values);
    EXPECT_THROW(filter_by_digit_length(make({1, 2}), 5, 7), FilterError);
    EXPECT_THROW(filter_by_digit_length(all, 0, 3), FilterError);
    EXPECT_THROW(filter_by_digit_length(all, 4, 3), FilterError);
}

TEST(Filter, IdempotentAndKeepAllPassesThrough) {
    const auto ds = synthetic_log_uniform(2000, 2, 13, 8);
    const auto once = filter_by_digit_length(ds, 5, 7);
    EXPECT_EQ(filter_by_digit_length(once, 5, 7).values, once.values);
    EXPECT_EQ(select_training_set(ds, Selection::keep_all).values, ds.values);
    EXPECT_EQ(select_training_set(ds, Selection::common_lengths).values, once.values);
}

TEST(Normalize, Endpoints) {
    const NormalizationParams p{100.0, 1100.0, 64};
    EXPECT_EQ(normalize_value(100.0, p), 0.0);
    EXPECT_EQ(normalize_value(1100.0, p), 1.0);
    EXPECT_EQ(normalize_value(500000.0, {0.0, 1e6, 64}), 0.5);
    EXPECT_THROW(normalize_value(99.0, p), RangeError);
    EXPECT_THROW(normalize_value(1101.0, p), RangeError);
    EXPECT_EQ(denormalize(0.0, p), 100.0);
    EXPECT_EQ(denormalize(1.0, p), 1100.0);
}

TEST(Normalize, RoundTripOnDatasetValues) {
    const auto ds = synthetic_log_uniform(5000, 2, 13, 2);
    const auto xs = as_reals(ds);
    const auto p = NormalizationParams::fit(xs);
    for (double x : xs) EXPECT_LE(std::fabs(denormalize(normalize_value(x, p), p) - x), 1e-15 * p.max_x);
    for (double y = 0.0; y <= 1.0; y += 0.01)
        EXPECT_NEAR(normalize_value(denormalize(y, p), p), y, 1e-15 * std::max(y, 1e-3) + 1e-16);
}

TEST(Batches, Grouping) {
    const std::vector<double> v130(130, 1.0), v64(64, 1.0), v63(63, 1.0);
    const auto b = group_batches(v130);
    EXPECT_EQ(b.groups.size(), 2u);
    EXPECT_EQ(b.discarded, 2u);
    EXPECT_EQ(group_batches(v64).groups.size(), 1u);
    EXPECT_EQ(group_batches(v64).discarded, 0u);
    EXPECT_THROW(group_batches(v63), BatchingError);
}

TEST(Summary, DigitHistogram) {
    const auto s = summarize(make({5, 55, 555, 5555, 50}));
    EXPECT_EQ(s.count, 5u);
    EXPECT_EQ(s.min, 5u);
    EXPECT_EQ(s.max, 5555u);
    EXPECT_EQ(s.digit_histogram.at(2), 2u);
    const auto j = to_json(s);
    EXPECT_DOUBLE_EQ(j["digit_histogram"]["2"]["fraction"].get<double>(), 0.4);
}

TEST(Synthetic, DeterministicAndInRange) {
    const auto a = synthetic_log_uniform(1000, 2, 13, 7), b = synthetic_log_uniform(1000, 2, 13, 7);
    EXPECT_EQ(a.values, b.values);
    for (auto v : a.values) {
        EXPECT_GE(v, 100u);
        EXPECT_LE(v, 10'000'000'000'000u);
    }
}

TEST(T2C, DecreaseMagnitude) {
    const std::vector<std::uint64_t> x{123456};
    EXPECT_DOUBLE_EQ(decrease_magnitude(x, 2)[0], 1234.56);
    EXPECT_EQ(decrease_magnitude(x, 0)[0], 123456.0);
    EXPECT_EQ(decrease_magnitude(x, -1)[0], 1234560.0);
}

TEST(T2C, SuffixTable) {
    const std::vector<std::uint64_t> a{123456, 999956};
    const auto t = build_suffix_table(a, 2);
    EXPECT_EQ(t.counts.size(), 1u);
    EXPECT_EQ(t.counts.at("56"), 2u);
    const std::vector<std::uint64_t> b{105};
    EXPECT_EQ(build_suffix_table(b, 2).counts.at("05"), 1u);
    const auto ds = synthetic_log_uniform(3000, 2, 13, 3);
    const auto big = build_suffix_table(ds.values, 3);
    EXPECT_EQ(big.total(), ds.values.size());
    for (const auto& [k, _] : big.counts) EXPECT_EQ(k.size(), 3u);
    EXPECT_THROW(build_suffix_table(a, 0), DomainError);
    EXPECT_EQ(suffix_table_from_json(to_json(big)).counts, big.counts);
}

TEST(T2C, RecoverMagnitude) {
    SuffixTable t;
    t.lambda = 2;
    t.counts["56"] = 1;
    Rng rng(1);
    const std::vector<double> a{1234.4};
    EXPECT_EQ(recover_magnitude(a, &t, 2, rng)[0], 123456u);
    // Negative lambda: [a * 10^lambda], no table.
    EXPECT_EQ(recover_magnitude(a, nullptr, -1, rng)[0], 123u);
    SuffixTable empty;
    empty.lambda = 2;
    EXPECT_THROW(recover_magnitude(a, &empty, 2, rng), RecoveryError);
    EXPECT_THROW(recover_magnitude(a, nullptr, 2, rng), RecoveryError);
    SuffixTable other = t;
    other.lambda = 3;
    EXPECT_THROW(recover_magnitude(a, &other, 2, rng), RecoveryError);
}

TEST(T2C, TruncationRecoversRoundedOutputExactly) {
    const auto ds = synthetic_log_uniform(4000, 2, 13, 4);
    Rng rng(17);
    for (int lambda = 1; lambda <= 4; ++lambda) {
        const auto table = build_suffix_table(ds.values, lambda);
        std::vector<double> gen;
        for (int i = 0; i < 500; ++i) gen.push_back(rng.uniform(1.0, 1e9));
        const auto onchain = recover_magnitude(gen, &table, lambda, rng);
        const auto back = truncate_magnitude(onchain, lambda);
        for (std::size_t i = 0; i < gen.size(); ++i) EXPECT_EQ(back[i], std::round(gen[i]));
    }
}

TEST(T2C, SuffixSamplingMatchesFrequencies) {
    SuffixTable t;
    t.lambda = 1;
    const std::uint64_t counts[] = {50, 20, 10, 10, 5, 5};
    for (int d = 0; d < 6; ++d) t.counts[std::to_string(d)] = counts[d];
    Rng rng(99);
    const int draws = 100'000;
    std::map<std::string, int> seen;
    for (int i = 0; i < draws; ++i) ++seen[sample_suffix(t, rng)];
    double chi2 = 0.0;
    for (const auto& [k, c] : t.counts) {
        const double expect = draws * static_cast<double>(c) / static_cast<double>(t.total());
        chi2 += (seen[k] - expect) * (seen[k] - expect) / expect;
        // Each cell within 3 sigma of its binomial expectation.
        const double p = static_cast<double>(c) / static_cast<double>(t.total());
        EXPECT_LE(std::fabs(seen[k] - expect), 3.0 * std::sqrt(draws * p * (1 - p)));
    }
    // 5 degrees of freedom: the 0.999 quantile is 20.5.
    EXPECT_LT(chi2, 20.5);
}
