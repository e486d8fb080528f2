#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace revgan;

namespace {

const ReversibleGenerator& model() {
    static const ReversibleGenerator gen(testing_support::synthetic_model().generator);
    return gen;
}

Bits random_bits(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Bits b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = rng.bits(1);
    return b;
}

}  // namespace

TEST(Build, BitcoinAndEthereumShapes) {
    std::vector<std::uint64_t> amounts(64);
    for (std::size_t i = 0; i < 64; ++i) amounts[i] = 1000 + i;
    const auto btc = build_transactions(amounts, TxTemplate::bitcoin(), 1);
    ASSERT_EQ(btc.size(), 64u);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < 64; ++i) {
        EXPECT_EQ(btc[i].outputs.size(), 2u);
        EXPECT_EQ(btc[i].outputs[0].amount, amounts[i]);
        EXPECT_EQ(btc[i].tx_id.size(), 64u);
        ids.insert(btc[i].tx_id);
    }
    EXPECT_EQ(ids.size(), 64u);
    const auto eth = build_transactions(amounts, TxTemplate::ethereum(), 1);
    for (const auto& tx : eth) EXPECT_EQ(tx.outputs.size(), 1u);
    EXPECT_EQ(build_transactions(amounts, TxTemplate::bitcoin(), 1), btc);
}

TEST(Build, Errors) {
    EXPECT_THROW(build_transactions(std::vector<std::uint64_t>{}, TxTemplate::bitcoin(), 1), ChainError);
    EXPECT_THROW(build_transactions(std::vector<std::uint64_t>{5, 0}, TxTemplate::bitcoin(), 1), ChainError);
    auto t = TxTemplate::ethereum();
    t.covert = Slot::at(1);
    EXPECT_THROW(build_transactions(std::vector<std::uint64_t>{5}, t, 1), ChainError);
}

TEST(Extract, InvertsBuildAndFiltersHeights) {
    std::vector<std::uint64_t> amounts{11, 22, 33, 44, 55, 66, 77, 88, 99, 111};
    const auto txs = build_transactions(amounts, TxTemplate::bitcoin(), 3, 100);
    EXPECT_EQ(extract_fields(txs, {0, UINT64_MAX, Slot::at(0)}), amounts);
    // Eight transactions per block: heights 100 and 101.
    EXPECT_EQ(extract_fields(txs, {101, 101, Slot::at(0)}), (std::vector<std::uint64_t>{99, 111}));
    EXPECT_THROW(extract_fields(txs, {200, 300, Slot::at(0)}), ChainError);
    const auto fees = extract_fields(txs, {0, UINT64_MAX, Slot::fee()});
    EXPECT_EQ(fees, std::vector<std::uint64_t>(10, TxTemplate::bitcoin().fee));
}

TEST(Extract, FeeSlotTemplate) {
    auto t = TxTemplate::bitcoin();
    t.covert = Slot::fee();
    const std::vector<std::uint64_t> amounts{7, 8, 9};
    const auto txs = build_transactions(amounts, t, 3);
    EXPECT_EQ(extract_fields(txs, {0, UINT64_MAX, Slot::fee()}), amounts);
    EXPECT_EQ(template_from_json(to_json(t)).covert, Slot::fee());
}

TEST(ChainFile, AppendOnlyAndReload) {
    const auto path = (testing_support::scratch_dir("chain") / "c.jsonl").string();
    const ChainFile chain(path);
    EXPECT_TRUE(chain.load().empty());
    const auto a = build_transactions(std::vector<std::uint64_t>{1, 2, 3}, TxTemplate::bitcoin(), 1, chain.next_height());
    chain.append(a);
    const auto b = build_transactions(std::vector<std::uint64_t>{4, 5}, TxTemplate::bitcoin(), 1, chain.next_height());
    chain.append(b);
    const auto loaded = chain.load();
    ASSERT_EQ(loaded.size(), 5u);
    EXPECT_EQ(loaded[0], a[0]);
    EXPECT_EQ(loaded[4], b[1]);
    const Selector all{0, UINT64_MAX, Slot::at(0)};
    EXPECT_EQ(extract_fields(chain.load(), all), extract_fields(ChainFile(path).load(), all));
    EXPECT_THROW(chain.append(a), ChainError);  // duplicate ids
    auto old = build_transactions(std::vector<std::uint64_t>{9}, TxTemplate::bitcoin(), 2, 0);
    EXPECT_THROW(chain.append(old), ChainError);  // height goes backwards
}

TEST(Roundtrip, KibPayloadAtEleven) {
    ChannelConfig c;
    c.layout = {52, 11};
    c.seed = 5;
    c.chain_path = (testing_support::scratch_dir("rt11") / "chain.jsonl").string();
    const Bits p = random_bits(8192, 1);
    const auto r = channel_roundtrip(p, model(), model(), c);
    EXPECT_TRUE(r.recovered) << r.receiver_error;
    EXPECT_EQ(r.received, p);
    EXPECT_EQ(r.absolute_capacity, 11.0);
    EXPECT_EQ(r.transactions, r.chunks * 64);
    EXPECT_GE(r.attempts, r.chunks);
}

TEST(Roundtrip, EmptyPayloadAndEthereumFee) {
    ChannelConfig c;
    c.layout = {52, 16};
    c.tx_template = TxTemplate::ethereum();
    c.chain_path = (testing_support::scratch_dir("rt0") / "chain.jsonl").string();
    const auto r = channel_roundtrip(Bits{}, model(), model(), c);
    EXPECT_TRUE(r.recovered);
    EXPECT_EQ(r.chunks, 1u);
    c.tx_template.covert = Slot::fee();
    const auto f = channel_roundtrip(random_bits(100, 2), model(), model(), c);
    EXPECT_TRUE(f.recovered) << f.receiver_error;
}

TEST(Roundtrip, T2CLambdaTwo) {
    const auto ds = testing_support::synthetic_dataset();
    auto cfg = TrainConfig::for_mode(GanMode::ccrgan);
    cfg.max_epochs = 5;
    cfg.seed = 8;
    const auto tr = train_on_values(cfg, decrease_magnitude(ds.values, 2));
    const ReversibleGenerator gen(tr.generator);
    const auto table = build_suffix_table(ds.values, 2);
    ChannelConfig c;
    c.layout = {52, 12};
    c.lambda = 2;
    c.suffixes = &table;
    c.chain_path = (testing_support::scratch_dir("rt-t2c") / "chain.jsonl").string();
    const auto r = channel_roundtrip(random_bits(2000, 3), gen, gen, c);
    EXPECT_TRUE(r.recovered) << r.receiver_error;
    // On-chain values carry real-looking suffixes.
    const auto fields = extract_fields(ChainFile(c.chain_path).load(), {0, UINT64_MAX, Slot::at(0)});
    for (auto v : fields) EXPECT_GE(v, 100u);
}

TEST(Roundtrip, DifferentReceiverModelIsDetected) {
    const auto other = testing_support::synthetic_model(20, 99);
    const ReversibleGenerator wrong(other.generator);
    ChannelConfig c;
    c.layout = {52, 11};
    c.chain_path = (testing_support::scratch_dir("rt-neg") / "chain.jsonl").string();
    const auto r = channel_roundtrip(random_bits(1000, 4), model(), wrong, c);
    EXPECT_FALSE(r.recovered);
    EXPECT_FALSE(r.receiver_error.empty());
}

TEST(Roundtrip, SenderErrorsCarryStage) {
    ChannelConfig c;
    c.layout = {52, 50};
    c.encode.max_attempts = 3;
    c.chain_path = (testing_support::scratch_dir("rt-stage") / "chain.jsonl").string();
    try {
        channel_roundtrip(random_bits(10, 5), model(), model(), c);
        FAIL() << "expected a stage error";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "encode");
        EXPECT_EQ(e.kind(), "encoding_timeout");
    }
}

TEST(Template, JsonRoundTrip) {
    const auto t = TxTemplate::bitcoin();
    const auto back = template_from_json(to_json(t));
    EXPECT_EQ(back.outputs, 2u);
    EXPECT_EQ(back.covert, Slot::at(0));
    EXPECT_THROW(template_by_name("dogecoin"), ChainError);
    EXPECT_THROW(template_from_json(nlohmann::ordered_json{{"name", "x"}}), FormatError);
}
