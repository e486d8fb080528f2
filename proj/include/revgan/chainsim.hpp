#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "revgan/codec.hpp"
#include "revgan/generator.hpp"
#include "revgan/metrics.hpp"
#include "revgan/t2c.hpp"

// Mock chain. One covert value per transaction, stored in a designated slot
// (an output amount or the fee). The chain file is JSONL, one transaction per
// line, in (block_height, position) order:
//   {"tx_id": 64 hex chars, "block_height": int,
//    "outputs": [{"address": str, "amount": int}, ...], "fee": int}

namespace revgan {

using ojson = nlohmann::ordered_json;

/// Where the covert value lives: output `index`, or the fee when index is empty.
struct Slot {
    std::optional<std::size_t> output;

    static Slot fee() { return {}; }
    static Slot at(std::size_t i) { return {i}; }
    bool is_fee() const noexcept { return !output.has_value(); }
    bool operator==(const Slot&) const = default;
};

struct TxTemplate {
    std::string name = "bitcoin";
    std::size_t outputs = 2;
    Slot covert = Slot::at(0);
    std::uint64_t filler_amount = 50'000;
    std::uint64_t fee = 1'000;
    std::size_t txs_per_block = 8;

    void validate() const {
        if (outputs < 1) throw ChainError("template needs at least one output");
        if (!covert.is_fee() && *covert.output >= outputs) throw ChainError("covert slot beyond outputs");
        if (filler_amount < 1 || fee < 1) throw ChainError("filler values must be >= 1");
        if (txs_per_block < 1) throw ChainError("txs_per_block must be >= 1");
    }

    /// One input, two outputs (payment + change).
    static TxTemplate bitcoin() { return {}; }
    /// One input, one output.
    static TxTemplate ethereum() { return {"ethereum", 1, Slot::at(0), 21'000, 21'000, 8}; }
};

inline ojson to_json(const TxTemplate& t) {
    ojson slot = t.covert.is_fee() ? ojson("fee") : ojson(*t.covert.output);
    return {{"name", t.name},       {"outputs", t.outputs}, {"covert_slot", slot},
            {"filler_amount", t.filler_amount}, {"fee", t.fee}, {"txs_per_block", t.txs_per_block}};
}

inline TxTemplate template_from_json(const ojson& j) {
    try {
        TxTemplate t;
        t.name = j.at("name").get<std::string>();
        t.outputs = j.at("outputs").get<std::size_t>();
        const auto& s = j.at("covert_slot");
        if (s.is_string()) {
            if (s.get<std::string>() != "fee") throw ChainError("covert_slot must be an index or \"fee\"");
            t.covert = Slot::fee();
        } else {
            t.covert = Slot::at(s.get<std::size_t>());
        }
        t.filler_amount = j.value("filler_amount", t.filler_amount);
        t.fee = j.value("fee", t.fee);
        t.txs_per_block = j.value("txs_per_block", t.txs_per_block);
        t.validate();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad template: ") + e.what());
    }
}

inline TxTemplate template_by_name(const std::string& name) {
    if (name == "bitcoin") return TxTemplate::bitcoin();
    if (name == "ethereum") return TxTemplate::ethereum();
    throw ChainError("unknown template '" + name + "'");
}

struct TxOutput {
    std::string address;
    std::uint64_t amount = 0;
    bool operator==(const TxOutput&) const = default;
};

struct MockTransaction {
    std::string tx_id;
    std::uint64_t block_height = 0;
    std::vector<TxOutput> outputs;
    std::uint64_t fee = 0;
    bool operator==(const MockTransaction&) const = default;
};

inline ojson to_json(const MockTransaction& tx) {
    ojson outs = ojson::array();
    for (const auto& o : tx.outputs) outs.push_back({{"address", o.address}, {"amount", o.amount}});
    return {{"tx_id", tx.tx_id}, {"block_height", tx.block_height}, {"outputs", outs}, {"fee", tx.fee}};
}

inline MockTransaction transaction_from_json(const ojson& j) {
    MockTransaction tx;
    tx.tx_id = j.at("tx_id").get<std::string>();
    tx.block_height = j.at("block_height").get<std::uint64_t>();
    for (const auto& o : j.at("outputs"))
        tx.outputs.push_back({o.at("address").get<std::string>(), o.at("amount").get<std::uint64_t>()});
    tx.fee = j.at("fee").get<std::uint64_t>();
    return tx;
}

namespace detail {

inline std::string hash_hex(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6A09E667F3BCC908ULL;
    for (auto p : parts) h = Rng::mix(h ^ Rng::mix(p));
    std::string out;
    char buf[17];
    for (int lane = 0; lane < 4; ++lane) {
        h = Rng::mix(h + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(lane + 1));
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        out += buf;
    }
    return out;
}

}  // namespace detail

/// One transaction per covert value, `txs_per_block` per block from
/// `start_height`. Transaction ids are a seeded hash of position and contents.
inline std::vector<MockTransaction> build_transactions(std::span<const std::uint64_t> amounts,
                                                       const TxTemplate& t, std::uint64_t seed,
                                                       std::uint64_t start_height = 0) {
    t.validate();
    if (amounts.empty()) throw ChainError("no amounts to place");
    std::vector<MockTransaction> txs;
    txs.reserve(amounts.size());
    for (std::size_t i = 0; i < amounts.size(); ++i) {
        if (amounts[i] < 1) throw ChainError("amount " + std::to_string(i) + " is below 1");
        MockTransaction tx;
        tx.block_height = start_height + i / t.txs_per_block;
        for (std::size_t o = 0; o < t.outputs; ++o)
            tx.outputs.push_back({"addr-" + detail::hash_hex({seed, tx.block_height, i, o}).substr(0, 16),
                                  t.filler_amount});
        tx.fee = t.fee;
        if (t.covert.is_fee())
            tx.fee = amounts[i];
        else
            tx.outputs[*t.covert.output].amount = amounts[i];
        tx.tx_id = detail::hash_hex({seed, tx.block_height, i, amounts[i], tx.fee});
        txs.push_back(std::move(tx));
    }
    return txs;
}

/// Append-only chain persisted as JSONL.
class ChainFile {
public:
    explicit ChainFile(std::string path) : path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

    /// Missing file reads as an empty chain.
    std::vector<MockTransaction> load() const {
        std::vector<MockTransaction> out;
        std::ifstream in(path_);
        if (!in) return out;
        std::string line;
        std::size_t no = 0;
        while (std::getline(in, line)) {
            ++no;
            if (line.empty()) continue;
            try {
                out.push_back(transaction_from_json(ojson::parse(line)));
            } catch (const nlohmann::json::exception& e) {
                throw FormatError("chain line " + std::to_string(no) + ": " + e.what());
            }
        }
        return out;
    }

    std::uint64_t next_height() const {
        const auto txs = load();
        return txs.empty() ? 0 : txs.back().block_height + 1;
    }

    void append(const std::vector<MockTransaction>& txs) const {
        const auto existing = load();
        std::set<std::string> ids;
        std::uint64_t last = 0;
        for (const auto& tx : existing) {
            ids.insert(tx.tx_id);
            last = tx.block_height;
        }
        for (const auto& tx : txs) {
            if (tx.block_height < last) throw ChainError("block heights must be non-decreasing");
            if (!ids.insert(tx.tx_id).second) throw ChainError("duplicate tx_id " + tx.tx_id);
            last = tx.block_height;
        }
        std::ofstream out(path_, std::ios::app);
        if (!out) throw ChainError("cannot append to chain '" + path_ + "'");
        for (const auto& tx : txs) out << to_json(tx).dump() << '\n';
        if (!out) throw ChainError("write failed for chain '" + path_ + "'");
    }

private:
    std::string path_;
};

struct Selector {
    std::uint64_t height_lo = 0;
    std::uint64_t height_hi = UINT64_MAX;
    Slot slot = Slot::at(0);
};

inline std::vector<std::uint64_t> extract_fields(const std::vector<MockTransaction>& chain,
                                                 const Selector& s) {
    std::vector<std::uint64_t> out;
    for (const auto& tx : chain) {
        if (tx.block_height < s.height_lo || tx.block_height > s.height_hi) continue;
        if (s.slot.is_fee()) {
            out.push_back(tx.fee);
        } else {
            if (*s.slot.output >= tx.outputs.size()) continue;
            out.push_back(tx.outputs[*s.slot.output].amount);
        }
    }
    if (out.empty()) throw ChainError("selection matched no fields");
    return out;
}

struct ChannelConfig {
    TxTemplate tx_template = TxTemplate::bitcoin();
    NoiseLayout layout{52, 1};
    int lambda = 0;                        // T2C digits; 0 = off
    const SuffixTable* suffixes = nullptr; // required when lambda >= 1
    EncodeOptions encode;
    std::uint64_t seed = 0;
    std::string chain_path;
};

struct ChannelReport {
    bool recovered = false;
    std::size_t payload_bits = 0;
    std::size_t chunks = 0;
    std::size_t transactions = 0;
    int m = 0;
    int lambda = 0;
    double absolute_capacity = 0.0;  // covert bits per expansion field
    std::size_t attempts = 0;        // summed over chunks
    std::size_t max_attempts = 0;    // worst chunk
    double encode_seconds = 0.0;
    std::uint64_t first_height = 0, last_height = 0;
    std::string receiver_error;      // empty unless the receiver failed
    Bits received;
};

inline ojson to_json(const ChannelReport& r) {
    return {{"recovered", r.recovered},
            {"payload_bits", r.payload_bits},
            {"chunks", r.chunks},
            {"transactions", r.transactions},
            {"m", r.m},
            {"lambda", r.lambda},
            {"absolute_capacity", r.absolute_capacity},
            {"attempts", r.attempts},
            {"max_attempts_per_chunk", r.max_attempts},
            {"encode_seconds", r.encode_seconds},
            {"first_height", r.first_height},
            {"last_height", r.last_height},
            {"receiver_error", r.receiver_error}};
}

namespace detail {

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e);
    }
}

}  // namespace detail

/// payload -> chunk -> encode -> (T2C restore) -> build -> persist -> extract
/// -> (T2C truncate) -> decode -> assemble. Sender-side failures raise
/// StageError; receiver-side failures and mismatches come back as
/// recovered = false.
inline ChannelReport channel_roundtrip(const Bits& payload, const ReversibleGenerator& sender,
                                       const ReversibleGenerator& receiver, const ChannelConfig& c) {
    ChannelReport r;
    r.payload_bits = payload.size();
    r.m = c.layout.m;
    r.lambda = c.lambda;
    if (c.chain_path.empty()) throw StageError("setup", SetupError("no chain path"));
    if (c.lambda < 0) throw StageError("setup", SetupError("roundtrip needs lambda >= 0"));

    const auto chunks = detail::staged("chunk", [&] { return chunk_payload(payload, c.layout, sender.dims()); });
    r.chunks = chunks.size();

    Rng rng(c.seed);
    std::vector<std::uint64_t> onchain;
    detail::staged("encode", [&] {
        for (std::size_t k = 0; k < chunks.size(); ++k) {
            Rng chunk_rng(Rng::derive(c.seed, k));
            const auto res = encode(sender, chunks[k], c.layout, chunk_rng, c.encode);
            r.attempts += res.attempts;
            r.max_attempts = std::max(r.max_attempts, res.attempts);
            r.encode_seconds += res.elapsed_seconds;
            if (c.lambda >= 1) {
                const std::vector<double> a(res.amounts.begin(), res.amounts.end());
                const auto restored = recover_magnitude(a, c.suffixes, c.lambda, rng);
                onchain.insert(onchain.end(), restored.begin(), restored.end());
            } else {
                onchain.insert(onchain.end(), res.amounts.begin(), res.amounts.end());
            }
        }
        return 0;
    });

    const ChainFile chain(c.chain_path);
    const auto txs = detail::staged("build", [&] {
        return build_transactions(onchain, c.tx_template, c.seed, chain.next_height());
    });
    detail::staged("persist", [&] {
        chain.append(txs);
        return 0;
    });
    r.transactions = txs.size();
    r.first_height = txs.front().block_height;
    r.last_height = txs.back().block_height;
    r.absolute_capacity = absolute_capacity(
        static_cast<double>(chunks.size() * sender.dims() * static_cast<std::size_t>(c.layout.m)),
        static_cast<double>(onchain.size()));

    // Receiver: knows the model, the layout, lambda and where to look.
    try {
        const auto fields = extract_fields(chain.load(), {r.first_height, r.last_height, c.tx_template.covert});
        std::vector<std::uint64_t> scaled = fields;
        if (c.lambda >= 1) {
            const std::uint64_t scale = pow10_u64(c.lambda);
            for (auto& v : scaled) v /= scale;
        }
        if (scaled.size() % receiver.dims() != 0) throw PayloadError("field count not a whole number of vectors");
        std::vector<Chunk> got;
        for (std::size_t k = 0; k < scaled.size(); k += receiver.dims())
            got.push_back(decode(receiver, std::span(scaled).subspan(k, receiver.dims()), c.layout));
        r.received = assemble_payload(got, c.layout, receiver.dims());
        r.recovered = r.received == payload;
        if (!r.recovered) r.receiver_error = "payload mismatch";
    } catch (const Error& e) {
        r.recovered = false;
        r.receiver_error = e.what();
    }
    return r;
}

}  // namespace revgan
