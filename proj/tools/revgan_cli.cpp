// revgan: command-line front end for training, embedding and evaluation.
//
// Exit codes: 0 success, 1 usage error, 2 domain error (message tagged with
// the failing stage or error kind). JSON reports go to --out (stdout when
// absent); a one-line human summary goes to stdout.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "revgan/revgan.hpp"

using namespace revgan;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    std::string model;
    std::string dataset;
    std::string kind = "amount";
    std::string mode = "ccrgan";
    std::optional<int> m;
    int lambda = 0;
    std::string out;
    int n = 52;
    std::size_t epochs = 500;
    std::size_t synthetic_count = 8192;
    std::string tx_template = "bitcoin";
    std::string chain;
};

std::uint64_t resolve_seed(const Common& c) {
    if (c.seed) return *c.seed;
    if (const char* env = std::getenv("RGAN_SEED")) {
        try {
            std::size_t pos = 0;
            const auto v = std::stoull(env, &pos);
            if (pos == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw CLI::ValidationError("RGAN_SEED", "not an unsigned integer");
    }
    return 0;
}

FieldDataset load_dataset(const Common& c, std::uint64_t seed, std::vector<RejectedRecord>* rejected = nullptr) {
    const FieldKind kind = field_kind_from_string(c.kind);
    if (c.dataset.empty()) return synthetic_log_uniform(c.synthetic_count, 2.0, 13.0, seed, kind);
    auto res = load_fields(c.dataset, kind);
    if (rejected) *rejected = std::move(res.rejected);
    return std::move(res.dataset);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << data;
}

void emit(const Common& c, const ojson& report, const std::string& summary) {
    if (c.out.empty()) {
        std::cout << report.dump(2) << '\n';
    } else {
        write_file(c.out, report.dump(2) + "\n");
        std::cout << summary << '\n';
    }
}

ReversibleGenerator require_model(const Common& c) {
    if (c.model.empty()) throw CLI::RequiredError("--model");
    return ReversibleGenerator(load_model(c.model));
}

TrainConfig train_config(const Common& c, std::uint64_t seed) {
    auto cfg = TrainConfig::for_mode(gan_mode_from_string(c.mode));
    cfg.seed = seed;
    cfg.max_epochs = c.epochs;
    return cfg;
}

/// Training values after mode selection and magnitude trading.
std::vector<double> training_values(const Common& c, const FieldDataset& ds) {
    const auto sel = c.mode == "rgan" ? Selection::common_lengths : Selection::keep_all;
    const auto picked = select_training_set(ds, sel);
    return decrease_magnitude(picked.values, c.lambda);
}

int cmd_ingest(const Common& c, const std::string& data_out, bool select_common) {
    const auto seed = resolve_seed(c);
    std::vector<RejectedRecord> rejected;
    auto ds = load_dataset(c, seed, &rejected);
    if (select_common) ds = select_training_set(ds, Selection::common_lengths);
    if (!data_out.empty()) save_fields(data_out, ds);
    ojson rej = ojson::array();
    for (const auto& r : rejected) rej.push_back({{"line", r.line}, {"reason", r.reason}});
    ojson report = {{"source", ds.source_tag.empty() ? c.dataset : ds.source_tag},
                    {"kind", to_string(ds.kind)},
                    {"summary", to_json(summarize(ds))},
                    {"rejected", rej}};
    emit(c, report, "ingested " + std::to_string(ds.values.size()) + " values, rejected " +
                        std::to_string(rejected.size()));
    return 0;
}

int cmd_train(const Common& c) {
    if (c.model.empty()) throw CLI::RequiredError("--model");
    const auto seed = resolve_seed(c);
    const auto ds = load_dataset(c, seed);
    const auto values = training_values(c, ds);
    const auto result = train_on_values(train_config(c, seed), values);
    save_model(result.generator, c.model);
    ojson report = {{"mode", c.mode}, {"seed", seed}, {"lambda", c.lambda},
                    {"training_values", values.size()}, {"model", c.model},
                    {"report", to_json(result.report)}};
    emit(c, report, "trained " + c.mode + " for " + std::to_string(result.report.epochs_run) +
                        " epochs (" + result.report.stop_reason + "), saved " + c.model);
    return 0;
}

int cmd_estimate(const Common& c, std::size_t trials, std::size_t probes, double quantile,
                 std::size_t budget) {
    const auto gen = require_model(c);
    EstimateConfig cfg;
    cfg.trials = trials;
    cfg.probes = probes;
    cfg.acceptance_quantile = quantile;
    cfg.attempt_budget = budget;
    cfg.n = c.n;
    cfg.seed = resolve_seed(c);
    const auto est = estimate_m(gen, cfg);
    emit(c, to_json(est), "estimated m = " + std::to_string(est.m));
    return 0;
}

NoiseLayout layout_for(const Common& c) {
    if (!c.m) throw CLI::RequiredError("--m");
    NoiseLayout l{c.n, *c.m};
    l.validate();
    return l;
}

int cmd_encode(const Common& c, const std::string& payload_path, const std::string& suffix_path,
               std::size_t max_attempts) {
    const auto gen = require_model(c);
    const auto layout = layout_for(c);
    if (c.chain.empty()) throw CLI::RequiredError("--chain");
    const std::string raw = read_file(payload_path);
    const Bits payload = bytes_to_bits({reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()});
    const auto seed = resolve_seed(c);

    const auto chunks = chunk_payload(payload, layout, gen.dims());
    std::optional<SuffixTable> table;
    if (c.lambda >= 1) {
        if (suffix_path.empty()) throw CLI::RequiredError("--suffixes");
        table = suffix_table_from_json(ojson::parse(read_file(suffix_path)));
    }
    Rng rng(seed);
    std::vector<std::uint64_t> onchain;
    ojson per_chunk = ojson::array();
    for (std::size_t k = 0; k < chunks.size(); ++k) {
        Rng chunk_rng(Rng::derive(seed, k));
        EncodeResult res;
        try {
            res = encode(gen, chunks[k], layout, chunk_rng, {max_attempts, false});
        } catch (const Error& e) {
            throw StageError("encode", e);
        }
        per_chunk.push_back({{"attempts", res.attempts}, {"elapsed_seconds", res.elapsed_seconds}});
        if (c.lambda >= 1) {
            const std::vector<double> a(res.amounts.begin(), res.amounts.end());
            const auto restored = recover_magnitude(a, &*table, c.lambda, rng);
            onchain.insert(onchain.end(), restored.begin(), restored.end());
        } else {
            onchain.insert(onchain.end(), res.amounts.begin(), res.amounts.end());
        }
    }
    const ChainFile chain(c.chain);
    const auto tmpl = template_by_name(c.tx_template);
    const auto txs = build_transactions(onchain, tmpl, seed, chain.next_height());
    chain.append(txs);
    ojson report = {{"m", layout.m},
                    {"lambda", c.lambda},
                    {"payload_bits", payload.size()},
                    {"chunks", chunks.size()},
                    {"transactions", txs.size()},
                    {"from_height", txs.front().block_height},
                    {"to_height", txs.back().block_height},
                    {"chunk_results", per_chunk}};
    emit(c, report, "encoded " + std::to_string(payload.size()) + " bits into " +
                        std::to_string(txs.size()) + " transactions at heights " +
                        std::to_string(txs.front().block_height) + ".." +
                        std::to_string(txs.back().block_height));
    return 0;
}

int cmd_decode(const Common& c, std::uint64_t from, std::uint64_t to, const std::string& payload_out) {
    const auto gen = require_model(c);
    const auto layout = layout_for(c);
    if (c.chain.empty()) throw CLI::RequiredError("--chain");
    if (payload_out.empty()) throw CLI::RequiredError("--payload-out");
    const auto tmpl = template_by_name(c.tx_template);
    auto fields = extract_fields(ChainFile(c.chain).load(), {from, to, tmpl.covert});
    if (c.lambda >= 1) {
        const auto scale = pow10_u64(c.lambda);
        for (auto& v : fields) v /= scale;
    }
    if (fields.size() % gen.dims() != 0)
        throw StageError("decode", PayloadError("field count is not a multiple of the vector width"));
    std::vector<Chunk> chunks;
    try {
        for (std::size_t k = 0; k < fields.size(); k += gen.dims())
            chunks.push_back(decode(gen, std::span(fields).subspan(k, gen.dims()), layout));
    } catch (const Error& e) {
        throw StageError("decode", e);
    }
    Bits bits;
    try {
        bits = assemble_payload(chunks, layout, gen.dims());
    } catch (const Error& e) {
        throw StageError("assemble", e);
    }
    if (bits.size() % 8 != 0) throw StageError("assemble", PayloadError("payload is not whole bytes"));
    const auto bytes = bits_to_bytes(bits);
    write_file(payload_out, std::string(bytes.begin(), bytes.end()));
    ojson report = {{"m", layout.m}, {"fields", fields.size()}, {"payload_bits", bits.size()},
                    {"payload_out", payload_out}};
    emit(c, report, "decoded " + std::to_string(bits.size()) + " bits to " + payload_out);
    return 0;
}

int cmd_capacity(const Common& c, const std::vector<std::uint64_t>& ms) {
    std::vector<std::uint64_t> values = ms;
    if (c.m) values.push_back(static_cast<std::uint64_t>(*c.m));
    if (values.empty()) throw CLI::RequiredError("--m");
    ojson rows = ojson::array();
    for (auto m : values) {
        ojson row = {{"m", m}, {"absolute_capacity", absolute_capacity(static_cast<double>(m * 64), 64.0)}};
        ojson cer_row = ojson::object();
        for (const auto& b : kBaselines) cer_row[std::string(b.name)] = cer_exact(m, b.bits_per_tx) + "%";
        row["cer"] = cer_row;
        rows.push_back(row);
    }
    ojson base = ojson::object();
    for (const auto& b : kBaselines) base[std::string(b.name)] = b.bits_per_tx;
    ojson report = {{"baselines_bits_per_tx", base}, {"rows", rows}};
    emit(c, report, "capacity table for " + std::to_string(values.size()) + " value(s) of m");
    return 0;
}

/// Values the model would put on chain for random noise (flat outputs redrawn).
std::vector<std::uint64_t> sample_generated(const ReversibleGenerator& gen, std::size_t count,
                                            std::uint64_t seed) {
    std::vector<std::uint64_t> out;
    Rng rng(seed);
    std::size_t misses = 0;
    while (out.size() < count) {
        try {
            for (double a : gen.generate(random_noise(gen.dims(), 52, rng)))
                if (out.size() < count) out.push_back(std::max<std::uint64_t>(1, to_amount(a)));
        } catch (const FlatSegmentOutput&) {
            if (++misses > 10'000) throw;
        }
    }
    return out;
}

int cmd_concealment(const Common& c, std::size_t runs, std::size_t epochs) {
    const auto gen = require_model(c);
    const auto seed = resolve_seed(c);
    const auto ds = load_dataset(c, seed);
    auto real = ds.values;
    if (c.lambda >= 1) {
        const auto scale = pow10_u64(c.lambda);
        for (auto& v : real) v = std::max<std::uint64_t>(1, v / scale);
    }
    const auto fake = sample_generated(gen, real.size(), Rng::derive(seed, 1));
    ConcealmentConfig cfg;
    cfg.runs = runs;
    cfg.epochs = epochs;
    cfg.seed = seed;
    const auto rep = concealment_eval(real, fake, cfg);
    emit(c, to_json(rep), "concealment accuracy " + std::to_string(rep.accuracy) + ", f1 " +
                              std::to_string(rep.f1));
    return 0;
}

int cmd_timing(const Common& c, const std::vector<int>& ms, std::size_t vectors, std::size_t max_attempts) {
    const auto gen = require_model(c);
    std::vector<int> sweep = ms;
    if (c.m) sweep.push_back(*c.m);
    if (sweep.empty()) throw CLI::RequiredError("--m");
    const auto seed = resolve_seed(c);
    ojson rows = ojson::array();
    std::string summary;
    for (int m : sweep) {
        const auto r = timing_experiment(gen, m, vectors, Rng::derive(seed, static_cast<std::uint64_t>(m)),
                                         max_attempts, c.n);
        rows.push_back(to_json(r));
        summary += "m=" + std::to_string(m) + " median " + std::to_string(r.per_vector.median * 1e3) + " ms; ";
    }
    emit(c, {{"vectors", vectors}, {"rows", rows}}, summary);
    return 0;
}

int cmd_t2c(const Common& c, const std::string& data_out) {
    if (c.lambda < 1) throw DomainError("t2c needs --lambda >= 1");
    const auto seed = resolve_seed(c);
    const auto ds = load_dataset(c, seed);
    const auto table = build_suffix_table(ds.values, c.lambda);
    if (!data_out.empty()) {
        std::ostringstream os;
        for (double v : decrease_magnitude(ds.values, c.lambda)) os << ojson({{"value", v}}).dump() << '\n';
        write_file(data_out, os.str());
    }
    emit(c, to_json(table), "suffix table over " + std::to_string(table.total()) + " values, " +
                                std::to_string(table.counts.size()) + " distinct suffixes");
    return 0;
}

int cmd_roundtrip(const Common& c, std::size_t payload_bytes, std::size_t max_attempts) {
    const auto seed = resolve_seed(c);
    const auto ds = load_dataset(c, seed);
    std::optional<ReversibleGenerator> gen;
    ojson train_report;
    if (!c.model.empty()) {
        gen.emplace(load_model(c.model));
    } else {
        auto cfg = train_config(c, seed);
        const auto result = train_on_values(cfg, training_values(c, ds));
        train_report = to_json(result.report);
        gen.emplace(result.generator);
    }
    int m = 0;
    ojson estimate;
    if (c.m) {
        m = *c.m;
    } else {
        EstimateConfig ec;
        ec.seed = seed;
        ec.n = c.n;
        const auto est = estimate_m(*gen, ec);
        m = est.m;
        estimate = to_json(est);
    }
    std::optional<SuffixTable> table;
    if (c.lambda >= 1) table = build_suffix_table(ds.values, c.lambda);

    Rng prng(Rng::derive(seed, 0xDA7A));
    std::vector<std::uint8_t> bytes(payload_bytes);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(prng.bits(8));

    ChannelConfig cc;
    cc.tx_template = template_by_name(c.tx_template);
    cc.layout = {c.n, m};
    cc.lambda = c.lambda;
    cc.suffixes = table ? &*table : nullptr;
    cc.encode.max_attempts = max_attempts;
    cc.seed = seed;
    cc.chain_path = c.chain.empty() ? (c.out.empty() ? std::string("roundtrip.chain.jsonl") : c.out + ".chain.jsonl")
                                    : c.chain;
    const auto rep = channel_roundtrip(bytes_to_bits(bytes), *gen, *gen, cc);
    ojson report = to_json(rep);
    report["chain"] = cc.chain_path;
    if (!estimate.is_null()) report["estimate"] = estimate;
    if (!train_report.is_null()) report["training"] = train_report;
    emit(c, report, std::string("roundtrip ") + (rep.recovered ? "recovered" : "FAILED") + ": " +
                        std::to_string(rep.payload_bits) + " bits, m=" + std::to_string(m) + ", " +
                        std::to_string(rep.transactions) + " transactions");
    return rep.recovered ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reversible-GAN covert channel toolkit"};
    app.require_subcommand(1);
    Common c;

    auto add_common = [&](CLI::App* s) {
        s->add_option("--seed", c.seed, "Master seed (falls back to RGAN_SEED, then 0)");
        s->add_option("--out", c.out, "JSON report path (stdout when absent)");
    };
    auto add_model = [&](CLI::App* s) { s->add_option("--model", c.model, "Generator model file"); };
    auto add_data = [&](CLI::App* s) {
        s->add_option("--dataset", c.dataset, "JSONL field values (synthetic log-uniform when absent)");
        s->add_option("--kind", c.kind, "Field kind")->check(CLI::IsMember({"amount", "fee"}));
        s->add_option("--synthetic-count", c.synthetic_count, "Size of the synthetic dataset");
    };
    auto add_mode = [&](CLI::App* s) {
        s->add_option("--mode", c.mode, "GAN variant")->check(CLI::IsMember({"rgan", "ccrgan"}));
        s->add_option("--epochs", c.epochs, "Maximum training epochs");
    };
    auto add_layout = [&](CLI::App* s) {
        s->add_option("--m", c.m, "Covert bits per element")->check(CLI::Range(0, 50));
        s->add_option("--n", c.n, "Bits per noise element")->check(CLI::Range(2, 52));
    };
    auto add_lambda = [&](CLI::App* s) { s->add_option("--lambda", c.lambda, "T2C magnitude shift"); };
    auto add_chain = [&](CLI::App* s) {
        s->add_option("--chain", c.chain, "Chain file (JSONL)");
        s->add_option("--template", c.tx_template, "Transaction template")
            ->check(CLI::IsMember({"bitcoin", "ethereum"}));
    };

    auto* ingest = app.add_subcommand("ingest", "Load and summarize a field dataset");
    std::string data_out;
    bool select_common = false;
    add_common(ingest);
    add_data(ingest);
    ingest->add_option("--data-out", data_out, "Write the cleaned dataset here");
    ingest->add_flag("--common-lengths", select_common, "Keep only 5-7 digit values");

    auto* train = app.add_subcommand("train", "Train a generator");
    add_common(train);
    add_model(train);
    add_data(train);
    add_mode(train);
    add_lambda(train);

    auto* est = app.add_subcommand("estimate-m", "Estimate covert bits per element");
    std::size_t trials = 1000, probes = 32, budget = 1000;
    double quantile = 0.9;
    add_common(est);
    add_model(est);
    est->add_option("--n", c.n, "Bits per noise element")->check(CLI::Range(2, 52));
    est->add_option("--trials", trials, "Recovery-bit trials");
    est->add_option("--probes", probes, "Probe encodes per candidate m");
    est->add_option("--quantile", quantile, "Acceptance quantile of attempts");
    est->add_option("--budget", budget, "Attempt budget");

    auto* enc = app.add_subcommand("encode", "Embed a payload file into mock transactions");
    std::string payload_path, suffix_path;
    std::size_t max_attempts = 10'000;
    add_common(enc);
    add_model(enc);
    add_layout(enc);
    add_lambda(enc);
    add_chain(enc);
    enc->add_option("--payload", payload_path, "Payload file (raw bytes)")->required();
    enc->add_option("--suffixes", suffix_path, "Suffix table from 't2c' (needed when lambda >= 1)");
    enc->add_option("--max-attempts", max_attempts, "Attempts per vector before timing out");

    auto* dec = app.add_subcommand("decode", "Recover a payload from mock transactions");
    std::uint64_t from = 0, to = UINT64_MAX;
    std::string payload_out;
    add_common(dec);
    add_model(dec);
    add_layout(dec);
    add_lambda(dec);
    add_chain(dec);
    dec->add_option("--from-height", from, "First block height");
    dec->add_option("--to-height", to, "Last block height");
    dec->add_option("--payload-out", payload_out, "Recovered payload path");

    auto* cap = app.add_subcommand("eval-capacity", "Absolute capacity and CER against baselines");
    std::vector<std::uint64_t> cap_ms;
    add_common(cap);
    cap->add_option("--m", c.m, "Covert bits per element");
    cap->add_option("--ms", cap_ms, "Several values of m");

    auto* conc = app.add_subcommand("eval-concealment", "Classifier-based concealment check");
    std::size_t runs = 10, cls_epochs = 30;
    add_common(conc);
    add_model(conc);
    add_data(conc);
    add_lambda(conc);
    conc->add_option("--runs", runs, "Classifier runs to average");
    conc->add_option("--classifier-epochs", cls_epochs, "Classifier training epochs");

    auto* tim = app.add_subcommand("eval-timing", "Encode-time quartiles over an m sweep");
    std::vector<int> tim_ms;
    std::size_t vectors = 100;
    add_common(tim);
    add_model(tim);
    add_layout(tim);
    tim->add_option("--ms", tim_ms, "Several values of m");
    tim->add_option("--vectors", vectors, "Vectors per m");
    tim->add_option("--max-attempts", max_attempts, "Attempts per vector before timing out");

    auto* t2c = app.add_subcommand("t2c", "Build the suffix table for magnitude trading");
    std::string t2c_out;
    add_common(t2c);
    add_data(t2c);
    add_lambda(t2c);
    t2c->add_option("--data-out", t2c_out, "Write the scaled dataset here");

    auto* rt = app.add_subcommand("roundtrip", "Payload through encode, chain and decode");
    std::size_t payload_bytes = 1024;
    add_common(rt);
    add_model(rt);
    add_data(rt);
    add_mode(rt);
    add_layout(rt);
    add_lambda(rt);
    add_chain(rt);
    rt->add_option("--payload-bytes", payload_bytes, "Random payload size");
    rt->add_option("--max-attempts", max_attempts, "Attempts per vector before timing out");
    rt->callback([&] {
        if (rt->count("--epochs") == 0) c.epochs = 20;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*ingest) return cmd_ingest(c, data_out, select_common);
        if (*train) return cmd_train(c);
        if (*est) return cmd_estimate(c, trials, probes, quantile, budget);
        if (*enc) return cmd_encode(c, payload_path, suffix_path, max_attempts);
        if (*dec) return cmd_decode(c, from, to, payload_out);
        if (*cap) return cmd_capacity(c, cap_ms);
        if (*conc) return cmd_concealment(c, runs, cls_epochs);
        if (*tim) return cmd_timing(c, tim_ms, vectors, max_attempts);
        if (*t2c) return cmd_t2c(c, t2c_out);
        if (*rt) return cmd_roundtrip(c, payload_bytes, max_attempts);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const StageError& e) {
        std::cerr << "error [" << e.stage() << "/" << e.kind() << "]: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error [" << e.kind() << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
