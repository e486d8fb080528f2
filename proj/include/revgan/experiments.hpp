#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include <json.hpp>

#include "revgan/codec.hpp"
#include "revgan/generator.hpp"
#include "revgan/npid.hpp"
#include "revgan/rng.hpp"

namespace revgan {

/// Histogram of per-vector minimum recovery bits.
struct RecoveryHistogram {
    std::map<int, std::size_t> counts;
    std::size_t trials = 0;
    std::size_t failures = 0;  // generation or inversion failed outright

    int max_bits() const { return counts.empty() ? 0 : counts.rbegin()->first; }
    /// Trials whose minimum is at least `bits`.
    std::size_t at_least(int bits) const {
        std::size_t c = 0;
        for (const auto& [b, k] : counts)
            if (b >= bits) c += k;
        return c;
    }
};

inline nlohmann::ordered_json to_json(const RecoveryHistogram& h) {
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (const auto& [b, k] : h.counts) counts[std::to_string(b)] = k;
    return {{"trials", h.trials}, {"failures", h.failures}, {"counts", counts}};
}

/// Random noise on the n-bit grid: uniform over [-1, 1] at layout resolution.
inline nn::Vec random_noise(std::size_t dims, int n, Rng& rng) {
    nn::Vec x(dims);
    for (double& v : x) v = value_to_noise(rng.bits(n), n);
    return x;
}

/// Per trial: noise -> generate -> round -> invert, then the minimum over the
/// vector of leading bits that survived. Trial t uses stream derive(seed, t).
inline RecoveryHistogram recovery_bit_experiment(const ReversibleGenerator& gen, std::size_t trials,
                                                 std::uint64_t seed, int n = 52) {
    RecoveryHistogram h;
    h.trials = trials;
    std::vector<std::uint64_t> amounts(gen.dims());
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(Rng::derive(seed, t));
        const nn::Vec x = random_noise(gen.dims(), n, rng);
        try {
            const nn::Vec a = gen.generate(x);
            for (std::size_t i = 0; i < a.size(); ++i) amounts[i] = to_amount(a[i]);
            const nn::Vec xr = gen.invert(std::span<const std::uint64_t>(amounts));
            int lo = n;
            for (std::size_t i = 0; i < x.size(); ++i) lo = std::min(lo, recovery_bits(x[i], xr[i], n));
            ++h.counts[lo];
        } catch (const Error&) {
            ++h.failures;
        }
    }
    return h;
}

/// Order statistic by linear interpolation between closest ranks.
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline Chunk random_chunk(std::size_t dims, int m, Rng& rng) {
    Chunk c(dims);
    for (auto& s : c) s = rng.bits(m);
    return c;
}

struct EstimateConfig {
    std::size_t trials = 1000;       // recovery-bit trials
    std::size_t probes = 32;         // encodes per candidate m
    double acceptance_quantile = 0.9;
    std::size_t attempt_budget = 1000;
    int n = 52;
    std::uint64_t seed = 0;
};

struct MEstimate {
    int m = 0;
    int histogram_bound = 0;  // max observed minimum recovery bits - 1
    RecoveryHistogram histogram;
    /// Attempt quantile measured for each probed m (timeouts count as budget + 1).
    std::map<int, double> probed;
};

inline nlohmann::ordered_json to_json(const MEstimate& e) {
    nlohmann::ordered_json probed = nlohmann::ordered_json::object();
    for (const auto& [m, q] : e.probed) probed[std::to_string(m)] = q;
    return {{"m", e.m},
            {"histogram_bound", e.histogram_bound},
            {"histogram", to_json(e.histogram)},
            {"probed_attempt_quantile", probed}};
}

/// Two steps: the histogram bounds m from above, then the largest m whose
/// probe encodes finish within the attempt budget at the requested quantile.
inline MEstimate estimate_m(const ReversibleGenerator& gen, const EstimateConfig& c = {}) {
    if (c.trials < 100) throw DomainError("estimate_m needs at least 100 trials");
    if (!(c.acceptance_quantile > 0.0 && c.acceptance_quantile <= 1.0))
        throw DomainError("acceptance quantile must lie in (0, 1]");
    if (c.probes == 0) throw DomainError("estimate_m needs at least one probe");
    MEstimate out;
    out.histogram = recovery_bit_experiment(gen, c.trials, c.seed, c.n);
    out.histogram_bound = std::clamp(out.histogram.max_bits() - 1, 0, c.n - 2);
    const std::uint64_t probe_seed = Rng::derive(c.seed, 0xE57);
    for (int m = out.histogram_bound; m >= 1; --m) {
        const NoiseLayout layout{c.n, m};
        std::vector<double> attempts;
        for (std::size_t p = 0; p < c.probes; ++p) {
            Rng rng(Rng::derive(probe_seed, static_cast<std::uint64_t>(m) * 1'000'003U + p));
            const Chunk chunk = random_chunk(gen.dims(), m, rng);
            try {
                attempts.push_back(static_cast<double>(
                    encode(gen, chunk, layout, rng, {c.attempt_budget, false}).attempts));
            } catch (const EncodingTimeout&) {
                attempts.push_back(static_cast<double>(c.attempt_budget + 1));
            }
        }
        std::sort(attempts.begin(), attempts.end());
        const auto rank = static_cast<std::size_t>(
            std::ceil(c.acceptance_quantile * static_cast<double>(attempts.size()))) - 1;
        const double q = attempts[std::min(rank, attempts.size() - 1)];
        out.probed[m] = q;
        if (q <= static_cast<double>(c.attempt_budget)) {
            out.m = m;
            break;
        }
    }
    return out;
}

struct Summary {
    double q1 = 0.0, median = 0.0, q3 = 0.0, mean = 0.0;
};

inline Summary summarize_values(const std::vector<double>& v) {
    Summary s;
    if (v.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan, nan, nan};
    }
    s.q1 = quantile(v, 0.25);
    s.median = quantile(v, 0.5);
    s.q3 = quantile(v, 0.75);
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    return s;
}

inline nlohmann::ordered_json to_json(const Summary& s) {
    return {{"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"mean", s.mean}};
}

struct TimingReport {
    int m = 0;
    std::size_t n_vectors = 0;
    std::size_t timeouts = 0;
    Summary per_vector;   // seconds
    Summary per_element;  // seconds / dims
    Summary attempts;
    std::vector<double> samples;  // seconds per accepted vector
};

inline nlohmann::ordered_json to_json(const TimingReport& r) {
    return {{"m", r.m},
            {"n_vectors", r.n_vectors},
            {"timeouts", r.timeouts},
            {"per_vector_seconds", to_json(r.per_vector)},
            {"per_element_seconds", to_json(r.per_element)},
            {"attempts", to_json(r.attempts)}};
}

/// Wall-clock cost of the embed/verify loop for `n_vectors` random chunks.
/// Timed-out vectors are excluded from the statistics and counted.
inline TimingReport timing_experiment(const ReversibleGenerator& gen, int m, std::size_t n_vectors,
                                      std::uint64_t seed, std::size_t max_attempts = 10'000,
                                      int n = 52) {
    if (n_vectors < 4) throw DomainError("timing needs at least 4 vectors");
    const NoiseLayout layout{n, m};
    layout.validate();
    TimingReport r;
    r.m = m;
    r.n_vectors = n_vectors;
    std::vector<double> secs, per_el, att;
    for (std::size_t v = 0; v < n_vectors; ++v) {
        Rng rng(Rng::derive(seed, v));
        const Chunk chunk = random_chunk(gen.dims(), m, rng);
        try {
            const auto res = encode(gen, chunk, layout, rng, {max_attempts, false});
            secs.push_back(res.elapsed_seconds);
            per_el.push_back(res.elapsed_seconds / static_cast<double>(gen.dims()));
            att.push_back(static_cast<double>(res.attempts));
        } catch (const EncodingTimeout&) {
            ++r.timeouts;
        }
    }
    r.per_vector = summarize_values(secs);
    r.samples = std::move(secs);
    r.per_element = summarize_values(per_el);
    r.attempts = summarize_values(att);
    return r;
}

}  // namespace revgan
