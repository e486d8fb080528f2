#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <json.hpp>

#include "revgan/error.hpp"
#include "revgan/nn/conv.hpp"
#include "revgan/nn/loss.hpp"
#include "revgan/rng.hpp"

// A steganalysis stand-in: the discriminator architecture trained as a plain
// binary classifier on groups of log-scaled field values. Label 1 = generated.

namespace revgan {

struct ConcealmentConfig {
    double split = 0.7;
    std::size_t runs = 10;
    std::size_t width = 64;
    std::size_t epochs = 30;
    std::size_t batch_size = 10;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
};

struct ConcealmentReport {
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
    std::size_t n_real = 0, n_generated = 0;  // values per class
    std::size_t train_groups = 0, test_groups = 0;  // per class
    double split = 0.7;
    std::size_t runs = 0;
};

inline nlohmann::ordered_json to_json(const ConcealmentReport& r) {
    return {{"accuracy", r.accuracy},       {"precision", r.precision},
            {"recall", r.recall},           {"f1", r.f1},
            {"n_real", r.n_real},           {"n_generated", r.n_generated},
            {"train_groups", r.train_groups}, {"test_groups", r.test_groups},
            {"split", r.split},             {"runs", r.runs}};
}

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    double accuracy() const {
        const auto n = tp + fp + tn + fn;
        return n ? static_cast<double>(tp + tn) / static_cast<double>(n) : 0.0;
    }
    double precision() const { return tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0; }
    double recall() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
    double f1() const {
        const double p = precision(), r = recall();
        return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }
};

namespace detail {

inline std::vector<nn::Vec> feature_groups(std::span<const std::uint64_t> values, double lo, double hi,
                                           std::size_t width) {
    std::vector<nn::Vec> out;
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t g = 0; g + width <= values.size(); g += width) {
        nn::Vec f(width);
        for (std::size_t i = 0; i < width; ++i)
            f[i] = (std::log10(static_cast<double>(values[g + i])) - lo) / span;
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace detail

/// Trains on `split` of the groups and scores the rest, averaged over `runs`.
/// Both classes are split with the same group permutation.
inline ConcealmentReport concealment_eval(std::span<const std::uint64_t> real,
                                          std::span<const std::uint64_t> generated,
                                          const ConcealmentConfig& c = {}) {
    if (real.size() != generated.size())
        throw SetupError("class sizes differ: " + std::to_string(real.size()) + " real vs " +
                         std::to_string(generated.size()) + " generated");
    if (!(c.split > 0.0 && c.split < 1.0)) throw SetupError("split must lie in (0, 1)");
    if (c.runs == 0 || c.width == 0 || c.batch_size == 0) throw SetupError("runs, width and batch size must be >= 1");
    for (auto v : real)
        if (v < 1) throw SetupError("field values must be >= 1");
    for (auto v : generated)
        if (v < 1) throw SetupError("field values must be >= 1");

    double lo = INFINITY, hi = -INFINITY;
    for (auto s : {real, generated})
        for (auto v : s) {
            const double l = std::log10(static_cast<double>(v));
            lo = std::min(lo, l);
            hi = std::max(hi, l);
        }
    const auto pos = detail::feature_groups(generated, lo, hi, c.width);
    const auto neg = detail::feature_groups(real, lo, hi, c.width);
    const std::size_t groups = pos.size();
    const auto n_train = static_cast<std::size_t>(std::floor(c.split * static_cast<double>(groups)));
    if (n_train == 0 || n_train >= groups) throw SetupError("too few groups for the split");

    ConcealmentReport rep;
    rep.n_real = real.size();
    rep.n_generated = generated.size();
    rep.train_groups = n_train;
    rep.test_groups = groups - n_train;
    rep.split = c.split;
    rep.runs = c.runs;

    for (std::size_t run = 0; run < c.runs; ++run) {
        Rng rng(Rng::derive(c.seed, run));
        std::vector<std::size_t> perm(groups);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = groups; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

        // Training samples: (group index, label).
        std::vector<std::pair<std::size_t, int>> train;
        for (std::size_t k = 0; k < n_train; ++k) {
            train.emplace_back(perm[k], 1);
            train.emplace_back(perm[k], 0);
        }
        nn::ConvStack net = nn::make_discriminator(c.width, rng);
        for (std::size_t e = 0; e < c.epochs; ++e) {
            for (std::size_t i = train.size(); i > 1; --i) std::swap(train[i - 1], train[rng.below(i)]);
            for (std::size_t b = 0; b < train.size(); b += c.batch_size) {
                const std::size_t end = std::min(train.size(), b + c.batch_size);
                std::vector<nn::ConvTape> tapes(end - b);
                nn::Vec p, y;
                for (std::size_t k = b; k < end; ++k) {
                    const auto& [g, label] = train[k];
                    p.push_back(nn::conv_forward_sample(net, label ? pos[g] : neg[g], &tapes[k - b]));
                    y.push_back(label);
                }
                const nn::Vec gp = nn::bce_gradient(p, y);
                nn::ConvGrad grad(net);
                for (std::size_t k = 0; k < tapes.size(); ++k) nn::conv_backward_sample(net, tapes[k], gp[k], &grad);
                nn::sgd_step(net, grad, c.learning_rate);
            }
        }
        Confusion cm;
        for (std::size_t k = n_train; k < groups; ++k) {
            const std::size_t g = perm[k];
            (nn::conv_forward_sample(net, pos[g]) >= 0.5 ? cm.tp : cm.fn)++;
            (nn::conv_forward_sample(net, neg[g]) >= 0.5 ? cm.fp : cm.tn)++;
        }
        rep.accuracy += cm.accuracy();
        rep.precision += cm.precision();
        rep.recall += cm.recall();
        rep.f1 += cm.f1();
    }
    const auto runs = static_cast<double>(c.runs);
    rep.accuracy /= runs;
    rep.precision /= runs;
    rep.recall /= runs;
    rep.f1 /= runs;
    return rep;
}

}  // namespace revgan
