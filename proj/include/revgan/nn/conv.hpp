#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "revgan/nn/activation.hpp"
#include "revgan/nn/dense.hpp"

namespace revgan::nn {

/// 1-D convolution over a (channels x length) sample stored channel-major.
/// Weights are laid out [out_ch][in_ch][kernel]; zero padding of kernel/2.
struct Conv1d {
    std::size_t in_ch = 1;
    std::size_t out_ch = 1;
    std::size_t kernel = 3;
    std::size_t stride = 1;
    Vec weights;
    Vec biases;

    std::size_t padding() const noexcept { return kernel / 2; }
    std::size_t out_length(std::size_t in_length) const noexcept {
        return (in_length + 2 * padding() - kernel) / stride + 1;
    }
    double& w(std::size_t o, std::size_t i, std::size_t k) noexcept {
        return weights[(o * in_ch + i) * kernel + k];
    }
    double w(std::size_t o, std::size_t i, std::size_t k) const noexcept {
        return weights[(o * in_ch + i) * kernel + k];
    }

    bool operator==(const Conv1d&) const = default;
};

inline Conv1d init_conv(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
                        std::size_t stride, Rng& rng) {
    Conv1d c{in_ch, out_ch, kernel, stride, Vec(out_ch * in_ch * kernel), Vec(out_ch)};
    // He-uniform; the stack is six ReLU layers deep.
    const double bound = std::sqrt(6.0 / static_cast<double>(in_ch * kernel));
    for (double& v : c.weights) v = rng.uniform(-bound, bound);
    return c;
}

inline Vec conv_forward_layer(const Conv1d& c, std::span<const double> x, std::size_t length) {
    const std::size_t out_len = c.out_length(length);
    const auto pad = static_cast<std::ptrdiff_t>(c.padding());
    Vec y(c.out_ch * out_len, 0.0);
    for (std::size_t o = 0; o < c.out_ch; ++o)
        for (std::size_t t = 0; t < out_len; ++t) {
            double acc = c.biases[o];
            const auto start = static_cast<std::ptrdiff_t>(t * c.stride) - pad;
            for (std::size_t i = 0; i < c.in_ch; ++i)
                for (std::size_t k = 0; k < c.kernel; ++k) {
                    const auto pos = start + static_cast<std::ptrdiff_t>(k);
                    if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(length)) continue;
                    acc += c.w(o, i, k) * x[i * length + static_cast<std::size_t>(pos)];
                }
            y[o * out_len + t] = acc;
        }
    return y;
}

/// Convolutional scorer: conv layers with ReLU, then one dense unit with Sigmoid.
struct ConvStack {
    std::size_t input_length = 64;
    std::vector<Conv1d> convs;
    DenseLayer head;

    bool operator==(const ConvStack&) const = default;
};

struct ConvGrad {
    std::vector<Conv1d> convs;  // same shapes as the stack, zero-filled
    DenseGrad head;

    explicit ConvGrad(const ConvStack& s) : head(s.head) {
        for (const auto& c : s.convs) {
            Conv1d z = c;
            std::fill(z.weights.begin(), z.weights.end(), 0.0);
            std::fill(z.biases.begin(), z.biases.end(), 0.0);
            convs.push_back(std::move(z));
        }
    }
};

/// Activations recorded during one forward pass, consumed by backward.
struct ConvTape {
    std::vector<Vec> inputs;       // input of each conv layer
    std::vector<Vec> pre;          // pre-ReLU output of each conv layer
    std::vector<std::size_t> lengths;
    Vec flat;                      // head input
    double head_pre = 0.0;
    double score = 0.0;
};

/// Discriminator shape: kernel 3, stride 1, channels 1-8-8-16-16-32-32, ReLU after
/// each conv, then dense (32 * length) -> 1 with Sigmoid.
inline ConvStack make_discriminator(std::size_t input_length, Rng& rng) {
    static constexpr std::size_t channels[] = {1, 8, 8, 16, 16, 32, 32};
    ConvStack s;
    s.input_length = input_length;
    std::size_t len = input_length;
    for (std::size_t l = 0; l + 1 < std::size(channels); ++l) {
        s.convs.push_back(init_conv(channels[l], channels[l + 1], 3, 1, rng));
        len = s.convs.back().out_length(len);
    }
    s.head = init_dense(channels[std::size(channels) - 1] * len, 1, rng);
    return s;
}

inline double conv_forward_sample(const ConvStack& s, std::span<const double> x,
                                  ConvTape* tape = nullptr) {
    if (x.size() != s.input_length)
        throw ShapeError("conv_forward: sample length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(s.input_length));
    Vec cur(x.begin(), x.end());
    std::size_t len = s.input_length;
    if (tape) *tape = ConvTape{};
    for (const auto& c : s.convs) {
        if (cur.size() != c.in_ch * len) throw ShapeError("conv_forward: channel mismatch");
        Vec pre = conv_forward_layer(c, cur, len);
        if (tape) {
            tape->inputs.push_back(std::move(cur));
            tape->lengths.push_back(len);
        }
        len = c.out_length(len);
        cur = pre;
        for (double& v : cur) v = v > 0.0 ? v : 0.0;
        if (tape) tape->pre.push_back(std::move(pre));
    }
    const double z = dense_forward(s.head, cur)[0];
    const double score = sigmoid(z);
    if (tape) {
        tape->flat = std::move(cur);
        tape->head_pre = z;
        tape->score = score;
    }
    return score;
}

/// Scores for a batch of samples.
inline Vec conv_forward(const ConvStack& s, const std::vector<Vec>& batch) {
    Vec scores;
    scores.reserve(batch.size());
    for (const auto& sample : batch) scores.push_back(conv_forward_sample(s, sample));
    return scores;
}

/// Backpropagates dL/dscore through the stack; accumulates parameter gradients
/// into `grad` (may be null to skip) and returns dL/dinput.
inline Vec conv_backward_sample(const ConvStack& s, const ConvTape& tape, double grad_score,
                                ConvGrad* grad) {
    const double gz = grad_score * tape.score * (1.0 - tape.score);
    DenseGrad scratch(s.head);
    Vec g = dense_backward(s.head, tape.flat, std::span<const double>(&gz, 1),
                           grad ? grad->head : scratch);
    for (std::size_t l = s.convs.size(); l-- > 0;) {
        const Conv1d& c = s.convs[l];
        const Vec& pre = tape.pre[l];
        const Vec& in = tape.inputs[l];
        const std::size_t len = tape.lengths[l];
        const std::size_t out_len = c.out_length(len);
        const auto pad = static_cast<std::ptrdiff_t>(c.padding());
        for (std::size_t j = 0; j < g.size(); ++j)
            if (!(pre[j] > 0.0)) g[j] = 0.0;
        Vec gin(c.in_ch * len, 0.0);
        for (std::size_t o = 0; o < c.out_ch; ++o)
            for (std::size_t t = 0; t < out_len; ++t) {
                const double go = g[o * out_len + t];
                if (go == 0.0) continue;
                if (grad) grad->convs[l].biases[o] += go;
                const auto start = static_cast<std::ptrdiff_t>(t * c.stride) - pad;
                for (std::size_t i = 0; i < c.in_ch; ++i)
                    for (std::size_t k = 0; k < c.kernel; ++k) {
                        const auto pos = start + static_cast<std::ptrdiff_t>(k);
                        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(len)) continue;
                        const std::size_t idx = i * len + static_cast<std::size_t>(pos);
                        if (grad) grad->convs[l].w(o, i, k) += go * in[idx];
                        gin[idx] += c.w(o, i, k) * go;
                    }
            }
        g = std::move(gin);
    }
    return g;
}

inline void sgd_step(ConvStack& s, const ConvGrad& grad, double lr) {
    for (std::size_t l = 0; l < s.convs.size(); ++l) {
        const auto& gc = grad.convs[l];
        if (!all_finite(gc.weights) || !all_finite(gc.biases))
            throw TrainingError("non-finite gradient in discriminator conv layer " +
                                std::to_string(l));
    }
    sgd_step(s.head, grad.head, lr, "discriminator head");
    if (lr == 0.0) return;
    for (std::size_t l = 0; l < s.convs.size(); ++l) {
        auto& c = s.convs[l];
        const auto& gc = grad.convs[l];
        for (std::size_t i = 0; i < c.weights.size(); ++i) c.weights[i] -= lr * gc.weights[i];
        for (std::size_t i = 0; i < c.biases.size(); ++i) c.biases[i] -= lr * gc.biases[i];
    }
}

}  // namespace revgan::nn
