#pragma once

#include <cmath>
#include <span>
#include <string>

#include "revgan/nn/matrix.hpp"
#include "revgan/rng.hpp"

namespace revgan::nn {

/// Fully connected layer: y = W x + b, W is out_dim x in_dim.
struct DenseLayer {
    Matrix weights;
    Vec biases;

    DenseLayer() = default;
    DenseLayer(Matrix w, Vec b) : weights(std::move(w)), biases(std::move(b)) {
        if (biases.size() != weights.rows()) throw ShapeError("bias length != weight rows");
    }
    DenseLayer(std::size_t in_dim, std::size_t out_dim)
        : weights(out_dim, in_dim), biases(out_dim, 0.0) {}

    std::size_t in_dim() const noexcept { return weights.cols(); }
    std::size_t out_dim() const noexcept { return weights.rows(); }

    bool operator==(const DenseLayer&) const = default;
};

/// Gradient buffer shaped like a DenseLayer.
struct DenseGrad {
    Matrix weights;
    Vec biases;

    explicit DenseGrad(const DenseLayer& like)
        : weights(like.weights.rows(), like.weights.cols()), biases(like.biases.size(), 0.0) {}
};

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
inline DenseLayer init_dense(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
    DenseLayer layer(in_dim, out_dim);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (double& w : layer.weights.data()) w = rng.uniform(-bound, bound);
    for (double& b : layer.biases) b = rng.uniform(-bound, bound);
    return layer;
}

inline Vec dense_forward(const DenseLayer& layer, std::span<const double> x) {
    if (x.size() != layer.in_dim())
        throw ShapeError("dense_forward: expected input of length " +
                         std::to_string(layer.in_dim()) + ", got " + std::to_string(x.size()));
    Vec y = multiply(layer.weights, x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += layer.biases[i];
    return y;
}

/// Accumulates dL/dW += g x^T and dL/db += g, and returns dL/dx = W^T g.
inline Vec dense_backward(const DenseLayer& layer, std::span<const double> x,
                          std::span<const double> grad_out, DenseGrad& grad) {
    const std::size_t out = layer.out_dim();
    const std::size_t in = layer.in_dim();
    if (x.size() != in || grad_out.size() != out) throw ShapeError("dense_backward: shape mismatch");
    Vec grad_in(in, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
        const double g = grad_out[r];
        grad.biases[r] += g;
        auto grow = grad.weights.row(r);
        const auto wrow = layer.weights.row(r);
        for (std::size_t c = 0; c < in; ++c) {
            grow[c] += g * x[c];
            grad_in[c] += wrow[c] * g;
        }
    }
    return grad_in;
}

/// Plain SGD step. `what` names the layer in the error raised on non-finite gradients.
inline void sgd_step(DenseLayer& layer, const DenseGrad& grad, double lr, const std::string& what) {
    if (!all_finite(grad.weights.data()) || !all_finite(grad.biases))
        throw TrainingError("non-finite gradient in " + what);
    if (lr == 0.0) return;
    auto w = layer.weights.data();
    const auto gw = grad.weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gw[i];
    for (std::size_t i = 0; i < layer.biases.size(); ++i) layer.biases[i] -= lr * grad.biases[i];
    if (!all_finite(layer.weights.data()) || !all_finite(layer.biases))
        throw TrainingError("non-finite parameter after update in " + what);
}

}  // namespace revgan::nn
