#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "revgan/dataset.hpp"
#include "revgan/nn/activation.hpp"
#include "revgan/nn/dense.hpp"
#include "revgan/nn/matrix.hpp"

namespace revgan {

/// R-GAN keeps Sigmoid on the output layer and trains on the common digit
/// lengths; CCR-GAN keeps every value and uses ClipSigmoid.
enum class GanMode { rgan, ccrgan };

inline std::string to_string(GanMode m) { return m == GanMode::rgan ? "rgan" : "ccrgan"; }

inline GanMode gan_mode_from_string(const std::string& s) {
    if (s == "rgan") return GanMode::rgan;
    if (s == "ccrgan") return GanMode::ccrgan;
    throw DomainError("unknown mode '" + s + "' (expected rgan or ccrgan)");
}

/// Two dense layers, square and of equal width, so the whole map can be run
/// backwards: noise -> W1 -> LeakyReLU -> W2 -> (Clip)Sigmoid -> denormalize.
struct GeneratorModel {
    nn::DenseLayer layer1;
    nn::LeakyRelu act1{0.3};
    nn::DenseLayer layer2;
    nn::Activation act2 = nn::Sigmoid{};
    NormalizationParams norm;
    GanMode mode = GanMode::rgan;

    std::size_t dims() const noexcept { return layer1.in_dim(); }

    void validate() const {
        const std::size_t m = layer1.in_dim();
        if (layer1.out_dim() != m || layer2.in_dim() != m || layer2.out_dim() != m)
            throw ShapeError("generator layers must all be " + std::to_string(m) + "x" +
                             std::to_string(m));
        nn::validate(act1);
        nn::validate(act2);
        const bool clip = std::holds_alternative<nn::ClipSigmoid>(act2);
        if (clip != (mode == GanMode::ccrgan))
            throw DomainError("output activation must be ClipSigmoid exactly in ccrgan mode");
        if (!std::holds_alternative<nn::Sigmoid>(act2) && !clip)
            throw DomainError("output activation must be Sigmoid or ClipSigmoid");
        if (!(norm.max_x > norm.min_x)) throw DomainError("normalization needs max > min");
    }

    bool operator==(const GeneratorModel&) const = default;
};

/// Intermediate values of one forward pass.
struct GeneratorTape {
    nn::Vec input, z1, hidden, z2, output;
};

/// Normalized output act2(W2 act1(W1 x + b1) + b2). Never throws on the flat
/// segment; training relies on that.
inline nn::Vec generator_forward(const GeneratorModel& g, std::span<const double> noise,
                                 GeneratorTape* tape = nullptr) {
    nn::Vec z1 = nn::dense_forward(g.layer1, noise);
    nn::Vec h(z1.size());
    for (std::size_t i = 0; i < z1.size(); ++i) h[i] = nn::activate(g.act1, z1[i]);
    nn::Vec z2 = nn::dense_forward(g.layer2, h);
    nn::Vec y(z2.size());
    for (std::size_t i = 0; i < z2.size(); ++i) y[i] = nn::activate(g.act2, z2[i]);
    if (tape) *tape = {nn::Vec(noise.begin(), noise.end()), std::move(z1), std::move(h),
                       std::move(z2), y};
    return y;
}

struct GeneratorGrad {
    nn::DenseGrad layer1;
    nn::DenseGrad layer2;

    explicit GeneratorGrad(const GeneratorModel& g) : layer1(g.layer1), layer2(g.layer2) {}
};

/// Accumulates parameter gradients given dL/dy; returns dL/dnoise.
inline nn::Vec generator_backward(const GeneratorModel& g, const GeneratorTape& t,
                                  std::span<const double> grad_y, GeneratorGrad& grad) {
    nn::Vec gz2(grad_y.size());
    for (std::size_t i = 0; i < gz2.size(); ++i)
        gz2[i] = grad_y[i] * nn::activate_derivative(g.act2, t.z2[i]);
    nn::Vec gh = nn::dense_backward(g.layer2, t.hidden, gz2, grad.layer2);
    for (std::size_t i = 0; i < gh.size(); ++i) gh[i] *= nn::activate_derivative(g.act1, t.z1[i]);
    return nn::dense_backward(g.layer1, t.input, gh, grad.layer1);
}

inline void sgd_step(GeneratorModel& g, const GeneratorGrad& grad, double lr) {
    nn::sgd_step(g.layer1, grad.layer1, lr, "generator layer 1");
    nn::sgd_step(g.layer2, grad.layer2, lr, "generator layer 2");
}

struct InvertibilityReport {
    double residual1 = 0.0;  ///< max |W1 W1^-1 - I|
    double residual2 = 0.0;  ///< max |W2 W2^-1 - I|
    double max_residual() const noexcept { return std::max(residual1, residual2); }
};

/// A generator together with its precomputed weight inverses. Construction
/// fails with SingularMatrix when either weight matrix cannot be inverted.
/// Immutable afterwards, so generate/invert may run concurrently.
class ReversibleGenerator {
public:
    explicit ReversibleGenerator(GeneratorModel model) : model_(std::move(model)) {
        model_.validate();
        auto inv1 = nn::matrix_inverse(model_.layer1.weights);
        auto inv2 = nn::matrix_inverse(model_.layer2.weights);
        w1_inv_ = std::move(inv1.inverse);
        w2_inv_ = std::move(inv2.inverse);
        report_ = {inv1.residual, inv2.residual};
    }

    const GeneratorModel& model() const noexcept { return model_; }
    const InvertibilityReport& report() const noexcept { return report_; }
    std::size_t dims() const noexcept { return model_.dims(); }

    /// Normalized outputs for a noise vector in [-1, 1]^M.
    nn::Vec generate_normalized(std::span<const double> noise) const {
        if (noise.size() != dims())
            throw ShapeError("noise length " + std::to_string(noise.size()) + ", expected " +
                             std::to_string(dims()));
        for (double x : noise)
            if (!(x >= -1.0 && x <= 1.0)) throw DomainError("noise entry outside [-1, 1]");
        nn::Vec y = generator_forward(model_, noise);
        if (const auto* c = std::get_if<nn::ClipSigmoid>(&model_.act2))
            for (std::size_t i = 0; i < y.size(); ++i)
                if (!(y[i] > c->floor))
                    throw FlatSegmentOutput("output " + std::to_string(i) +
                                            " lies on the ClipSigmoid flat segment");
        return y;
    }

    /// Amounts before rounding.
    nn::Vec generate(std::span<const double> noise) const {
        nn::Vec a = generate_normalized(noise);
        for (double& v : a) v = denormalize(v, model_.norm);
        return a;
    }

    /// Recovered noise W1^-1 (act1^-1(W2^-1 (act2^-1(normalize(a)) - b2)) - b1).
    nn::Vec invert(std::span<const double> amounts) const {
        if (amounts.size() != dims())
            throw ShapeError("amount vector length " + std::to_string(amounts.size()) +
                             ", expected " + std::to_string(dims()));
        nn::Vec z2(amounts.size());
        for (std::size_t i = 0; i < amounts.size(); ++i)
            z2[i] = nn::activate_inverse(model_.act2, normalize_value(amounts[i], model_.norm)) -
                    model_.layer2.biases[i];
        nn::Vec h = nn::multiply(w2_inv_, z2);
        for (std::size_t i = 0; i < h.size(); ++i)
            h[i] = nn::activate_inverse(model_.act1, h[i]) - model_.layer1.biases[i];
        return nn::multiply(w1_inv_, h);
    }

    nn::Vec invert(std::span<const std::uint64_t> amounts) const {
        const nn::Vec a(amounts.begin(), amounts.end());
        return invert(std::span<const double>(a));
    }

private:
    GeneratorModel model_;
    nn::Matrix w1_inv_;
    nn::Matrix w2_inv_;
    InvertibilityReport report_;
};

inline InvertibilityReport check_invertible(const GeneratorModel& g) {
    return ReversibleGenerator(g).report();
}

inline nn::Vec generate(const GeneratorModel& g, std::span<const double> noise) {
    return ReversibleGenerator(g).generate(noise);
}

inline nn::Vec invert(const GeneratorModel& g, std::span<const double> amounts) {
    return ReversibleGenerator(g).invert(amounts);
}

}  // namespace revgan
