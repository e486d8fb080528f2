#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "revgan/nn/matrix.hpp"

namespace revgan::nn {

/// Predictions are clamped to [kBceEpsilon, 1 - kBceEpsilon] before the log.
inline constexpr double kBceEpsilon = 1e-12;

inline double clamp_probability(double p) noexcept {
    return std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
}

/// -mean(l ln p + (1 - l) ln(1 - p)).
inline double bce_loss(std::span<const double> p, std::span<const double> labels) {
    if (p.size() != labels.size()) throw ShapeError("bce_loss: length mismatch");
    if (p.empty()) throw DomainError("bce_loss: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = clamp_probability(p[i]);
        acc += labels[i] * std::log(q) + (1.0 - labels[i]) * std::log(1.0 - q);
    }
    return -acc / static_cast<double>(p.size());
}

/// d bce_loss / d p_i. Zero where the clamp is active.
inline Vec bce_gradient(std::span<const double> p, std::span<const double> labels) {
    if (p.size() != labels.size()) throw ShapeError("bce_gradient: length mismatch");
    if (p.empty()) throw DomainError("bce_gradient: empty input");
    const double n = static_cast<double>(p.size());
    Vec g(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < kBceEpsilon || p[i] > 1.0 - kBceEpsilon) continue;
        g[i] = -(labels[i] / p[i] - (1.0 - labels[i]) / (1.0 - p[i])) / n;
    }
    return g;
}

/// Discriminator loss: the average of the real-sample and fake-sample BCE terms.
inline double discriminator_loss(std::span<const double> d_real, std::span<const double> d_fake) {
    const Vec ones(d_real.size(), 1.0);
    const Vec zeros(d_fake.size(), 0.0);
    return 0.5 * (bce_loss(d_real, ones) + bce_loss(d_fake, zeros));
}

/// Generator loss: BCE of the discriminator's fake scores against "real" labels.
inline double generator_loss(std::span<const double> d_fake) {
    const Vec ones(d_fake.size(), 1.0);
    return bce_loss(d_fake, ones);
}

}  // namespace revgan::nn
