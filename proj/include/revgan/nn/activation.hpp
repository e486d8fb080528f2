#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "revgan/error.hpp"

namespace revgan::nn {

struct LeakyRelu {
    double alpha = 0.3;
    bool operator==(const LeakyRelu&) const = default;
};
struct Sigmoid {
    bool operator==(const Sigmoid&) const = default;
};
/// Sigmoid clamped from below at `floor`; flat (zero-gradient) under it.
struct ClipSigmoid {
    double floor = 1e-20;
    bool operator==(const ClipSigmoid&) const = default;
};
struct Relu {
    bool operator==(const Relu&) const = default;
};

using Activation = std::variant<LeakyRelu, Sigmoid, ClipSigmoid, Relu>;

inline void validate(const Activation& act) {
    if (const auto* l = std::get_if<LeakyRelu>(&act); l && !(l->alpha > 0.0 && l->alpha < 1.0))
        throw DomainError("LeakyReLU slope must lie in (0, 1)");
    if (const auto* c = std::get_if<ClipSigmoid>(&act); c && !(c->floor > 0.0 && c->floor < 1.0))
        throw DomainError("ClipSigmoid floor must lie in (0, 1)");
}

inline double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// ln(y / (1 - y)), accurate for y near 0.
inline double logit(double y) noexcept { return std::log(y) - std::log1p(-y); }

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace detail

inline double activate(const Activation& act, double x) noexcept {
    return std::visit(
        detail::overloaded{
            [x](const LeakyRelu& l) { return x >= 0.0 ? x : l.alpha * x; },
            [x](const Sigmoid&) { return sigmoid(x); },
            [x](const ClipSigmoid& c) {
                const double s = sigmoid(x);
                return s > c.floor ? s : c.floor;
            },
            [x](const Relu&) { return x > 0.0 ? x : 0.0; },
        },
        act);
}

/// d activate / dx at pre-activation x. Zero on the ClipSigmoid flat segment.
inline double activate_derivative(const Activation& act, double x) noexcept {
    return std::visit(
        detail::overloaded{
            [x](const LeakyRelu& l) { return x >= 0.0 ? 1.0 : l.alpha; },
            [x](const Sigmoid&) {
                const double s = sigmoid(x);
                return s * (1.0 - s);
            },
            [x](const ClipSigmoid& c) {
                const double s = sigmoid(x);
                return s > c.floor ? s * (1.0 - s) : 0.0;
            },
            [x](const Relu&) { return x > 0.0 ? 1.0 : 0.0; },
        },
        act);
}

inline double activate_inverse(const Activation& act, double y) {
    return std::visit(
        detail::overloaded{
            [y](const LeakyRelu& l) { return y >= 0.0 ? y : y / l.alpha; },
            [y](const Sigmoid&) {
                if (!(y > 0.0 && y < 1.0))
                    throw DomainError("sigmoid inverse needs y in (0,1), got " + std::to_string(y));
                return logit(y);
            },
            [y](const ClipSigmoid& c) {
                if (!(y > c.floor))
                    throw NotInvertibleAtPoint("ClipSigmoid output on the flat segment");
                if (!(y < 1.0))
                    throw DomainError("ClipSigmoid inverse needs y < 1");
                return logit(y);
            },
            [y](const Relu&) -> double {
                if (!(y > 0.0)) throw NotInvertibleAtPoint("ReLU output on the zero segment");
                return y;
            },
        },
        act);
}

inline std::string name(const Activation& act) {
    return std::visit(detail::overloaded{
                          [](const LeakyRelu&) { return std::string("leaky_relu"); },
                          [](const Sigmoid&) { return std::string("sigmoid"); },
                          [](const ClipSigmoid&) { return std::string("clip_sigmoid"); },
                          [](const Relu&) { return std::string("relu"); },
                      },
                      act);
}

}  // namespace revgan::nn
