#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "revgan/nn/activation.hpp"
#include "revgan/nn/conv.hpp"
#include "revgan/nn/dense.hpp"

// binary64 values are stored as their 16-hex-digit IEEE 754 bit pattern so a
// save/load cycle is bit exact.

namespace revgan::nn {

using json = nlohmann::ordered_json;

inline std::string to_hex(double v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(v)));
    return buf;
}

inline double from_hex(const std::string& s) {
    if (s.size() != 16) throw FormatError("binary64 hex pattern must have 16 digits: '" + s + "'");
    std::uint64_t bits = 0;
    for (char ch : s) {
        int d;
        if (ch >= '0' && ch <= '9') d = ch - '0';
        else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
        else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
        else throw FormatError("bad hex digit in '" + s + "'");
        bits = (bits << 4) | static_cast<std::uint64_t>(d);
    }
    return std::bit_cast<double>(bits);
}

inline json hex_array(std::span<const double> v) {
    json a = json::array();
    for (double x : v) a.push_back(to_hex(x));
    return a;
}

inline Vec vec_from_hex(const json& a, std::size_t expected, const char* what) {
    if (!a.is_array()) throw FormatError(std::string(what) + ": expected array");
    if (a.size() != expected)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(expected) +
                         " values, got " + std::to_string(a.size()));
    Vec out;
    out.reserve(a.size());
    for (const auto& e : a) out.push_back(from_hex(e.get<std::string>()));
    return out;
}

// Field order: rows, cols, weights (row-major), biases.
inline json to_json(const DenseLayer& l) {
    json j;
    j["rows"] = l.weights.rows();
    j["cols"] = l.weights.cols();
    j["weights"] = hex_array(l.weights.data());
    j["biases"] = hex_array(l.biases);
    return j;
}

inline DenseLayer dense_from_json(const json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    Matrix w(rows, cols);
    const Vec flat = vec_from_hex(j.at("weights"), rows * cols, "weights");
    std::copy(flat.begin(), flat.end(), w.data().begin());
    return DenseLayer(std::move(w), vec_from_hex(j.at("biases"), rows, "biases"));
}

inline json to_json(const Activation& a) {
    json j;
    j["kind"] = name(a);
    if (const auto* l = std::get_if<LeakyRelu>(&a)) j["alpha"] = to_hex(l->alpha);
    if (const auto* c = std::get_if<ClipSigmoid>(&a)) j["floor"] = to_hex(c->floor);
    return j;
}

inline Activation activation_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    Activation a;
    if (kind == "leaky_relu") a = LeakyRelu{from_hex(j.at("alpha").get<std::string>())};
    else if (kind == "sigmoid") a = Sigmoid{};
    else if (kind == "clip_sigmoid") a = ClipSigmoid{from_hex(j.at("floor").get<std::string>())};
    else if (kind == "relu") a = Relu{};
    else throw FormatError("unknown activation '" + kind + "'");
    validate(a);
    return a;
}

inline json to_json(const ConvStack& s) {
    json j;
    j["input_length"] = s.input_length;
    json convs = json::array();
    for (const auto& c : s.convs) {
        json cj;
        cj["in_ch"] = c.in_ch;
        cj["out_ch"] = c.out_ch;
        cj["kernel"] = c.kernel;
        cj["stride"] = c.stride;
        cj["weights"] = hex_array(c.weights);
        cj["biases"] = hex_array(c.biases);
        convs.push_back(std::move(cj));
    }
    j["convs"] = std::move(convs);
    j["head"] = to_json(s.head);
    return j;
}

inline ConvStack conv_stack_from_json(const json& j) {
    ConvStack s;
    s.input_length = j.at("input_length").get<std::size_t>();
    for (const auto& cj : j.at("convs")) {
        Conv1d c;
        c.in_ch = cj.at("in_ch").get<std::size_t>();
        c.out_ch = cj.at("out_ch").get<std::size_t>();
        c.kernel = cj.at("kernel").get<std::size_t>();
        c.stride = cj.at("stride").get<std::size_t>();
        c.weights = vec_from_hex(cj.at("weights"), c.out_ch * c.in_ch * c.kernel, "conv weights");
        c.biases = vec_from_hex(cj.at("biases"), c.out_ch, "conv biases");
        s.convs.push_back(std::move(c));
    }
    s.head = dense_from_json(j.at("head"));
    return s;
}

}  // namespace revgan::nn
