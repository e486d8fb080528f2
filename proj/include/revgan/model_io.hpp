#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "revgan/generator.hpp"
#include "revgan/nn/serialize.hpp"

// Generator file, JSON, keys in this order:
//   format         "revgan.generator"
//   version        1
//   mode           "rgan" | "ccrgan"
//   dims           M (= H = N)
//   normalization  {min_x, max_x: binary64 hex; group_width: integer}
//   layer1, layer2 {rows, cols, weights: row-major hex, biases: hex}
//   act1, act2     {kind, alpha | floor as hex when present}
// Every binary64 is the 16-hex-digit bit pattern, most significant nibble first.

namespace revgan {

inline constexpr int kModelFormatVersion = 1;

inline nn::json model_to_json(const GeneratorModel& g) {
    nn::json j;
    j["format"] = "revgan.generator";
    j["version"] = kModelFormatVersion;
    j["mode"] = to_string(g.mode);
    j["dims"] = g.dims();
    j["normalization"] = {{"min_x", nn::to_hex(g.norm.min_x)},
                          {"max_x", nn::to_hex(g.norm.max_x)},
                          {"group_width", g.norm.group_width}};
    j["layer1"] = nn::to_json(g.layer1);
    j["act1"] = nn::to_json(nn::Activation{g.act1});
    j["layer2"] = nn::to_json(g.layer2);
    j["act2"] = nn::to_json(g.act2);
    return j;
}

inline GeneratorModel model_from_json(const nn::json& j,
                                      std::optional<std::size_t> expected_dims = std::nullopt) {
    try {
        if (j.at("format").get<std::string>() != "revgan.generator")
            throw FormatError("not a generator file");
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion)
            throw FormatError("unsupported model version " + std::to_string(version));
        const auto dims = j.at("dims").get<std::size_t>();
        if (expected_dims && *expected_dims != dims)
            throw ShapeError("model dims " + std::to_string(dims) + ", expected " +
                             std::to_string(*expected_dims));
        GeneratorModel g;
        g.mode = gan_mode_from_string(j.at("mode").get<std::string>());
        const auto& n = j.at("normalization");
        g.norm = {nn::from_hex(n.at("min_x").get<std::string>()),
                  nn::from_hex(n.at("max_x").get<std::string>()),
                  n.at("group_width").get<std::size_t>()};
        g.layer1 = nn::dense_from_json(j.at("layer1"));
        g.layer2 = nn::dense_from_json(j.at("layer2"));
        const auto act1 = nn::activation_from_json(j.at("act1"));
        if (!std::holds_alternative<nn::LeakyRelu>(act1))
            throw FormatError("first activation must be leaky_relu");
        g.act1 = std::get<nn::LeakyRelu>(act1);
        g.act2 = nn::activation_from_json(j.at("act2"));
        if (g.layer1.in_dim() != dims) throw ShapeError("layer shapes disagree with dims");
        g.validate();
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("corrupt model: ") + e.what());
    }
}

inline std::string model_to_string(const GeneratorModel& g) { return model_to_json(g).dump(1) + "\n"; }

inline void save_model(const GeneratorModel& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write model '" + path + "'");
    out << model_to_string(g);
    if (!out) throw FormatError("write failed for '" + path + "'");
}

inline GeneratorModel load_model(const std::string& path,
                                 std::optional<std::size_t> expected_dims = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto j = nn::json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) throw FormatError("corrupt model file '" + path + "'");
    return model_from_json(j, expected_dims);
}

}  // namespace revgan
