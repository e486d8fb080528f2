#pragma once

#include <cstdio>
#include <map>
#include <filesystem>
#include <string>

#include "revgan/revgan.hpp"

namespace testing_support {

/// Dataset used throughout: 8192 log-uniform values over [10^2, 10^13].
inline revgan::FieldDataset synthetic_dataset(std::uint64_t seed = 1) {
    return revgan::synthetic_log_uniform(8192, 2.0, 13.0, seed);
}

/// CCR-GAN trained on the synthetic dataset; cached per process.
inline const revgan::TrainResult& synthetic_model(std::size_t epochs = 20, std::uint64_t seed = 3) {
    static std::map<std::pair<std::size_t, std::uint64_t>, revgan::TrainResult> cache;
    auto it = cache.find({epochs, seed});
    if (it == cache.end()) {
        auto c = revgan::TrainConfig::for_mode(revgan::GanMode::ccrgan);
        c.max_epochs = epochs;
        c.seed = seed;
        it = cache.emplace(std::make_pair(epochs, seed),
                           revgan::train_on_values(c, revgan::as_reals(synthetic_dataset()))).first;
    }
    return it->second;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("revgan-test-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testing_support
