#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "revgan/generator.hpp"
#include "revgan/nn/conv.hpp"
#include "revgan/nn/loss.hpp"
#include "revgan/rng.hpp"

namespace revgan {

/// Which epoch loss drives early stopping.
enum class StopOn { generator, discriminator, sum };

struct TrainConfig {
    GanMode mode = GanMode::ccrgan;
    std::size_t batch_size = 10;
    std::size_t dims = 64;
    double learning_rate = 1e-3;
    double lr_decay = 0.9;          // ccrgan only
    std::size_t lr_decay_every = 2; // epochs
    std::size_t patience = 10;
    std::size_t max_epochs = 500;
    std::uint64_t seed = 0;
    double alpha = 0.3;
    double clip_floor = 1e-20;
    bool auto_clip_floor = false;   // floor = (min / max)^2
    StopOn stop_on = StopOn::generator;

    static TrainConfig for_mode(GanMode mode) {
        TrainConfig c;
        c.mode = mode;
        c.patience = mode == GanMode::ccrgan ? 10 : 5;
        return c;
    }

    /// Rate in effect at the start of 0-based epoch `epoch`.
    double rate_at(std::size_t epoch) const {
        if (mode != GanMode::ccrgan || lr_decay_every == 0) return learning_rate;
        return learning_rate * std::pow(lr_decay, static_cast<double>(epoch / lr_decay_every));
    }

    void validate() const {
        if (patience < 1) throw DomainError("patience must be >= 1");
        if (!(learning_rate > 0.0)) throw DomainError("learning rate must be > 0");
        if (batch_size < 1 || dims < 1) throw DomainError("batch size and dims must be >= 1");
    }
};

struct EpochRecord {
    std::size_t epoch = 0;
    double learning_rate = 0.0;
    double generator_loss = 0.0;
    double discriminator_loss = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::string stop_reason;
    std::size_t epochs_run = 0;
    double invert_residual = 0.0;

    bool operator==(const TrainReport& o) const {
        if (stop_reason != o.stop_reason || epochs_run != o.epochs_run ||
            invert_residual != o.invert_residual || epochs.size() != o.epochs.size())
            return false;
        for (std::size_t i = 0; i < epochs.size(); ++i) {
            const auto& a = epochs[i];
            const auto& b = o.epochs[i];
            if (a.epoch != b.epoch || a.learning_rate != b.learning_rate ||
                a.generator_loss != b.generator_loss || a.discriminator_loss != b.discriminator_loss)
                return false;
        }
        return true;
    }
};

inline nlohmann::ordered_json to_json(const TrainReport& r) {
    nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
    for (const auto& e : r.epochs)
        epochs.push_back({{"epoch", e.epoch},
                          {"learning_rate", e.learning_rate},
                          {"generator_loss", e.generator_loss},
                          {"discriminator_loss", e.discriminator_loss}});
    return {{"stop_reason", r.stop_reason},
            {"epochs_run", r.epochs_run},
            {"invert_residual", r.invert_residual},
            {"epochs", epochs}};
}

/// Raised when training aborts; carries the epochs completed so far.
class TrainingFailure : public TrainingError {
public:
    TrainingFailure(const std::string& what, TrainReport report)
        : TrainingError(what), report_(std::move(report)) {}
    const TrainReport& report() const noexcept { return report_; }

private:
    TrainReport report_;
};

struct GanModels {
    GeneratorModel generator;
    nn::ConvStack discriminator;
};

inline nn::Activation output_activation(const TrainConfig& c, const NormalizationParams& norm) {
    if (c.mode == GanMode::rgan) return nn::Sigmoid{};
    double floor = c.clip_floor;
    if (c.auto_clip_floor && norm.min_x > 0.0) {
        const double q = norm.min_x / norm.max_x;
        if (q * q > 0.0 && q * q < 1.0) floor = q * q;
    }
    return nn::ClipSigmoid{floor};
}

/// Seeded initialization. The generator is re-drawn (at most 10 draws in total)
/// until both weight matrices pass the full-rank check.
inline GanModels init_models(const TrainConfig& c, const NormalizationParams& norm, Rng& rng) {
    for (int attempt = 0; attempt < 10; ++attempt) {
        GeneratorModel g;
        g.mode = c.mode;
        g.norm = norm;
        g.act1 = nn::LeakyRelu{c.alpha};
        g.act2 = output_activation(c, norm);
        g.layer1 = nn::init_dense(c.dims, c.dims, rng);
        g.layer2 = nn::init_dense(c.dims, c.dims, rng);
        try {
            (void)check_invertible(g);
        } catch (const SingularMatrix&) {
            continue;
        }
        return {std::move(g), nn::make_discriminator(c.dims, rng)};
    }
    throw InitError("generator weights singular on 10 consecutive draws");
}

// ---------------------------------------------------------------------------
// Loss values and their gradients for one batch. The value functions use only
// forward passes and serve as the finite-difference reference.

inline double discriminator_loss_value(const nn::ConvStack& d, const std::vector<nn::Vec>& real,
                                       const std::vector<nn::Vec>& fake) {
    return nn::discriminator_loss(nn::conv_forward(d, real), nn::conv_forward(d, fake));
}

inline double generator_loss_value(const GeneratorModel& g, const nn::ConvStack& d,
                                   const std::vector<nn::Vec>& noise) {
    std::vector<nn::Vec> fake;
    for (const auto& n : noise) fake.push_back(generator_forward(g, n));
    return nn::generator_loss(nn::conv_forward(d, fake));
}

/// Accumulates dJ_D/dtheta_D into `grad`; returns J_D.
inline double discriminator_gradients(const nn::ConvStack& d, const std::vector<nn::Vec>& real,
                                      const std::vector<nn::Vec>& fake, nn::ConvGrad& grad) {
    std::vector<nn::ConvTape> rt(real.size()), ft(fake.size());
    nn::Vec pr, pf;
    for (std::size_t i = 0; i < real.size(); ++i) pr.push_back(nn::conv_forward_sample(d, real[i], &rt[i]));
    for (std::size_t i = 0; i < fake.size(); ++i) pf.push_back(nn::conv_forward_sample(d, fake[i], &ft[i]));
    const nn::Vec gr = nn::bce_gradient(pr, nn::Vec(pr.size(), 1.0));
    const nn::Vec gf = nn::bce_gradient(pf, nn::Vec(pf.size(), 0.0));
    for (std::size_t i = 0; i < real.size(); ++i) nn::conv_backward_sample(d, rt[i], 0.5 * gr[i], &grad);
    for (std::size_t i = 0; i < fake.size(); ++i) nn::conv_backward_sample(d, ft[i], 0.5 * gf[i], &grad);
    return nn::discriminator_loss(pr, pf);
}

/// Accumulates dJ_G/dtheta_G into `grad` (discriminator held fixed); returns J_G.
inline double generator_gradients(const GeneratorModel& g, const nn::ConvStack& d,
                                  const std::vector<nn::Vec>& noise, GeneratorGrad& grad) {
    std::vector<GeneratorTape> gt(noise.size());
    std::vector<nn::ConvTape> dt(noise.size());
    nn::Vec p;
    for (std::size_t i = 0; i < noise.size(); ++i) {
        const nn::Vec y = generator_forward(g, noise[i], &gt[i]);
        p.push_back(nn::conv_forward_sample(d, y, &dt[i]));
    }
    const nn::Vec gp = nn::bce_gradient(p, nn::Vec(p.size(), 1.0));
    for (std::size_t i = 0; i < noise.size(); ++i) {
        const nn::Vec gy = nn::conv_backward_sample(d, dt[i], gp[i], nullptr);
        generator_backward(g, gt[i], gy, grad);
    }
    return nn::generator_loss(p);
}

inline std::vector<nn::Vec> sample_noise(std::size_t count, std::size_t dims, Rng& rng) {
    std::vector<nn::Vec> out(count, nn::Vec(dims));
    for (auto& v : out)
        for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return out;
}

struct TrainResult {
    GeneratorModel generator;
    nn::ConvStack discriminator;
    TrainReport report;
};

/// Adversarial training on normalized groups of `dims` values. Per batch: one
/// discriminator SGD step, then one generator SGD step on the same noise.
/// Stops once the monitored epoch loss has gone `patience` epochs without a new
/// minimum, or after `max_epochs`.
inline TrainResult train(const TrainConfig& c, const NormalizationParams& norm,
                         const std::vector<nn::Vec>& groups) {
    c.validate();
    for (const auto& gr : groups)
        if (gr.size() != c.dims) throw ShapeError("training group width != model dims");
    Rng rng(c.seed);
    GanModels models = init_models(c, norm, rng);
    GeneratorModel& g = models.generator;
    nn::ConvStack& d = models.discriminator;
    TrainReport report;

    if (c.max_epochs > 0 && groups.empty()) throw BatchingError("no training groups");

    std::vector<std::size_t> order(groups.size());
    double best = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    report.stop_reason = "cap";

    for (std::size_t epoch = 0; epoch < c.max_epochs; ++epoch) {
        const double lr = c.rate_at(epoch);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        double g_sum = 0.0, d_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += c.batch_size) {
            const std::size_t end = std::min(order.size(), start + c.batch_size);
            std::vector<nn::Vec> real;
            for (std::size_t k = start; k < end; ++k) real.push_back(groups[order[k]]);
            const auto noise = sample_noise(real.size(), c.dims, rng);

            std::vector<nn::Vec> fake;
            for (const auto& n : noise) fake.push_back(generator_forward(g, n));
            nn::ConvGrad dgrad(d);
            const double dl = discriminator_gradients(d, real, fake, dgrad);

            GeneratorGrad ggrad(g);
            double gl = std::numeric_limits<double>::quiet_NaN();
            try {
                nn::sgd_step(d, dgrad, lr);
                gl = generator_gradients(g, d, noise, ggrad);
                sgd_step(g, ggrad, lr);
            } catch (const TrainingError& e) {
                throw TrainingFailure("epoch " + std::to_string(epoch) + ": " + e.what(), report);
            }
            if (!std::isfinite(dl) || !std::isfinite(gl))
                throw TrainingFailure("non-finite loss at epoch " + std::to_string(epoch), report);
            g_sum += gl;
            d_sum += dl;
            ++batches;
        }
        EpochRecord rec{epoch, lr, g_sum / static_cast<double>(batches),
                        d_sum / static_cast<double>(batches)};
        report.epochs.push_back(rec);
        report.epochs_run = epoch + 1;

        const double monitored = c.stop_on == StopOn::generator       ? rec.generator_loss
                                 : c.stop_on == StopOn::discriminator ? rec.discriminator_loss
                                                                      : rec.generator_loss + rec.discriminator_loss;
        if (monitored < best) {
            best = monitored;
            stale = 0;
        } else if (++stale >= c.patience) {
            report.stop_reason = "patience";
            break;
        }
    }

    try {
        report.invert_residual = check_invertible(g).max_residual();
    } catch (const SingularMatrix& e) {
        throw TrainingFailure(std::string("trained generator is singular: ") + e.what(), report);
    }
    return {std::move(models.generator), std::move(models.discriminator), std::move(report)};
}

/// Normalizes raw field values, groups them and trains.
inline TrainResult train_on_values(const TrainConfig& c, std::span<const double> values) {
    const auto norm = NormalizationParams::fit(values, c.dims);
    const auto batches = group_batches(normalize(values, norm), c.dims);
    return train(c, norm, batches.groups);
}

}  // namespace revgan
