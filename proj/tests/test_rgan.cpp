#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "support.hpp"

using namespace revgan;
using namespace revgan::nn;

namespace {

GeneratorModel identity_model(std::size_t dims, GanMode mode = GanMode::rgan) {
    GeneratorModel g;
    g.layer1 = DenseLayer(Matrix::identity(dims), Vec(dims, 0.0));
    g.layer2 = DenseLayer(Matrix::identity(dims), Vec(dims, 0.0));
    g.act2 = mode == GanMode::ccrgan ? Activation{ClipSigmoid{1e-20}} : Activation{Sigmoid{}};
    g.mode = mode;
    g.norm = {0.0, 1000.0, dims};
    return g;
}

TrainConfig small_config(std::size_t epochs, GanMode mode = GanMode::ccrgan) {
    auto c = TrainConfig::for_mode(mode);
    c.max_epochs = epochs;
    c.seed = 21;
    return c;
}

}  // namespace

TEST(Init, DeterministicShapesAndAlpha) {
    const auto c = small_config(0);
    const NormalizationParams norm{1.0, 100.0, 64};
    Rng a(5), b(5);
    const auto m1 = init_models(c, norm, a), m2 = init_models(c, norm, b);
    EXPECT_EQ(m1.generator, m2.generator);
    EXPECT_EQ(m1.discriminator, m2.discriminator);
    EXPECT_EQ(m1.generator.layer1.weights.rows(), 64u);
    EXPECT_EQ(m1.generator.layer1.weights.cols(), 64u);
    EXPECT_EQ(m1.generator.layer2.weights.rows(), 64u);
    EXPECT_EQ(m1.generator.act1.alpha, 0.3);
}

TEST(Config, DefaultsAndSchedule) {
    const auto r = TrainConfig::for_mode(GanMode::rgan);
    EXPECT_EQ(r.patience, 5u);
    EXPECT_EQ(r.batch_size, 10u);
    EXPECT_EQ(r.dims, 64u);
    EXPECT_EQ(r.learning_rate, 1e-3);
    EXPECT_EQ(r.rate_at(7), 1e-3);  // no decay for R-GAN
    const auto c = TrainConfig::for_mode(GanMode::ccrgan);
    EXPECT_EQ(c.patience, 10u);
    EXPECT_DOUBLE_EQ(c.rate_at(4), 8.1e-4);
    EXPECT_DOUBLE_EQ(c.rate_at(5), 8.1e-4);
    EXPECT_DOUBLE_EQ(c.rate_at(1), 1e-3);
    auto bad = c;
    bad.patience = 0;
    EXPECT_THROW(bad.validate(), DomainError);
    bad = c;
    bad.learning_rate = 0.0;
    EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Config, AutoClipFloor) {
    auto c = small_config(0);
    c.auto_clip_floor = true;
    const auto act = output_activation(c, {10.0, 1e6, 64});
    EXPECT_DOUBLE_EQ(std::get<ClipSigmoid>(act).floor, 1e-10);
    EXPECT_TRUE(std::holds_alternative<Sigmoid>(output_activation(small_config(0, GanMode::rgan), {10.0, 1e6, 64})));
}

TEST(Train, ZeroEpochsReturnsInitialModel) {
    const auto ds = testing_support::synthetic_dataset();
    const auto r = train_on_values(small_config(0), as_reals(ds));
    EXPECT_EQ(r.report.stop_reason, "cap");
    EXPECT_EQ(r.report.epochs_run, 0u);
    const auto norm = NormalizationParams::fit(as_reals(ds));
    Rng rng(21);
    EXPECT_EQ(r.generator, init_models(small_config(0), norm, rng).generator);
}

TEST(Train, DeterministicReportAndModel) {
    const auto ds = synthetic_log_uniform(1280, 2, 13, 6);
    const auto a = train_on_values(small_config(3), as_reals(ds));
    const auto b = train_on_values(small_config(3), as_reals(ds));
    EXPECT_EQ(a.report, b.report);
    EXPECT_EQ(model_to_string(a.generator), model_to_string(b.generator));
    ASSERT_EQ(a.report.epochs.size(), 3u);
    for (const auto& e : a.report.epochs) {
        EXPECT_TRUE(std::isfinite(e.generator_loss));
        EXPECT_TRUE(std::isfinite(e.discriminator_loss));
    }
    EXPECT_DOUBLE_EQ(a.report.epochs[2].learning_rate, 9e-4);
}

TEST(Train, PatienceStopsEarly) {
    // A huge learning rate makes losses bounce; patience 1 must stop the run.
    const auto ds = synthetic_log_uniform(640, 2, 13, 6);
    auto c = small_config(200, GanMode::rgan);
    c.patience = 1;
    c.learning_rate = 0.05;
    const auto r = train_on_values(c, as_reals(ds));
    EXPECT_EQ(r.report.stop_reason, "patience");
    EXPECT_LT(r.report.epochs_run, 200u);
}

TEST(Train, CcrganStaysFiniteOverManyDecades) {
    const auto ds = synthetic_log_uniform(1280, 0, 15, 9);
    const auto r = train_on_values(small_config(5), as_reals(ds));
    for (const auto& e : r.report.epochs) EXPECT_TRUE(std::isfinite(e.generator_loss));
}

TEST(Generate, OutputRangeAndDeterminism) {
    const auto& tr = testing_support::synthetic_model();
    const ReversibleGenerator gen(tr.generator);
    Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        Vec x(64);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        const Vec a = gen.generate(x);
        EXPECT_EQ(a, gen.generate(x));
        for (double v : a) {
            EXPECT_GE(v, tr.generator.norm.min_x);
            EXPECT_LE(v, tr.generator.norm.max_x);
        }
    }
    EXPECT_THROW(gen.generate(Vec(63, 0.0)), ShapeError);
    EXPECT_THROW(gen.generate(Vec(64, 1.5)), DomainError);
}

TEST(Generate, InvertUnroundedIsExact) {
    const ReversibleGenerator gen(testing_support::synthetic_model().generator);
    Rng rng(12);
    double worst = 0.0;
    for (int t = 0; t < 2000; ++t) {
        Vec x(64);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        const Vec back = gen.invert(std::span<const double>(gen.generate(x)));
        for (std::size_t i = 0; i < 64; ++i) worst = std::max(worst, std::fabs(back[i] - x[i]));
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(Generate, InjectiveOnRandomPairs) {
    const ReversibleGenerator gen(testing_support::synthetic_model().generator);
    Rng rng(13);
    for (int t = 0; t < 200; ++t) {
        Vec x(64), y(64);
        for (std::size_t i = 0; i < 64; ++i) {
            x[i] = rng.uniform(-1.0, 1.0);
            y[i] = x[i];
        }
        y[rng.below(64)] += 1e-3 * (x[0] > 0 ? -1 : 1);
        bool clipped = false;
        for (double& v : y) {
            if (v < -1.0 || v > 1.0) clipped = true;
        }
        if (clipped) continue;
        EXPECT_NE(gen.generate(x), gen.generate(y));
    }
}

TEST(Generate, FlatSegmentIsReported) {
    auto g = identity_model(2, GanMode::ccrgan);
    g.layer2.biases = {-200.0, 0.0};
    const ReversibleGenerator gen(g);
    EXPECT_THROW(gen.generate(Vec{0.0, 0.0}), FlatSegmentOutput);
    // The training path never throws on it.
    EXPECT_NO_THROW(generator_forward(g, Vec{0.0, 0.0}));
}

TEST(Invert, ToyModelAndErrors) {
    const auto g = identity_model(2);
    const ReversibleGenerator gen(g);
    const Vec x{0.25, -0.5};
    const Vec a = gen.generate(x);
    const Vec back = gen.invert(std::span<const double>(a));
    EXPECT_NEAR(back[0], 0.25, 1e-12);
    EXPECT_NEAR(back[1], -0.5, 1e-12);
    EXPECT_THROW(gen.invert(std::span<const double>(Vec{-1.0, 500.0})), RangeError);
    EXPECT_THROW(gen.invert(std::span<const double>(Vec{0.0, 500.0})), DomainError);
    EXPECT_THROW(gen.invert(std::span<const double>(Vec{1000.0, 500.0})), DomainError);
    auto cg = identity_model(2, GanMode::ccrgan);
    cg.act2 = ClipSigmoid{1e-3};
    EXPECT_THROW(ReversibleGenerator(cg).invert(std::span<const double>(Vec{0.5, 500.0})), NotInvertibleAtPoint);
}

TEST(CheckInvertible, Residuals) {
    EXPECT_EQ(check_invertible(identity_model(8)).max_residual(), 0.0);
    EXPECT_LE(check_invertible(testing_support::synthetic_model().generator).max_residual(), 1e-10);
    auto g = identity_model(3);
    g.layer1.weights = Matrix::from_rows({{1, 2, 3}, {1, 2, 3}, {0, 0, 1}});
    EXPECT_THROW(check_invertible(g), SingularMatrix);
}

TEST(Model, ValidateRejectsMismatchedActivation) {
    auto g = identity_model(2, GanMode::rgan);
    g.act2 = ClipSigmoid{1e-20};
    EXPECT_THROW(g.validate(), DomainError);
    auto h = identity_model(2);
    h.layer2 = DenseLayer(3, 2);
    EXPECT_THROW(h.validate(), ShapeError);
}

TEST(ModelIo, SaveLoadIsBitExact) {
    const auto& g = testing_support::synthetic_model().generator;
    const auto path = (testing_support::scratch_dir("model") / "g.json").string();
    save_model(g, path);
    const auto back = load_model(path);
    EXPECT_EQ(back, g);
    Vec x(64, 0.125);
    EXPECT_EQ(ReversibleGenerator(back).generate(x), ReversibleGenerator(g).generate(x));
    EXPECT_THROW(load_model(path, 32), ShapeError);
}

TEST(ModelIo, CorruptAndVersionErrors) {
    const auto dir = testing_support::scratch_dir("model-bad");
    const std::string text = model_to_string(identity_model(4));
    const auto trunc = (dir / "t.json").string();
    std::ofstream(trunc) << text.substr(0, text.size() / 2);
    EXPECT_THROW(load_model(trunc), FormatError);
    auto j = model_to_json(identity_model(4));
    j["version"] = 99;
    EXPECT_THROW(model_from_json(j), FormatError);
    auto k = model_to_json(identity_model(4));
    k["layer1"]["weights"][0] = "00";
    EXPECT_THROW(model_from_json(k), FormatError);
    EXPECT_THROW(load_model((dir / "missing.json").string()), FormatError);
}

TEST(Gradients, FiniteDifferenceSmallPair) {
    const auto r = gradcheck::run(8, 77);
    EXPECT_GT(r.checked, 0u);
    EXPECT_EQ(r.failures, 0u) << "worst relative error " << r.worst;
}
