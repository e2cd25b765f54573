#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fog/nn/adam.hpp"
#include "fog/nn/model.hpp"
#include "fog/nn/model_io.hpp"
#include "fog/nn/train.hpp"
#include "support.hpp"

using namespace fog;
using namespace fog::nn;

namespace {

Model tiny_model(std::size_t steps, std::uint64_t seed, double dropout = 0.0) {
  std::vector<LayerSpec> specs{LayerSpec::conv(2, 3), LayerSpec::maxpool(2), LayerSpec::conv(3, 2, Activation::None)};
  if (dropout > 0.0) specs.push_back(LayerSpec::dropout(dropout));
  specs.push_back(LayerSpec::dense(2));
  return build_model({steps, 3}, specs, seed);
}

}  // namespace

TEST(Layers, IdentityConvolution) {
  Model m{{4, 2}, {}};
  m.layers.emplace_back(Conv1D{2, 2, 1, Activation::ReLU, {1, 0, 0, 1}, {0, 0}});
  const std::vector<double> x{1, 2, 3, 4, 0, 5, 6, 7};
  EXPECT_EQ(logits(m, x), x);
}

TEST(Layers, HandEvaluatedConvolution) {
  Model m{{3, 1}, {}};
  m.layers.emplace_back(Conv1D{1, 1, 2, Activation::None, {1, 1}, {0}});
  EXPECT_EQ(logits(m, std::vector<double>{1, 2, 3}), (std::vector<double>{3, 5}));
}

TEST(Layers, MaxPool) {
  Model m{{4, 1}, {}};
  m.layers.emplace_back(MaxPool1D{2});
  EXPECT_EQ(logits(m, std::vector<double>{1, 3, 2, 5}), (std::vector<double>{3, 5}));
}

TEST(Layers, SoftmaxOfEqualLogits) {
  std::array<double, 2> p{};
  softmax(std::array<double, 2>{0.0, 0.0}, p);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  softmax(std::array<double, 2>{1000.0, 0.0}, p);
  EXPECT_TRUE(std::isfinite(p[0]));
  EXPECT_NEAR(p[0], 1.0, 1e-12);
}

TEST(Layers, DefaultArchitectureShapes) {
  const auto m = build_model({129, 3}, default_architecture(), 1);
  const auto shapes = layer_shapes(m);
  ASSERT_EQ(shapes.size(), 8u);
  EXPECT_EQ(shapes[0], (Shape{125, 16}));
  EXPECT_EQ(shapes[1], (Shape{62, 16}));
  EXPECT_EQ(shapes[2], (Shape{58, 32}));
  EXPECT_EQ(shapes[3], (Shape{29, 32}));
  EXPECT_EQ(shapes[4], (Shape{27, 32}));
  EXPECT_EQ(shapes[5], (Shape{13, 32}));
  EXPECT_EQ(output_size(m), 2u);
  // 5*3*16+16 + 5*16*32+32 + 3*32*32+32 + 416*2+2
  EXPECT_EQ(parameter_count(m), 256u + 2592u + 3104u + 834u);
}

TEST(Layers, ShapeMismatchDetected) {
  Model m{{4, 1}, {}};
  m.layers.emplace_back(Conv1D{1, 1, 5, Activation::None, {1, 1, 1, 1, 1}, {0}});
  EXPECT_THROW(layer_shapes(m), Error);
  const auto good = tiny_model(8, 1);
  EXPECT_THROW(forward(good, Tensor({1, 9, 3}), false), Error);
}

TEST(Loss, AnalyticValues) {
  const Tensor half({1, 2}, {0.5, 0.5});
  const std::vector<std::uint8_t> one{1};
  EXPECT_NEAR(loss(half, one, {1, 1}), std::numbers::ln2, 1e-12);
  EXPECT_LE(loss(Tensor({1, 2}, {0.0, 1.0}), one, {1, 1}), 1e-11);
  EXPECT_NEAR(loss(Tensor({1, 2}, {1.0, 0.0}), one, {1, 1}), -std::log(kProbClamp), 1e-9);
}

TEST(Loss, LinearInClassWeight) {
  const Tensor probs({3, 2}, {0.3, 0.7, 0.6, 0.4, 0.1, 0.9});
  const std::vector<std::uint8_t> ones{1, 1, 1};
  EXPECT_NEAR(loss(probs, ones, {1.0, 2.0}), 2.0 * loss(probs, ones, {1.0, 1.0}), 1e-12);
}

TEST(Loss, WeightedEqualsBalancedDuplication) {
  // Weights (2, 1) on one example per class equal an unweighted batch that
  // holds the class-0 example twice. Compare summed, not mean, losses.
  const Tensor pair({2, 2}, {0.8, 0.2, 0.35, 0.65});
  const std::vector<std::uint8_t> labels{0, 1};
  const double weighted = loss(pair, labels, {2.0, 1.0}) * 2.0;
  const Tensor dup({3, 2}, {0.8, 0.2, 0.8, 0.2, 0.35, 0.65});
  const std::vector<std::uint8_t> dup_labels{0, 0, 1};
  EXPECT_NEAR(weighted, loss(dup, dup_labels, {1.0, 1.0}) * 3.0, 1e-12);
}

TEST(Gradients, LogitGradientIdentity) {
  Model m{{1, 2}, {}};
  m.layers.emplace_back(Dense{2, 2, Activation::None, {1, 0, 0, 1}, {0, 0}});
  const Tensor batch({2, 1, 2}, {0.3, -0.2, 1.0, 0.5});
  const std::vector<std::uint8_t> labels{1, 0};
  const std::array<double, 2> w{0.7, 1.9};
  const auto fwd = forward(m, batch, false);
  const auto g = backward(m, fwd, labels, w);
  // bias gradient = sum_b (p_b - onehot_b) * w_yb / B
  for (std::size_t k = 0; k < 2; ++k) {
    double expected = 0.0;
    for (std::size_t b = 0; b < 2; ++b) {
      expected += (fwd.probs.row(b)[k] - (labels[b] == k ? 1.0 : 0.0)) * w[labels[b]] / 2.0;
    }
    EXPECT_NEAR(g[1][k], expected, 1e-14);
  }
}

TEST(Gradients, MatchFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto model = tiny_model(8, seed);
    Rng rng(seed + 100);
    Tensor batch({4, 8, 3});
    for (auto& v : batch.data()) v = rng.normal();
    const std::vector<std::uint8_t> labels{0, 1, 1, 0};
    const auto r = fixtures::finite_difference_check(model, batch, labels, {0.8, 1.3});
    EXPECT_LT(r.max_rel_error, 1e-4) << "seed " << seed;
    EXPECT_GT(r.checked, r.skipped);
  }
}

TEST(Gradients, DroppedUnitsGetNoGradient) {
  Model m{{1, 4}, {}};
  m.layers.emplace_back(Dense{4, 4, Activation::None, std::vector<double>(16, 0.25), {0, 0, 0, 0}});
  m.layers.emplace_back(Dropout{0.5});
  m.layers.emplace_back(Dense{4, 2, Activation::None, {0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8}, {0, 0}});
  const Tensor batch({1, 1, 4}, {1.0, 2.0, 3.0, 4.0});
  const std::vector<std::uint8_t> labels{1};
  const auto fwd = forward(m, batch, true, 3);
  const auto& keep = fwd.cache[0].keep[1];
  ASSERT_EQ(keep.size(), 4u);
  ASSERT_TRUE(std::find(keep.begin(), keep.end(), 0) != keep.end()) << "seed drops nothing";
  const auto g = backward(m, fwd, labels, {1, 1});
  // first dense bias gradient (index 1) is zero exactly where the unit was dropped
  for (std::size_t j = 0; j < 4; ++j) {
    if (!keep[j]) {
      EXPECT_EQ(g[1][j], 0.0);
      for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(g[2][j * 2 + i], 0.0);
    } else {
      EXPECT_NE(g[1][j], 0.0);
    }
  }
}

TEST(Gradients, DropoutInactiveAtInference) {
  const auto m = tiny_model(8, 4, 0.5);
  Rng rng(1);
  std::vector<double> x(24);
  for (auto& v : x) v = rng.normal();
  const auto plain = logits(m, x);
  Tensor batch({1, 8, 3}, x);
  const auto eval = forward(m, batch, false, 99);
  std::array<double, 2> p{};
  softmax(plain, p);
  EXPECT_DOUBLE_EQ(eval.probs.row(0)[0], p[0]);
}

TEST(Adam, FirstStepIsSignTimesLearningRate) {
  std::vector<double> p{1.0, 1.0, 1.0, 1.0}, m(4), v(4);
  const std::vector<double> g{1e-3, -0.5, 20.0, -3e-3};
  adam_update(p, g, m, v, 1, 0.01, {});
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(p[i], 1.0 - 0.01 * (g[i] > 0 ? 1.0 : -1.0), 1e-6);
  }
}

TEST(Adam, ZeroGradientIsFixedPoint) {
  std::vector<double> p{0.3, -2.0}, m(2), v(2);
  const std::vector<double> g{0.0, 0.0};
  for (std::size_t t = 1; t <= 5; ++t) adam_update(p, g, m, v, t, 0.1, {});
  EXPECT_EQ(p, (std::vector<double>{0.3, -2.0}));
}

TEST(Adam, IdenticalHistoriesGetIdenticalUpdates) {
  std::vector<double> p{0.5, 0.5}, m(2), v(2);
  Rng rng(2);
  for (std::size_t t = 1; t <= 20; ++t) {
    const double g = rng.normal();
    const std::vector<double> grads{g, g};
    adam_update(p, grads, m, v, t, 0.01, {});
    ASSERT_EQ(p[0], p[1]);
  }
}

TEST(Adam, MatchesReferenceRecurrence) {
  std::vector<double> p{2.0}, m(1), v(1);
  double rp = 2.0, rm = 0.0, rv = 0.0;
  for (std::size_t t = 1; t <= 10; ++t) {
    const double g = 2.0 * rp;  // d/dp of p^2
    const std::vector<double> grads{g};
    adam_update(p, grads, m, v, t, 0.1, {});
    rm = 0.9 * rm + 0.1 * g;
    rv = 0.999 * rv + 0.001 * g * g;
    rp -= 0.1 * (rm / (1 - std::pow(0.9, t))) / (std::sqrt(rv / (1 - std::pow(0.999, t))) + 1e-8);
    EXPECT_NEAR(p[0], rp, 1e-12);
  }
  EXPECT_LT(std::abs(p[0]), 2.0);
}

TEST(EarlyStop, PatienceExample) {
  EarlyStopping s(2);
  const std::vector<double> losses{1.0, 0.9, 0.95, 0.97};
  std::vector<bool> stops;
  for (std::size_t e = 0; e < losses.size(); ++e) stops.push_back(s.update(e + 1, losses[e]));
  EXPECT_EQ(stops, (std::vector<bool>{false, false, false, true}));
  EXPECT_EQ(s.best_epoch(), 2u);
  EXPECT_DOUBLE_EQ(s.best_loss(), 0.9);
}

TEST(Train, ZeroEpochsReturnsInitialModel) {
  const auto set = fixtures::separable_windows(4, 8, 1);
  const auto m = tiny_model(8, 3);
  TrainConfig cfg;
  cfg.max_epochs = 0;
  const auto r = train(m, set, {}, cfg);
  EXPECT_EQ(r.model.layers, m.layers);
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.best_epoch, 0u);
}

TEST(Train, ReturnsBestEpochWeights) {
  const auto set = fixtures::separable_windows(16, 8, 2);
  const auto val = fixtures::shifted_windows(8, 8, 8, 0.1, 3);  // unrelated to training signal
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.patience = 3;
  cfg.learning_rate = 0.05;
  const auto r = train(tiny_model(8, 5), set, val, cfg);
  ASSERT_FALSE(r.history.empty());
  const auto best = std::min_element(r.history.begin(), r.history.end(),
                                     [](const auto& a, const auto& b) { return a.val_loss < b.val_loss; });
  EXPECT_EQ(r.best_epoch, best->epoch);
  EXPECT_NEAR(evaluate(r.model, val, r.class_weights).loss, best->val_loss, 1e-12);
}

TEST(Train, OverfitsSeparableWindows) {
  const auto set = fixtures::separable_windows(16, 32, 42);
  TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.patience = 200;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 8;
  const auto m = build_model({32, 3}, {LayerSpec::conv(4, 5), LayerSpec::maxpool(2), LayerSpec::dense(2)}, 42);
  const auto r = train(m, set, {}, cfg);
  EXPECT_DOUBLE_EQ(evaluate(r.model, set).accuracy_overall, 1.0);
}

TEST(Train, DeterministicForSeed) {
  const auto set = fixtures::separable_windows(8, 8, 6);
  TrainConfig cfg;
  cfg.max_epochs = 5;
  const auto a = train(tiny_model(8, 1, 0.3), set, {}, cfg);
  const auto b = train(tiny_model(8, 1, 0.3), set, {}, cfg);
  EXPECT_EQ(a.model.layers, b.model.layers);
}

TEST(ClassWeights, Formula) {
  const auto w = class_weights_from(fixtures::shifted_windows(75, 25, 2, 0.0, 1));
  EXPECT_NEAR(w[0], 0.6667, 1e-4);
  EXPECT_NEAR(w[1], 2.0, 1e-12);
  const auto b = class_weights_from(fixtures::shifted_windows(50, 50, 2, 0.0, 1));
  EXPECT_EQ(b, (std::array<double, 2>{1.0, 1.0}));
  EXPECT_THROW(class_weights_from(fixtures::shifted_windows(5, 0, 2, 0.0, 1)), Error);
}

TEST(Metrics, EvaluateExample) {
  const std::vector<std::uint8_t> pred{1, 0, 1, 0}, truth{1, 0, 0, 0};
  const auto r = report_from_predictions(truth, pred);
  EXPECT_EQ(r.confusion.tn, 2u);
  EXPECT_EQ(r.confusion.fp, 1u);
  EXPECT_EQ(r.confusion.fn, 0u);
  EXPECT_EQ(r.confusion.tp, 1u);
  EXPECT_DOUBLE_EQ(r.accuracy_overall, 0.75);
  EXPECT_DOUBLE_EQ(r.accuracy_per_class[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.accuracy_per_class[1], 1.0);
}

TEST(Metrics, AllCorrect) {
  const std::vector<std::uint8_t> v{0, 1, 1, 0, 1};
  const auto r = report_from_predictions(v, v);
  EXPECT_EQ(r.confusion.fp + r.confusion.fn, 0u);
  EXPECT_DOUBLE_EQ(r.accuracy_overall, 1.0);
}

TEST(ModelFile, RoundTripAtFloat32Precision) {
  const auto m = build_model({129, 3}, default_architecture(), 8);
  FloatModelFile f{m, {{1, 2, 3}, {4, 5, 6}}};
  const auto back = decode_float_model(encode_float_model(f));
  EXPECT_EQ(back.norm, f.norm);
  ASSERT_EQ(back.model.layers.size(), m.layers.size());
  EXPECT_EQ(encode_float_model(back), encode_float_model(f));
  const auto& c0 = std::get<Conv1D>(m.layers[0]);
  const auto& c1 = std::get<Conv1D>(back.model.layers[0]);
  for (std::size_t i = 0; i < c0.weight.size(); ++i) {
    EXPECT_EQ(c1.weight[i], static_cast<double>(static_cast<float>(c0.weight[i])));
  }
  EXPECT_DOUBLE_EQ(std::get<Dropout>(back.model.layers[6]).rate, static_cast<float>(0.3));
}

TEST(ModelFile, CorruptionDetected) {
  auto bytes = encode_float_model({tiny_model(8, 1), {}});
  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  EXPECT_THROW(decode_float_model(truncated), Error);
  bytes[4] = 9;
  try {
    decode_float_model(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BadVersion);
  }
}
