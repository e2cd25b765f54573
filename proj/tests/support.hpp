#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fog/fog.hpp"

namespace fog::fixtures {

inline ingest::CleanSeries series_from_annotations(const std::vector<std::uint8_t>& ann) {
  ingest::CleanSeries s{"S01", "R01", 0, {}};
  for (std::size_t i = 0; i < ann.size(); ++i) {
    const auto v = static_cast<std::int32_t>(i);
    s.samples.push_back({static_cast<std::int64_t>(i) * 15, {v, 2 * v, -v}, ann[i]});
  }
  return s;
}

// Class 0: zeros plus N(0, 0.01) noise. Class 1: unit sine on every axis.
inline windows::WindowSet separable_windows(std::size_t per_class, std::size_t steps, std::uint64_t seed) {
  Rng rng(seed);
  windows::WindowSet set;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    windows::Window w;
    w.label = static_cast<std::uint8_t>(i % 2);
    w.values.resize(steps * windows::kAxes);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t a = 0; a < windows::kAxes; ++a) {
        w.values[t * windows::kAxes + a] =
            w.label == 1 ? std::sin(phase + 0.5 * static_cast<double>(t) + static_cast<double>(a))
                         : rng.normal(0.0, 0.01);
      }
    }
    w.origin.start = static_cast<std::uint32_t>(i);
    set.push_back(std::move(w));
  }
  return set;
}

// Gaussian windows whose mean is shifted by `shift` for class 1.
inline windows::WindowSet shifted_windows(std::size_t n_nofog, std::size_t n_fog, std::size_t steps,
                                          double shift, std::uint64_t seed) {
  Rng rng(seed);
  windows::WindowSet set;
  for (std::size_t i = 0; i < n_nofog + n_fog; ++i) {
    windows::Window w;
    w.label = i < n_nofog ? 0 : 1;
    w.values.resize(steps * windows::kAxes);
    for (auto& v : w.values) v = rng.normal(w.label == 1 ? shift : 0.0, 1.0);
    w.origin.start = static_cast<std::uint32_t>(i);
    set.push_back(std::move(w));
  }
  return set;
}

// Walking-like (slow sine) vs freeze-like (fast, smaller tremor) windows in mg.
inline windows::WindowSet gait_windows(std::size_t n, std::size_t steps, std::uint64_t seed) {
  Rng rng(seed);
  windows::WindowSet set;
  for (std::size_t i = 0; i < n; ++i) {
    windows::Window w;
    w.label = rng.uniform() < 0.4 ? 1 : 0;
    const double freq = w.label ? rng.uniform(3.0, 7.0) : rng.uniform(0.8, 1.2);
    const double amp = w.label ? rng.uniform(100.0, 220.0) : rng.uniform(250.0, 400.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    w.values.resize(steps * windows::kAxes);
    for (std::size_t t = 0; t < steps; ++t) {
      const double x = phase + 2.0 * std::numbers::pi * freq * static_cast<double>(t) / 64.0;
      w.values[t * 3 + 0] = amp * std::sin(x) + rng.normal(0.0, 40.0);
      w.values[t * 3 + 1] = 1000.0 + 0.6 * amp * std::cos(x) + rng.normal(0.0, 40.0);
      w.values[t * 3 + 2] = 0.4 * amp * std::sin(2 * x + 0.7) + rng.normal(0.0, 40.0);
    }
    w.origin.start = static_cast<std::uint32_t>(i);
    set.push_back(std::move(w));
  }
  return set;
}

inline std::vector<std::uint8_t> labels_of(const windows::WindowSet& set) {
  std::vector<std::uint8_t> out;
  for (const auto& w : set) out.push_back(w.label);
  return out;
}

inline nn::Tensor batch_of(const windows::WindowSet& set, nn::Shape input) {
  std::vector<std::size_t> idx(set.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return nn::make_batch(set, idx, input);
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // parameters whose perturbation crossed a kink
};

// Central finite differences on every parameter. A parameter is skipped when
// the ±h perturbation changes any ReLU sign or pooling argmax, since the loss
// is not differentiable there.
inline GradCheck finite_difference_check(nn::Model model, const nn::Tensor& batch,
                                         std::span<const std::uint8_t> labels,
                                         std::array<double, 2> weights, double h = 1e-5) {
  auto fingerprint = [&](const nn::Model& m) {
    const auto fwd = nn::forward(m, batch, false);
    std::vector<std::uint32_t> fp;
    for (const auto& c : fwd.cache) {
      for (const auto& a : c.argmax) fp.insert(fp.end(), a.begin(), a.end());
      for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const auto* conv = std::get_if<nn::Conv1D>(&m.layers[i]);
        const auto* dense = std::get_if<nn::Dense>(&m.layers[i]);
        const bool relu = (conv && conv->activation == nn::Activation::ReLU) ||
                          (dense && dense->activation == nn::Activation::ReLU);
        if (!relu) continue;
        for (double v : c.acts[i + 1]) fp.push_back(v > 0.0 ? 1u : 0u);
      }
    }
    return std::pair(nn::loss(fwd.probs, labels, weights), fp);
  };
  const auto fwd = nn::forward(model, batch, false);
  const auto grads = nn::backward(model, fwd, labels, weights);
  const auto base = fingerprint(model).second;

  GradCheck out;
  auto params = nn::parameters(model);
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const double orig = params[p][i];
      params[p][i] = orig + h;
      const auto [lp, fp_plus] = fingerprint(model);
      params[p][i] = orig - h;
      const auto [lm, fp_minus] = fingerprint(model);
      params[p][i] = orig;
      if (fp_plus != base || fp_minus != base) {
        ++out.skipped;
        continue;
      }
      const double numeric = (lp - lm) / (2.0 * h);
      const double analytic = grads[p][i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic - numeric) / denom);
      ++out.checked;
    }
  }
  return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fog_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Trains the default architecture briefly on gait-like windows and returns
// the float model (dropout intact), its stats and the standardized sets.
struct TrainedFixture {
  nn::Model model;
  windows::NormStats norm;
  windows::WindowSet train_raw, test_raw, train, test;
};

inline TrainedFixture trained_default_model(std::size_t n_train, std::size_t n_test, std::size_t epochs,
                                            std::uint64_t seed = 42) {
  TrainedFixture f;
  f.train_raw = gait_windows(n_train, windows::kWindowLen, seed);
  f.test_raw = gait_windows(n_test, windows::kWindowLen, seed + 1000);
  f.norm = windows::fit_stats(f.train_raw);
  f.train = windows::apply_stats(f.train_raw, f.norm);
  f.test = windows::apply_stats(f.test_raw, f.norm);
  nn::TrainConfig cfg;
  cfg.max_epochs = epochs;
  cfg.patience = epochs;
  cfg.seed = seed;
  auto model = nn::build_model({windows::kWindowLen, windows::kAxes}, nn::default_architecture(), seed);
  f.model = nn::train(std::move(model), f.train, {}, cfg).model;
  return f;
}

// Small untrained packed model for protocol tests: conv(4,5) -> pool(4)
// -> dense(2), calibrated on standardized gait windows.
inline quant::PackedModel small_packed_model(std::uint64_t seed = 5) {
  const auto raw = gait_windows(40, windows::kWindowLen, seed);
  const auto norm = windows::fit_stats(raw);
  const auto model = nn::build_model(
      {windows::kWindowLen, windows::kAxes},
      {nn::LayerSpec::conv(4, 5), nn::LayerSpec::maxpool(4), nn::LayerSpec::dense(2)}, seed);
  const auto z = windows::apply_stats(raw, norm);
  return quant::pack(model, quant::calibrate(model, z), norm);
}

// A packed model of exactly 298,600 bytes: dense 387->752 (ReLU), 226
// identity max-pools, dense 752->2. Size = 126 + 393*752 + 13*226.
inline quant::PackedModel reference_size_model() {
  std::vector<nn::LayerSpec> specs{nn::LayerSpec::dense(752, nn::Activation::ReLU)};
  for (int i = 0; i < 226; ++i) specs.push_back(nn::LayerSpec::maxpool(1));
  specs.push_back(nn::LayerSpec::dense(2));
  const auto model = nn::build_model({windows::kWindowLen, windows::kAxes}, specs, 3);
  const auto raw = gait_windows(8, windows::kWindowLen, 3);
  const auto norm = windows::fit_stats(raw);
  return quant::pack(model, quant::calibrate(model, windows::apply_stats(raw, norm)), norm);
}

}  // namespace fog::fixtures
