#pragma once

// Synthetic Daphnet-style recordings for demos and tests when the real
// dataset is not available. Sampled at 64 Hz; alternates standing
// (annotation 0), walking (1) and freezing (2) episodes. Walking is a
// 0.8-1.2 Hz gait oscillation with a harmonic; freezing is a 3-7 Hz
// trembling of smaller amplitude.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "fog/ingest.hpp"
#include "fog/rng.hpp"

namespace fog::synth {

struct Options {
  double seconds = 300.0;
  double sample_rate_hz = 64.0;
  // Probability that a walking bout is followed by a freeze.
  double freeze_probability = 0.35;
  double noise_mg = 40.0;
};

inline ingest::Recording generate_recording(const std::string& subject, const std::string& trial,
                                            std::uint64_t seed, const Options& opt = {}) {
  ingest::Recording rec{subject, trial, {}, {}};
  Rng rng(seed);
  const auto total = static_cast<std::size_t>(opt.seconds * opt.sample_rate_hz);
  const double dt = 1.0 / opt.sample_rate_hz;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  std::size_t i = 0;
  std::uint8_t state = ingest::kOutOfExperiment;
  double phase = rng.uniform(0.0, two_pi);
  while (i < total) {
    double duration = 0.0, freq = 0.0, amp = 0.0;
    switch (state) {
      case ingest::kOutOfExperiment: duration = rng.uniform(4.0, 12.0); break;
      case ingest::kNoFreeze:
        duration = rng.uniform(10.0, 40.0);
        freq = rng.uniform(0.8, 1.2);
        amp = rng.uniform(250.0, 400.0);
        break;
      default:
        duration = rng.uniform(3.0, 14.0);
        freq = rng.uniform(3.0, 7.0);
        amp = rng.uniform(100.0, 220.0);
        break;
    }
    const auto n = static_cast<std::size_t>(duration * opt.sample_rate_hz);
    for (std::size_t k = 0; k < n && i < total; ++k, ++i) {
      phase += two_pi * freq * dt;
      const double s1 = std::sin(phase), s2 = std::sin(2.0 * phase + 0.7), c1 = std::cos(phase);
      const double walk = state == ingest::kNoFreeze ? 1.0 : 0.0;
      const double tremble = state == ingest::kFreeze ? 1.0 : 0.0;
      auto noise = [&] { return rng.normal(0.0, opt.noise_mg); };
      auto mg = [](double v) { return static_cast<std::int32_t>(std::lround(v)); };

      ingest::RawRecord r;
      r.time_ms = static_cast<std::int64_t>(std::llround(static_cast<double>(i) * 1000.0 / opt.sample_rate_hz));
      const double thigh_x = walk * (amp * s1 + 0.3 * amp * s2) + tremble * amp * s1;
      const double thigh_y = 1000.0 + walk * 0.6 * amp * c1 + tremble * 0.5 * amp * c1;
      const double thigh_z = walk * 0.4 * amp * s2 + tremble * 0.3 * amp * s2;
      r.thigh = {mg(thigh_x + noise()), mg(thigh_y + noise()), mg(thigh_z + noise())};
      r.ankle = {mg(1.6 * thigh_x + noise()), mg(950.0 + 1.4 * (thigh_y - 1000.0) + noise()),
                 mg(1.2 * thigh_z + noise())};
      r.trunk = {mg(0.3 * thigh_x + noise()), mg(980.0 + 0.3 * (thigh_y - 1000.0) + noise()),
                 mg(0.2 * thigh_z + noise())};
      r.annotation = state;
      rec.records.push_back(r);
    }
    switch (state) {
      case ingest::kOutOfExperiment: state = ingest::kNoFreeze; break;
      case ingest::kNoFreeze:
        state = rng.uniform() < opt.freeze_probability ? ingest::kFreeze
                : rng.uniform() < 0.3                  ? ingest::kOutOfExperiment
                                                       : ingest::kNoFreeze;
        break;
      default: state = ingest::kNoFreeze; break;
    }
  }
  return rec;
}

}  // namespace fog::synth
