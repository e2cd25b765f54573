// Acceptance runner: one PASS/FAIL/SKIP line per criterion, exit status 1 if
// any criterion fails. Criterion 10 runs only when FOG_DAPHNET_DIR points at
// the Daphnet dataset directory (S01R01.txt ...).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "support.hpp"

using namespace fog;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum class Kind { Pass, Fail, Skip } kind = Kind::Fail;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Kind::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Kind::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Kind::Skip, std::move(d)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// ---- 1 ----
Outcome windowing_oracle() {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = rng.index(5001);
    std::size_t brute = 0;
    for (std::size_t s = 0; s + 129 <= n; ++s) brute += s % 64 == 0;
    const auto got = windows::segment(fixtures::series_from_annotations(std::vector<std::uint8_t>(n, 1)), 129, 64);
    if (got.size() != brute) return fail(fmt("N=%zu: %zu windows, expected %zu", n, got.size(), brute));
    for (std::size_t k = 0; k < got.size(); ++k) {
      if (got[k].origin.start != 64 * k) return fail(fmt("N=%zu: window %zu starts at %u", n, k, got[k].origin.start));
    }
  }
  return pass("1000 lengths match brute-force start enumeration");
}

// ---- 2 ----
Outcome gradient_check() {
  double worst = 0.0;
  std::size_t checked = 0, skipped = 0;
  for (std::uint64_t m = 0; m < 20; ++m) {
    Rng rng(mix_seed(2, m));
    const std::size_t steps = 8 + rng.index(5);
    std::vector<nn::LayerSpec> specs{nn::LayerSpec::conv(1 + rng.index(3), 2 + rng.index(2))};
    if (rng.uniform() < 0.5) specs.push_back(nn::LayerSpec::maxpool(2));
    specs.push_back(nn::LayerSpec::conv(1 + rng.index(3), 2, rng.uniform() < 0.5 ? nn::Activation::ReLU : nn::Activation::None));
    if (rng.uniform() < 0.5) specs.push_back(nn::LayerSpec::dense(3, nn::Activation::ReLU));
    specs.push_back(nn::LayerSpec::dense(2));
    const auto model = nn::build_model({steps, 3}, specs, mix_seed(3, m));
    nn::Tensor batch({3, steps, 3});
    for (auto& v : batch.data()) v = rng.normal();
    const std::vector<std::uint8_t> labels{0, 1, static_cast<std::uint8_t>(rng.index(2))};
    const std::array<double, 2> w{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
    const auto r = fixtures::finite_difference_check(model, batch, labels, w, 1e-5);
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
    skipped += r.skipped;
  }
  const auto detail = fmt("max relative error %.3g over %zu parameters (%zu at ReLU/pool kinks excluded)", worst,
                          checked, skipped);
  return worst < 1e-4 && checked > 20 * skipped ? pass(detail) : fail(detail);
}

// ---- 3 ----
Outcome overfit() {
  const auto set = fixtures::separable_windows(16, 32, 42);
  nn::TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.patience = 200;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 8;
  cfg.seed = 42;
  auto model = nn::build_model({32, 3}, {nn::LayerSpec::conv(4, 5), nn::LayerSpec::maxpool(2), nn::LayerSpec::dense(2)}, 42);
  std::size_t first_perfect = 0;
  const auto result = nn::train(std::move(model), set, {}, cfg);
  for (const auto& h : result.history) {
    if (h.train_accuracy == 1.0) {
      first_perfect = h.epoch;
      break;
    }
  }
  const double acc = nn::evaluate(result.model, set).accuracy_overall;
  const auto detail = fmt("training accuracy %.3f on 32 windows (first perfect epoch %zu)", acc, first_perfect);
  return acc == 1.0 ? pass(detail) : fail(detail);
}

// ---- 4 ----
Outcome class_weight_effect() {
  std::size_t strictly = 0, at_least = 0;
  std::string recalls;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto train = fixtures::shifted_windows(450, 50, 16, 0.25, mix_seed(40, seed));
    const auto test = fixtures::shifted_windows(900, 100, 16, 0.25, mix_seed(41, seed));
    const std::vector<nn::LayerSpec> arch{nn::LayerSpec::conv(4, 3), nn::LayerSpec::maxpool(2), nn::LayerSpec::dense(2)};
    auto run = [&](std::optional<std::array<double, 2>> weights) {
      nn::TrainConfig cfg;
      cfg.max_epochs = 15;
      cfg.patience = 15;
      cfg.learning_rate = 0.01;
      cfg.seed = seed;
      cfg.class_weights = weights;
      const auto r = nn::train(nn::build_model({16, 3}, arch, seed), train, {}, cfg);
      return nn::evaluate(r.model, test).accuracy_per_class[1];
    };
    const double weighted = run(nn::class_weights_from(train));
    const double plain = run(std::array<double, 2>{1.0, 1.0});
    at_least += weighted >= plain;
    strictly += weighted > plain;
    recalls += fmt(" %.2f/%.2f", weighted, plain);
  }
  const auto detail = fmt("FoG recall weighted/unweighted:%s; >= in %zu/10, > in %zu/10", recalls.c_str(), at_least,
                          strictly);
  return at_least == 10 && strictly >= 8 ? pass(detail) : fail(detail);
}

// ---- 5, 6 ----
struct Deployed {
  fixtures::TrainedFixture f;
  quant::PackedModel packed;
  std::vector<std::uint8_t> bytes;
};

const Deployed& deployed() {
  static const Deployed d = [] {
    Deployed d;
    d.f = fixtures::trained_default_model(400, 500, 5, 42);
    const auto cal = quant::calibrate(d.f.model, quant::calibration_sample(d.f.train, 100, 42));
    d.packed = quant::pack(d.f.model, cal, d.f.norm);
    d.bytes = quant::serialize(d.packed);
    return d;
  }();
  return d;
}

Outcome quantization_fidelity() {
  const auto& d = deployed();
  const auto frozen = quant::freeze(d.f.model);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < d.f.test.size(); ++i) {
    const std::vector<float> raw(d.f.test_raw[i].values.begin(), d.f.test_raw[i].values.end());
    agree += quant::classify_raw(d.packed, raw).label == nn::argmax(nn::predict_proba(frozen, d.f.test[i].values));
  }
  const double rate = static_cast<double>(agree) / static_cast<double>(d.f.test.size());

  double worst_ratio = 0.0;
  for (const auto& q : {quant::affine_from_range(-1.0, 1.0).params, quant::affine_from_range(-3.7, 12.1).params,
                        quant::QuantParams{0.05f, 0}, quant::QuantParams{0.3f, 100}}) {
    const double lo = (-128 - q.zero_point) * static_cast<double>(q.scale);
    const double hi = (127 - q.zero_point) * static_cast<double>(q.scale);
    for (int i = 0; i <= 200000; ++i) {
      const double x = lo + (hi - lo) * i / 200000.0;
      worst_ratio = std::max(worst_ratio, std::abs(quant::dequantize(quant::quantize(x, q), q) - x) / q.scale);
    }
  }
  const auto detail = fmt("label agreement %.2f%% on %zu held-out windows; worst round-trip error %.6f*scale", 100 * rate,
                          d.f.test.size(), worst_ratio);
  return rate >= 0.95 && d.f.test.size() == 500 && worst_ratio <= 0.5 + 1e-9 ? pass(detail) : fail(detail);
}

Outcome size_budget() {
  const auto& d = deployed();
  const auto detail = fmt("packed default model %zu bytes (budget %zu; reference point 298,600)", d.bytes.size(),
                          quant::kFlashBudget);
  return d.bytes.size() < quant::kFlashBudget ? pass(detail) : fail(detail);
}

// ---- 7 ----
Outcome echo_protocol() {
  micro::Device device(deployed().bytes);
  host::InProcessTransport t(device);
  host::begin_session(t, host::SessionMode::Echo);
  Rng rng(7);
  std::vector<float> values;
  while (values.size() < 1000) {
    // random bit patterns, finite values only
    std::uint32_t bits = static_cast<std::uint32_t>(rng.index(std::size_t{1} << 32));
    float v;
    std::memcpy(&v, &bits, 4);
    if (std::isfinite(v)) values.push_back(v);
  }
  const auto r = host::echo_check(t, values);
  const auto detail = fmt("%zu values, %zu mismatches", r.checked, r.mismatches.size());
  return r.passed() && r.checked == 1000 ? pass(detail) : fail(detail);
}

// ---- 8 ----
Outcome stream_equivalence() {
  const auto& d = deployed();
  windows::WindowSet set;
  for (std::size_t i = 0; i < 200; ++i) set.push_back(d.f.test_raw[i]);

  micro::Device device(d.bytes);
  host::TcpDeviceServer server(device, 0);
  std::thread th([&] { server.serve(1); });
  host::StreamLog log;
  std::string error;
  try {
    host::TcpTransport t("127.0.0.1", server.port());
    host::begin_session(t, host::SessionMode::Classify);
    log = host::stream_windows(t, set);
  } catch (const std::exception& e) {
    error = e.what();
  }
  server.stop();
  th.join();
  if (!error.empty()) return fail("stream failed: " + error);

  std::size_t mismatches = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::vector<float> raw(set[i].values.begin(), set[i].values.end());
    const auto q = quant::classify_raw(d.packed, raw);
    mismatches += log.entries[i].device_label != q.label || log.entries[i].prob_uint8 != q.prob_uint8;
    worst = std::max(worst, log.entries[i].round_trip_ms);
  }
  const auto detail = fmt("%zu windows over TCP, %zu label mismatches, max round trip %.3f ms", log.entries.size(),
                          mismatches, worst);
  return log.entries.size() == 200 && mismatches == 0 && worst < 5000.0 ? pass(detail) : fail(detail);
}

// ---- 9 ----
Outcome memory_accounting() {
  const auto& d = deployed();
  micro::Device device(d.bytes);
  host::InProcessTransport t(device);
  host::begin_session(t, host::SessionMode::Classify);
  std::size_t first = 0, min_hw = SIZE_MAX, max_hw = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    t.send(host::window_frame(d.f.test_raw[i]));
    t.receive(2);
    const auto hw = device.memory_report().ram_high_water;
    if (i == 0) first = hw;
    min_hw = std::min(min_hw, hw);
    max_hw = std::max(max_hw, hw);
  }
  const auto m = device.memory_report();
  const auto detail = fmt("high-water %zu bytes (%.1f%% of %zu) after 100 inferences, drift %zu bytes; flash %zu bytes (%.1f%%)",
                          m.ram_high_water, m.ram_pct, micro::kDefaultRamBudget, max_hw - min_hw, m.flash_used, m.flash_pct);
  return max_hw == min_hw && first == max_hw && max_hw <= micro::kDefaultRamBudget ? pass(detail) : fail(detail);
}

// ---- 10 ----
Outcome daphnet_pipeline() {
  const char* dir = std::getenv("FOG_DAPHNET_DIR");
  if (!dir || !fs::is_directory(dir)) return skip("FOG_DAPHNET_DIR not set; dataset absent");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".txt" && e.path().stem().string().starts_with("S")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) return skip(std::string("no S*R*.txt files under ") + dir);

  windows::WindowSet all;
  for (const auto& f : files) {
    const auto rec = ingest::select_channel(ingest::parse_file(f, ingest::Format::DaphnetText), ingest::Channel::Thigh);
    for (const auto& s : ingest::clean(rec)) {
      for (auto& w : windows::segment(s)) all.push_back(std::move(w));
    }
  }
  auto parts = windows::split(all, {}, 42);
  parts.train = windows::oversample_minority(parts.train, 1.0, mix_seed(42, 1));
  const auto norm = windows::fit_stats(parts.train);
  const auto train = windows::apply_stats(parts.train, norm);
  const auto val = windows::apply_stats(parts.val, norm);
  const auto test = windows::apply_stats(parts.test, norm);
  nn::TrainConfig cfg;
  const auto result = nn::train(nn::build_model({windows::kWindowLen, windows::kAxes}, nn::default_architecture(), 42),
                                train, val, cfg);
  const auto eval = nn::evaluate(result.model, test);
  const auto detail = fmt("%zu files, %zu windows; test overall %.1f%%, No-FoG %.1f%%, FoG %.1f%% (reference 83.7/84/80)",
                          files.size(), all.size(), 100 * eval.accuracy_overall, 100 * eval.accuracy_per_class[0],
                          100 * eval.accuracy_per_class[1]);
  return eval.accuracy_overall >= 0.75 && eval.accuracy_per_class[1] >= 0.70 ? pass(detail) : fail(detail);
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "windowing oracle", 5, windowing_oracle},
      {2, "gradient correctness", 60, gradient_check},
      {3, "overfit sanity", 60, overfit},
      {4, "class-weight effect", 300, class_weight_effect},
      {5, "quantization fidelity", 0, quantization_fidelity},
      {6, "size budget", 0, size_budget},
      {7, "echo protocol", 0, echo_protocol},
      {8, "stream/batch equivalence", 0, stream_equivalence},
      {9, "memory accounting", 0, memory_accounting},
      {10, "Daphnet pipeline", 1800, daphnet_pipeline},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.kind == Outcome::Kind::Pass && c.limit_s > 0 && secs >= c.limit_s) {
      o = fail(o.detail + fmt("; took %.1f s, limit %.0f s", secs, c.limit_s));
    }
    const char* tag = o.kind == Outcome::Kind::Pass ? "PASS" : o.kind == Outcome::Kind::Skip ? "SKIP" : "FAIL";
    std::printf("[%s] %2d %-26s %7.2fs  %s\n", tag, c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
    failures += o.kind == Outcome::Kind::Fail;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
