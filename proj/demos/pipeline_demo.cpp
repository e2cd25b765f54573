// Runs the whole pipeline in one process on synthetic recordings: clean,
// window, train, quantize, then stream the test split through a simulated
// device and print the report.

#include <cstdio>

#include "fog/fog.hpp"

int main() {
  using namespace fog;

  windows::WindowSet all;
  for (int s = 1; s <= 3; ++s) {
    const auto rec = synth::generate_recording("S0" + std::to_string(s), "R01", mix_seed(7, s), {.seconds = 400});
    for (const auto& series : ingest::clean(ingest::select_channel(rec, ingest::Channel::Thigh))) {
      for (auto& w : windows::segment(series)) all.push_back(std::move(w));
    }
  }
  auto parts = windows::split(all, {}, 42);
  parts.train = windows::oversample_minority(parts.train, 1.0, 43);
  std::printf("windows: %zu (train %zu, val %zu, test %zu)\n", all.size(), parts.train.size(), parts.val.size(),
              parts.test.size());

  const auto norm = windows::fit_stats(parts.train);
  const auto train = windows::apply_stats(parts.train, norm);
  const auto val = windows::apply_stats(parts.val, norm);
  nn::TrainConfig cfg;
  cfg.max_epochs = 8;
  cfg.patience = 3;
  const auto result =
      nn::train(nn::build_model({windows::kWindowLen, windows::kAxes}, nn::default_architecture(), 42), train, val, cfg);
  for (const auto& h : result.history) {
    std::printf("epoch %zu  loss %.4f  val_loss %.4f  val_acc %.3f\n", h.epoch, h.train_loss, h.val_loss,
                h.val_accuracy);
  }

  const auto cal = quant::calibrate(result.model, quant::calibration_sample(train, 100, 42));
  const auto bytes = quant::serialize(quant::pack(result.model, cal, norm));
  std::printf("packed model: %zu bytes\n", bytes.size());

  micro::Device device(bytes);
  host::InProcessTransport link(device);
  host::begin_session(link, host::SessionMode::Classify);
  const auto rep = host::report(host::stream_windows(link, parts.test));
  std::printf("%s", host::format_table(rep).c_str());
  const auto mem = device.memory_report();
  std::printf("flash %zu bytes (%.1f%%), ram high-water %zu bytes (%.1f%%)\n", mem.flash_used, mem.flash_pct,
              mem.ram_high_water, mem.ram_pct);
  std::printf("%s\n", host::to_json(rep).dump(2).c_str());
}
