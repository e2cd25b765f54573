// fogctl: command-line front end for the FoG detection pipeline.
//
//   synth      write synthetic Daphnet-style recordings
//   ingest     raw recordings -> cleaned per-segment CSVs
//   segment    cleaned CSVs -> windows.bin (+ .train/.val/.test splits)
//   train      windows -> model.fp.bin
//   tune       grid search over filters / lr / epochs / batch size
//   export     model.fp.bin -> int8 model.q.bin (and optional model.h)
//   device     serve a simulated device over TCP
//   stream     stream windows to a device and report accuracy/latency
//   echo-check verify the device echo (+1.0) path
//   evaluate   score a float or packed model directly on a split

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fog/fog.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw fog::Error(fog::Errc::Io, "cannot create " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<fs::path> files_with_ext(const fs::path& dir, std::initializer_list<std::string_view> exts) {
  if (!fs::is_directory(dir)) throw fog::Error(fog::Errc::Io, dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (std::find(exts.begin(), exts.end(), ext) != exts.end()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

fog::windows::Fractions parse_fractions(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  if (v.size() != 3) throw fog::Error(fog::Errc::InvalidFractions, "--split needs three comma-separated values");
  return {v[0], v[1], v[2]};
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw fog::Error(fog::Errc::InvalidArgument, "expected host:port");
  return {text.substr(0, colon), static_cast<std::uint16_t>(std::stoul(text.substr(colon + 1)))};
}

fs::path split_file(const fs::path& base, const std::string& split) {
  return split == "all" ? base : fog::windows::split_path(base, split);
}

void print_memory(const fog::micro::MemoryReport& m) {
  std::printf("flash: %zu bytes (%.1f%%)  ram high-water: %zu bytes (%.1f%%)\n", m.flash_used,
              m.flash_pct, m.ram_high_water, m.ram_pct);
}

// A device reached either in-process (--model) or over TCP (--connect).
struct DeviceLink {
  std::unique_ptr<fog::micro::Device> device;
  std::unique_ptr<fog::host::Transport> transport;

  static DeviceLink open(const std::string& model, const std::string& connect) {
    DeviceLink link;
    if (!connect.empty()) {
      const auto [host, port] = parse_endpoint(connect);
      link.transport = std::make_unique<fog::host::TcpTransport>(host, port);
    } else if (!model.empty()) {
      link.device = std::make_unique<fog::micro::Device>(fog::read_file_bytes(model));
      link.transport = std::make_unique<fog::host::InProcessTransport>(*link.device);
    } else {
      throw fog::Error(fog::Errc::InvalidArgument, "need --model or --connect");
    }
    return link;
  }
};

// ---- subcommands ----

struct SynthArgs {
  fs::path out;
  int subjects = 3;
  int trials = 2;
  double seconds = 600;
  std::uint64_t seed = 42;
};

void run_synth(const SynthArgs& a) {
  fs::create_directories(a.out);
  for (int s = 1; s <= a.subjects; ++s) {
    for (int t = 1; t <= a.trials; ++t) {
      char subject[16], trial[16];
      std::snprintf(subject, sizeof(subject), "S%02d", s);
      std::snprintf(trial, sizeof(trial), "R%02d", t);
      fog::synth::Options opt;
      opt.seconds = a.seconds;
      const auto rec = fog::synth::generate_recording(subject, trial, fog::mix_seed(a.seed, 100 * s + t), opt);
      const auto path = a.out / (std::string(subject) + trial + ".txt");
      std::ofstream(path) << fog::ingest::format_records(rec.records, fog::ingest::Format::DaphnetText);
      std::printf("%s: %zu samples\n", path.string().c_str(), rec.records.size());
    }
  }
}

struct IngestArgs {
  fs::path in, out;
  std::string channel = "thigh";
  fs::path exclude;
};

void run_ingest(const IngestArgs& a) {
  const auto channel = fog::ingest::parse_channel(a.channel);
  if (!channel) throw fog::Error(fog::Errc::InvalidArgument, "channel must be ankle, thigh or trunk");
  std::vector<fog::ingest::TimeExclusion> exclusions;
  if (!a.exclude.empty()) exclusions = fog::config::parse_exclusions(fog::config::load_json(a.exclude));
  fs::create_directories(a.out);
  std::size_t files = 0, series_count = 0, kept = 0, total = 0;
  for (const auto& path : files_with_ext(a.in, {".txt", ".csv"})) {
    const auto rec = fog::ingest::parse_file(path, fog::ingest::format_for(path));
    const auto series = fog::ingest::clean(fog::ingest::select_channel(rec, *channel), exclusions);
    for (const auto& s : series) {
      fog::ingest::write_clean_csv(s, a.out);
      kept += s.samples.size();
    }
    total += rec.records.size();
    series_count += series.size();
    ++files;
  }
  std::printf("%zu files, %zu records, %zu kept in %zu segments -> %s\n", files, total, kept,
              series_count, a.out.string().c_str());
}

struct SegmentArgs {
  fs::path in, out = "windows.bin";
  std::size_t window = fog::windows::kWindowLen;
  std::size_t hop = fog::windows::kHop;
  double ratio = 1.0;
  std::uint64_t seed = 42;
  std::string split = "0.7,0.15,0.15";
};

void run_segment(const SegmentArgs& a) {
  std::vector<fog::ingest::CleanSeries> series;
  for (const auto& path : files_with_ext(a.in, {".csv"})) series.push_back(fog::ingest::read_clean_csv(path));
  std::sort(series.begin(), series.end(), [](const auto& x, const auto& y) {
    using fog::windows::numeric_id;
    return std::tuple(numeric_id(x.subject_id), numeric_id(x.trial_id), x.segment_index) <
           std::tuple(numeric_id(y.subject_id), numeric_id(y.trial_id), y.segment_index);
  });
  fog::windows::WindowSet all;
  for (const auto& s : series) {
    for (auto& w : fog::windows::segment(s, a.window, a.hop)) all.push_back(std::move(w));
  }
  auto parts = fog::windows::split(all, parse_fractions(a.split), a.seed);
  if (parts.train.count_fog() > 0 && parts.train.count_nofog() > 0) {
    parts.train = fog::windows::oversample_minority(parts.train, a.ratio, fog::mix_seed(a.seed, 1));
  } else {
    std::fprintf(stderr, "warning: training split lacks a class; oversampling skipped\n");
  }
  fog::windows::save_windows(a.out, all);
  fog::windows::save_windows(fog::windows::split_path(a.out, "train"), parts.train);
  fog::windows::save_windows(fog::windows::split_path(a.out, "val"), parts.val);
  fog::windows::save_windows(fog::windows::split_path(a.out, "test"), parts.test);
  auto row = [](const char* name, const fog::windows::WindowSet& s) {
    std::printf("  %-6s %7zu windows  (No-FoG %zu, FoG %zu)\n", name, s.size(), s.count_nofog(), s.count_fog());
  };
  std::printf("%zu series -> %s\n", series.size(), a.out.string().c_str());
  row("all", all);
  row("train", parts.train);
  row("val", parts.val);
  row("test", parts.test);
}

struct TrainArgs {
  fs::path windows, config, out = "model.fp.bin", report = "report.json";
};

fog::config::TrainSettings load_settings(const fs::path& path) {
  return path.empty() ? fog::config::TrainSettings{} : fog::config::parse_train_settings(fog::config::load_json(path));
}

void run_train(const TrainArgs& a) {
  const auto settings = load_settings(a.config);
  const auto train_raw = fog::windows::load_windows(split_file(a.windows, "train"));
  const auto val_raw = fog::windows::load_windows(split_file(a.windows, "val"));
  if (train_raw.empty()) throw fog::Error(fog::Errc::InvalidArgument, "training split is empty");
  const auto norm = fog::windows::fit_stats(train_raw);
  const auto train = fog::windows::apply_stats(train_raw, norm);
  const auto val = fog::windows::apply_stats(val_raw, norm);

  const fog::nn::Shape input{train[0].steps(), fog::windows::kAxes};
  auto model = fog::nn::build_model(input, settings.architecture, settings.train.seed);
  std::printf("training %zu parameters on %zu windows (val %zu)\n", fog::nn::parameter_count(model),
              train.size(), val.size());
  const auto result = fog::nn::train(std::move(model), train, val, settings.train);
  for (const auto& h : result.history) {
    std::printf("epoch %3zu  loss %.4f  acc %.3f  val_loss %.4f  val_acc %.3f\n", h.epoch, h.train_loss,
                h.train_accuracy, h.val_loss, h.val_accuracy);
  }
  fog::nn::save_float_model(a.out, {result.model, norm});

  json report = {{"best_epoch", result.best_epoch},
                 {"stopped_early", result.stopped_early},
                 {"class_weights", result.class_weights},
                 {"architecture", fog::config::architecture_to_json(settings.architecture)},
                 {"history", fog::config::to_json(result.history)},
                 {"norm", {{"mean", norm.mean}, {"std", norm.std}}},
                 {"val", fog::config::to_json(fog::nn::evaluate(result.model, val, result.class_weights))}};
  const auto test_path = split_file(a.windows, "test");
  if (fs::exists(test_path)) {
    const auto test = fog::windows::apply_stats(fog::windows::load_windows(test_path), norm);
    const auto eval = fog::nn::evaluate(result.model, test, result.class_weights);
    report["test"] = fog::config::to_json(eval);
    std::printf("test: overall %.1f%%  No-FoG %.1f%%  FoG %.1f%%\n", 100 * eval.accuracy_overall,
                100 * eval.accuracy_per_class[0], 100 * eval.accuracy_per_class[1]);
  }
  write_json(a.report, report);
  std::printf("best epoch %zu -> %s\n", result.best_epoch, a.out.string().c_str());
}

struct TuneArgs {
  fs::path windows, grid, config, out = "tune_report.json";
};

void run_tune(const TuneArgs& a) {
  const auto settings = load_settings(a.config);
  const auto grid = a.grid.empty() ? fog::tune::Grid{} : fog::config::parse_grid(fog::config::load_json(a.grid));
  const auto train_raw = fog::windows::load_windows(split_file(a.windows, "train"));
  const auto norm = fog::windows::fit_stats(train_raw);
  const auto train = fog::windows::apply_stats(train_raw, norm);
  const auto val = fog::windows::apply_stats(fog::windows::load_windows(split_file(a.windows, "val")), norm);
  std::printf("grid: %zu cells\n", grid.cells());
  const auto result = fog::tune::grid_search(
      grid, train, val, settings.train, settings.architecture, settings.train.seed,
      [](const fog::tune::CellConfig& c, const std::string& status) {
        std::printf("  filters=%zu lr=%g epochs=%zu batch=%zu: %s\n", c.filters, c.learning_rate, c.epochs,
                    c.batch_size, status.c_str());
        std::fflush(stdout);
      });
  write_json(a.out, fog::config::to_json(result));
  if (result.best) {
    const auto& b = *result.best;
    std::printf("best: filters=%zu lr=%g epochs=%zu batch=%zu  val_acc %.3f  size %zu bytes\n", b.config.filters,
                b.config.learning_rate, b.config.epochs, b.config.batch_size, b.val_accuracy, b.model_size_bytes);
  }
}

struct ExportArgs {
  fs::path model, windows, out = "model.q.bin", header;
  std::size_t budget = fog::quant::kFlashBudget;
  std::size_t calib = 100;
  std::uint64_t seed = 42;
};

void run_export(const ExportArgs& a) {
  const auto file = fog::nn::load_float_model(a.model);
  const auto frozen = fog::quant::freeze(file.model);
  const auto train = fog::windows::apply_stats(fog::windows::load_windows(split_file(a.windows, "train")), file.norm);
  const auto cal = fog::quant::calibrate(frozen, fog::quant::calibration_sample(train, a.calib, a.seed));
  for (const auto& name : cal.degenerate) std::fprintf(stderr, "warning: degenerate range for %s\n", name.c_str());
  const auto packed = fog::quant::pack(frozen, cal, file.norm, a.budget);
  const auto bytes = fog::quant::serialize(packed);
  fog::write_file_bytes(a.out, bytes);
  std::printf("packed %zu bytes (%.2f%% of %zu budget) -> %s\n", bytes.size(),
              100.0 * static_cast<double>(bytes.size()) / static_cast<double>(a.budget), a.budget,
              a.out.string().c_str());
  if (!a.header.empty()) {
    const auto text = fog::quant::to_c_header(bytes);
    std::ofstream(a.header) << text;
    std::printf("header %s: %zu bytes\n", a.header.string().c_str(), text.size());
  }

  const auto test_path = split_file(a.windows, "test");
  if (fs::exists(test_path)) {
    const auto test = fog::windows::load_windows(test_path);
    std::size_t agree = 0;
    for (const auto& w : test) {
      std::vector<float> raw(w.values.begin(), w.values.end());
      std::vector<double> z(raw.begin(), raw.end());
      fog::windows::standardize_in_place(z, file.norm);
      const auto float_label = fog::nn::argmax(fog::nn::predict_proba(frozen, z));
      agree += fog::quant::classify_raw(packed, raw).label == float_label;
    }
    if (!test.empty()) {
      std::printf("int8/float label agreement on test split: %.2f%% (%zu windows)\n",
                  100.0 * static_cast<double>(agree) / static_cast<double>(test.size()), test.size());
    }
  }
}

struct DeviceArgs {
  fs::path model;
  std::uint16_t port = 5555;
  std::string bind = "127.0.0.1";
  std::size_t flash = fog::micro::kDefaultFlashBudget;
  std::size_t ram = fog::micro::kDefaultRamBudget;
  std::size_t sessions = 0;
};

void run_device(const DeviceArgs& a) {
  fog::micro::Device device(fog::read_file_bytes(a.model), a.flash, a.ram);
  fog::host::TcpDeviceServer server(device, a.port, a.bind);
  std::printf("device listening on %s:%u\n", a.bind.c_str(), server.port());
  print_memory(device.memory_report());
  std::fflush(stdout);
  server.serve(a.sessions, [](const fog::micro::Device& d) {
    std::printf("session closed: %zu inferences, %zu non-finite inputs replaced\n", d.inferences(),
                d.nonfinite_inputs());
    print_memory(d.memory_report());
    std::fflush(stdout);
  });
}

struct StreamArgs {
  std::string model, connect;
  fs::path windows, out = "report.json";
  std::string split = "test";
  long timeout_ms = 5000;
};

void run_stream(const StreamArgs& a) {
  const auto set = fog::windows::load_windows(split_file(a.windows, a.split));
  auto link = DeviceLink::open(a.model, a.connect);
  const fog::host::Millis timeout{a.timeout_ms};
  fog::host::begin_session(*link.transport, fog::host::SessionMode::Classify, timeout);
  const auto log = fog::host::stream_windows(*link.transport, set, timeout);
  const auto rep = fog::host::report(log);
  write_json(a.out, fog::host::to_json(rep));
  std::printf("%s", fog::host::format_table(rep).c_str());
  if (link.device) print_memory(link.device->memory_report());
}

struct EchoArgs {
  std::string model, connect;
  std::string values;
  std::size_t count = 10;
  std::uint64_t seed = 42;
};

int run_echo(const EchoArgs& a) {
  std::vector<float> values;
  if (!a.values.empty()) {
    std::stringstream ss(a.values);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(std::stof(item));
  } else {
    fog::Rng rng(a.seed);
    for (std::size_t i = 0; i < a.count; ++i) values.push_back(static_cast<float>(rng.uniform(-2000.0, 2000.0)));
  }
  auto link = DeviceLink::open(a.model, a.connect);
  fog::host::begin_session(*link.transport, fog::host::SessionMode::Echo);
  const auto rep = fog::host::echo_check(*link.transport, values);
  for (const auto& m : rep.mismatches) {
    std::printf("  #%zu sent %.9g expected %.9g got %.9g\n", m.index, m.sent, m.expected, m.received);
  }
  std::printf("echo check: %s (%zu values, %zu mismatches)\n", rep.passed() ? "PASS" : "FAIL", rep.checked,
              rep.mismatches.size());
  return rep.passed() ? 0 : 1;
}

struct EvaluateArgs {
  fs::path model, windows, out;
  std::string split = "test";
};

void run_evaluate(const EvaluateArgs& a) {
  const auto set = fog::windows::load_windows(split_file(a.windows, a.split));
  const auto bytes = fog::read_file_bytes(a.model);
  fog::nn::EvalReport eval;
  if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "FOGM")) {
    const auto packed = fog::quant::unpack(bytes);
    std::vector<std::uint8_t> truth, pred;
    for (const auto& w : set) {
      std::vector<float> raw(w.values.begin(), w.values.end());
      truth.push_back(w.label);
      pred.push_back(fog::quant::classify_raw(packed, raw).label);
    }
    eval = fog::nn::report_from_predictions(truth, pred);
  } else {
    const auto file = fog::nn::decode_float_model(bytes);
    eval = fog::nn::evaluate(file.model, fog::windows::apply_stats(set, file.norm));
  }
  const auto& c = eval.confusion;
  std::printf("%zu windows  TN %zu FP %zu FN %zu TP %zu\n", c.total(), c.tn, c.fp, c.fn, c.tp);
  std::printf("accuracy: overall %.1f%%  No-FoG %.1f%%  FoG %.1f%%\n", 100 * eval.accuracy_overall,
              100 * eval.accuracy_per_class[0], 100 * eval.accuracy_per_class[1]);
  if (!a.out.empty()) write_json(a.out, fog::config::to_json(eval));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Freezing-of-gait detection pipeline: ingest, train, quantize, and run on a simulated device"};
  app.require_subcommand(1);
  int exit_code = 0;

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Write synthetic Daphnet-style recordings");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--subjects", synth.subjects);
  c_synth->add_option("--trials", synth.trials);
  c_synth->add_option("--seconds", synth.seconds, "Length of each recording");
  c_synth->add_option("--seed", synth.seed);
  c_synth->callback([&] { run_synth(synth); });

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Clean raw recordings into per-segment CSVs");
  c_ingest->add_option("--in", ingest.in, "Directory of .txt (space) / .csv (comma) recordings")->required();
  c_ingest->add_option("--out", ingest.out, "Output directory")->required();
  c_ingest->add_option("--channel", ingest.channel, "ankle | thigh | trunk");
  c_ingest->add_option("--exclude", ingest.exclude, "JSON list of per-trial time ranges to drop");
  c_ingest->callback([&] { run_ingest(ingest); });

  SegmentArgs seg;
  auto* c_seg = app.add_subcommand("segment", "Window, split and oversample cleaned series");
  c_seg->add_option("--in", seg.in, "Directory of cleaned CSVs")->required();
  c_seg->add_option("--out", seg.out, "windows.bin path; splits go to <stem>.train/.val/.test.bin");
  c_seg->add_option("--window", seg.window);
  c_seg->add_option("--hop", seg.hop);
  c_seg->add_option("--ratio", seg.ratio, "Minority/majority target after oversampling");
  c_seg->add_option("--seed", seg.seed);
  c_seg->add_option("--split", seg.split, "train,val,test fractions");
  c_seg->callback([&] { run_segment(seg); });

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train the CNN");
  c_train->add_option("--windows", train.windows, "windows.bin (its .train/.val splits are used)")->required();
  c_train->add_option("--config", train.config, "train.json");
  c_train->add_option("--out", train.out);
  c_train->add_option("--report", train.report);
  c_train->callback([&] { run_train(train); });

  TuneArgs tune;
  auto* c_tune = app.add_subcommand("tune", "Grid search on the validation split");
  c_tune->add_option("--windows", tune.windows)->required();
  c_tune->add_option("--grid", tune.grid, "grid.json");
  c_tune->add_option("--config", tune.config, "train.json providing the base settings");
  c_tune->add_option("--out", tune.out);
  c_tune->callback([&] { run_tune(tune); });

  ExportArgs exp;
  auto* c_exp = app.add_subcommand("export", "Freeze, calibrate and pack an int8 model");
  c_exp->add_option("--model", exp.model, "model.fp.bin")->required();
  c_exp->add_option("--windows", exp.windows, "windows.bin (train split used for calibration)")->required();
  c_exp->add_option("--out", exp.out);
  c_exp->add_option("--budget", exp.budget, "Size budget in bytes");
  c_exp->add_option("--header", exp.header, "Also write a C header with the model bytes");
  c_exp->add_option("--calib", exp.calib, "Calibration windows");
  c_exp->add_option("--seed", exp.seed);
  c_exp->callback([&] { run_export(exp); });

  DeviceArgs dev;
  auto* c_dev = app.add_subcommand("device", "Serve a simulated device over TCP");
  c_dev->add_option("--model", dev.model, "model.q.bin")->required();
  c_dev->add_option("--listen", dev.port, "TCP port")->required();
  c_dev->add_option("--bind", dev.bind);
  c_dev->add_option("--flash-budget", dev.flash);
  c_dev->add_option("--ram-budget", dev.ram);
  c_dev->add_option("--sessions", dev.sessions, "Exit after this many sessions (0 = run forever)");
  c_dev->callback([&] { run_device(dev); });

  StreamArgs stream;
  auto* c_stream = app.add_subcommand("stream", "Stream windows to a device and report");
  c_stream->add_option("--model", stream.model, "Run an in-process device with this model.q.bin");
  c_stream->add_option("--connect", stream.connect, "host:port of a running device");
  c_stream->add_option("--windows", stream.windows)->required();
  c_stream->add_option("--split", stream.split, "train | val | test | all");
  c_stream->add_option("--out", stream.out);
  c_stream->add_option("--timeout-ms", stream.timeout_ms);
  c_stream->callback([&] { run_stream(stream); });

  EchoArgs echo;
  auto* c_echo = app.add_subcommand("echo-check", "Verify the device increments echoed values by one");
  c_echo->add_option("--model", echo.model);
  c_echo->add_option("--connect", echo.connect);
  c_echo->add_option("--values", echo.values, "Comma-separated floats");
  c_echo->add_option("--count", echo.count, "Random values when --values is absent");
  c_echo->add_option("--seed", echo.seed);
  c_echo->callback([&] { exit_code = run_echo(echo); });

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Score a float or packed model on a split");
  c_eval->add_option("--model", eval.model)->required();
  c_eval->add_option("--windows", eval.windows)->required();
  c_eval->add_option("--split", eval.split);
  c_eval->add_option("--out", eval.out);
  c_eval->callback([&] { run_evaluate(eval); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
