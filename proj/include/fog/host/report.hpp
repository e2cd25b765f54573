#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fog/host/session.hpp"
#include "fog/nn/metrics.hpp"
#include "json.hpp"

namespace fog::host {

struct Latency {
  double p50 = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

struct StreamReport {
  nn::EvalReport eval;
  Latency latency_ms;
  std::size_t n_windows = 0;
};

// Nearest-rank percentile of an unsorted sample (0 for an empty sample).
inline double percentile(std::vector<double> values, double pct) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

inline StreamReport report(const StreamLog& log) {
  std::vector<std::uint8_t> truth, predicted;
  std::vector<double> latency;
  for (const auto& e : log.entries) {
    truth.push_back(e.true_label);
    predicted.push_back(e.device_label);
    latency.push_back(e.round_trip_ms);
  }
  StreamReport r;
  r.eval = nn::report_from_predictions(truth, predicted);
  r.latency_ms = {percentile(latency, 50), percentile(latency, 95), percentile(latency, 100)};
  r.n_windows = log.entries.size();
  return r;
}

// {confusion: [[tn,fp],[fn,tp]], accuracy, per_class: [c0,c1],
//  latency_ms: {p50,p95,max}, n_windows}
inline nlohmann::json to_json(const StreamReport& r) {
  const auto& c = r.eval.confusion;
  return {
      {"confusion", {{c.tn, c.fp}, {c.fn, c.tp}}},
      {"accuracy", r.eval.accuracy_overall},
      {"per_class", {r.eval.accuracy_per_class[0], r.eval.accuracy_per_class[1]}},
      {"latency_ms", {{"p50", r.latency_ms.p50}, {"p95", r.latency_ms.p95}, {"max", r.latency_ms.max}}},
      {"n_windows", r.n_windows},
  };
}

inline std::string format_table(const StreamReport& r) {
  const auto& c = r.eval.confusion;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "windows: %zu\n"
                "                 pred No-FoG   pred FoG\n"
                "  true No-FoG  %11zu %10zu\n"
                "  true FoG     %11zu %10zu\n"
                "accuracy: overall %.1f%%  No-FoG %.1f%%  FoG %.1f%%\n"
                "latency ms: p50 %.3f  p95 %.3f  max %.3f\n",
                r.n_windows, c.tn, c.fp, c.fn, c.tp, 100.0 * r.eval.accuracy_overall,
                100.0 * r.eval.accuracy_per_class[0], 100.0 * r.eval.accuracy_per_class[1],
                r.latency_ms.p50, r.latency_ms.p95, r.latency_ms.max);
  return buf;
}

}  // namespace fog::host
