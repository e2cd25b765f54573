#pragma once

// Host side of the device protocol: handshake, echo verification and
// stop-and-wait window streaming.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "fog/error.hpp"
#include "fog/host/transport.hpp"
#include "fog/ingest.hpp"
#include "fog/micro/device.hpp"
#include "fog/windows.hpp"

namespace fog::host {

enum class SessionMode : std::uint8_t { Echo = micro::kModeEcho, Classify = micro::kModeClassify };

// Consumes the ready byte and selects the mode.
inline void begin_session(Transport& transport, SessionMode mode, Millis timeout = kDefaultTimeout) {
  const auto ready = transport.receive(1, timeout);
  if (ready[0] != micro::kReady) {
    throw Error(Errc::ShortReply, "expected ready byte 0xA5, got " + std::to_string(ready[0]));
  }
  const std::uint8_t m = static_cast<std::uint8_t>(mode);
  transport.send(std::span(&m, 1));
}

inline std::vector<std::uint8_t> float_bytes(float v) {
  std::vector<std::uint8_t> out(4);
  std::memcpy(out.data(), &v, 4);
  return out;
}

inline float bytes_float(std::span<const std::uint8_t> b) {
  float v;
  std::memcpy(&v, b.data(), 4);
  return v;
}

struct EchoMismatch {
  std::size_t index = 0;
  float sent = 0.0f;
  float expected = 0.0f;
  float received = 0.0f;
};

struct EchoReport {
  std::size_t checked = 0;
  std::vector<EchoMismatch> mismatches;

  bool passed() const { return mismatches.empty(); }
};

inline bool same_bits(float a, float b) {
  std::uint32_t x, y;
  std::memcpy(&x, &a, 4);
  std::memcpy(&y, &b, 4);
  return x == y;
}

// Each reply must equal value + 1.0f bit for bit. Expects an Echo session.
inline EchoReport echo_check(Transport& transport, std::span<const float> values,
                             Millis timeout = kDefaultTimeout) {
  EchoReport report;
  for (std::size_t i = 0; i < values.size(); ++i) {
    transport.send(float_bytes(values[i]));
    const float got = bytes_float(transport.receive(4, timeout));
    const float expected = values[i] + 1.0f;
    if (!same_bits(got, expected)) report.mismatches.push_back({i, values[i], expected, got});
    ++report.checked;
  }
  return report;
}

struct StreamEntry {
  windows::Origin origin;
  std::uint8_t true_label = 0;
  std::uint8_t device_label = 0;
  std::uint8_t prob_uint8 = 0;
  double round_trip_ms = 0.0;
};

struct StreamLog {
  std::vector<StreamEntry> entries;
};

inline std::vector<std::uint8_t> window_frame(const windows::Window& w) {
  std::vector<std::uint8_t> frame(w.values.size() * 4);
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    const float v = static_cast<float>(w.values[i]);
    std::memcpy(frame.data() + 4 * i, &v, 4);
  }
  return frame;
}

// Sends each window's raw values and waits for its 2-byte reply before the
// next one. Expects a Classify session.
inline StreamLog stream_windows(Transport& transport, const windows::WindowSet& set,
                                Millis timeout = kDefaultTimeout) {
  StreamLog log;
  log.entries.reserve(set.size());
  for (const auto& w : set) {
    const auto frame = window_frame(w);
    const auto t0 = std::chrono::steady_clock::now();
    transport.send(frame);
    const auto reply = transport.receive(2, timeout);
    const auto t1 = std::chrono::steady_clock::now();
    if (reply[0] > 1) throw Error(Errc::ShortReply, "invalid label byte " + std::to_string(reply[0]));
    log.entries.push_back({w.origin, w.label, reply[0], reply[1],
                           std::chrono::duration<double, std::milli>(t1 - t0).count()});
  }
  return log;
}

// Cleaned series are segmented on the host first; overlap is produced by
// re-sending the shared samples.
inline StreamLog stream_series(Transport& transport, const std::vector<ingest::CleanSeries>& series,
                               std::size_t window_len = windows::kWindowLen,
                               std::size_t hop = windows::kHop, Millis timeout = kDefaultTimeout) {
  windows::WindowSet set;
  for (const auto& s : series) {
    for (auto& w : windows::segment(s, window_len, hop)) set.push_back(std::move(w));
  }
  return stream_windows(transport, set, timeout);
}

}  // namespace fog::host
