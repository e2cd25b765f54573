#pragma once

// Fixed-length labeled windows: segmentation, labeling, minority
// oversampling, standardization, stratified splitting and the windows.bin
// container.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fog/byteio.hpp"
#include "fog/error.hpp"
#include "fog/ingest.hpp"
#include "fog/rng.hpp"

namespace fog::windows {

inline constexpr std::size_t kAxes = 3;
inline constexpr std::size_t kWindowLen = 129;
inline constexpr std::size_t kHop = 64;
inline constexpr std::size_t kWindowValues = kWindowLen * kAxes;

inline constexpr std::uint8_t kNoFog = 0;
inline constexpr std::uint8_t kFog = 1;

struct Origin {
  std::uint32_t subject = 0;
  std::uint32_t trial = 0;
  std::uint32_t segment = 0;
  std::uint32_t start = 0;

  bool operator==(const Origin&) const = default;
  auto operator<=>(const Origin&) const = default;
};

// values are time-major: t0x, t0y, t0z, t1x, ...
struct Window {
  std::vector<double> values;
  std::uint8_t label = kNoFog;
  Origin origin;

  std::size_t steps() const { return values.size() / kAxes; }
  double at(std::size_t t, std::size_t axis) const { return values[t * kAxes + axis]; }

  bool operator==(const Window&) const = default;
};

// Window list whose class counts always match its labels.
class WindowSet {
 public:
  WindowSet() = default;
  explicit WindowSet(std::vector<Window> windows) {
    for (auto& w : windows) push_back(std::move(w));
  }

  void push_back(Window w) {
    if (w.label != kNoFog && w.label != kFog) {
      throw Error(Errc::InvalidArgument, "window label must be 0 or 1");
    }
    (w.label == kFog ? count_fog_ : count_nofog_)++;
    windows_.push_back(std::move(w));
  }

  const std::vector<Window>& windows() const { return windows_; }
  std::size_t size() const { return windows_.size(); }
  bool empty() const { return windows_.empty(); }
  const Window& operator[](std::size_t i) const { return windows_[i]; }
  std::size_t count_fog() const { return count_fog_; }
  std::size_t count_nofog() const { return count_nofog_; }
  std::size_t count(std::uint8_t label) const { return label == kFog ? count_fog_ : count_nofog_; }

  // Mutable access to values only; labels are fixed once inserted.
  std::vector<double>& values(std::size_t i) { return windows_[i].values; }

  auto begin() const { return windows_.begin(); }
  auto end() const { return windows_.end(); }

 private:
  std::vector<Window> windows_;
  std::size_t count_fog_ = 0;
  std::size_t count_nofog_ = 0;
};

// Numeric form of a subject/trial id for the u32 origin fields: the trailing
// digits when present ("S03" -> 3), otherwise a 32-bit FNV-1a hash.
inline std::uint32_t numeric_id(std::string_view id) {
  std::size_t i = id.size();
  while (i > 0 && id[i - 1] >= '0' && id[i - 1] <= '9') --i;
  if (i < id.size() && id.size() - i <= 9) {
    std::uint32_t v = 0;
    for (std::size_t k = i; k < id.size(); ++k) v = v * 10 + static_cast<std::uint32_t>(id[k] - '0');
    return v;
  }
  std::uint32_t h = 2166136261u;
  for (char c : id) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 16777619u;
  }
  return h;
}

// 1 (FoG) iff strictly more than half of the samples are annotated as freeze.
inline std::uint8_t label_window(std::span<const std::uint8_t> annotations) {
  std::size_t freeze = 0;
  for (auto a : annotations) freeze += (a == ingest::kFreeze);
  return 2 * freeze > annotations.size() ? kFog : kNoFog;
}

inline std::vector<Window> segment(const ingest::CleanSeries& series,
                                   std::size_t window_len = kWindowLen, std::size_t hop = kHop) {
  if (window_len == 0 || hop == 0 || hop > window_len) {
    throw Error(Errc::InvalidArgument, "need window_len > 0 and 0 < hop <= window_len");
  }
  std::vector<Window> out;
  const auto& s = series.samples;
  const Origin base{numeric_id(series.subject_id), numeric_id(series.trial_id),
                    series.segment_index, 0};
  std::vector<std::uint8_t> annotations(window_len);
  for (std::size_t start = 0; start + window_len <= s.size(); start += hop) {
    Window w;
    w.values.reserve(window_len * kAxes);
    for (std::size_t t = 0; t < window_len; ++t) {
      const auto& p = s[start + t];
      for (std::size_t a = 0; a < kAxes; ++a) w.values.push_back(static_cast<double>(p.accel[a]));
      annotations[t] = p.annotation;
    }
    w.label = label_window(annotations);
    w.origin = base;
    w.origin.start = static_cast<std::uint32_t>(start);
    out.push_back(std::move(w));
  }
  return out;
}

// Appends seeded uniform draws (with replacement) of minority windows until
// minority >= ceil(target_ratio * majority). Originals keep their order.
inline WindowSet oversample_minority(const WindowSet& set, double target_ratio, std::uint64_t seed) {
  if (set.count_fog() == 0 || set.count_nofog() == 0) {
    throw Error(Errc::EmptyClass, "oversampling needs both classes present");
  }
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
    throw Error(Errc::InvalidArgument, "target_ratio must be in (0, 1]");
  }
  const std::uint8_t minority = set.count_fog() < set.count_nofog() ? kFog : kNoFog;
  const std::uint8_t majority = minority == kFog ? kNoFog : kFog;
  const auto target =
      static_cast<std::size_t>(std::ceil(target_ratio * static_cast<double>(set.count(majority)) - 1e-9));

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i].label == minority) pool.push_back(i);
  }
  WindowSet out = set;
  Rng rng(seed);
  while (out.count(minority) < target) out.push_back(set[pool[rng.index(pool.size())]]);
  return out;
}

struct NormStats {
  std::array<double, kAxes> mean{0.0, 0.0, 0.0};
  std::array<double, kAxes> std{1.0, 1.0, 1.0};

  bool operator==(const NormStats&) const = default;
};

// Per-axis population mean/std over every value in the set.
inline NormStats fit_stats(const WindowSet& train) {
  std::array<double, kAxes> sum{}, sq{};
  std::size_t n = 0;
  for (const auto& w : train) {
    for (std::size_t t = 0; t < w.steps(); ++t) {
      for (std::size_t a = 0; a < kAxes; ++a) sum[a] += w.at(t, a);
    }
    n += w.steps();
  }
  if (n == 0) throw Error(Errc::DegenerateAxis, "no samples to fit statistics on");
  NormStats stats;
  for (std::size_t a = 0; a < kAxes; ++a) stats.mean[a] = sum[a] / static_cast<double>(n);
  for (const auto& w : train) {
    for (std::size_t t = 0; t < w.steps(); ++t) {
      for (std::size_t a = 0; a < kAxes; ++a) {
        const double d = w.at(t, a) - stats.mean[a];
        sq[a] += d * d;
      }
    }
  }
  for (std::size_t a = 0; a < kAxes; ++a) {
    stats.std[a] = std::sqrt(sq[a] / static_cast<double>(n));
    if (!(stats.std[a] > 0.0) || !std::isfinite(stats.std[a])) {
      throw Error(Errc::DegenerateAxis, "axis " + std::to_string(a) + " has zero variance");
    }
  }
  return stats;
}

inline void standardize_in_place(std::span<double> values, const NormStats& stats) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto a = i % kAxes;
    values[i] = (values[i] - stats.mean[a]) / stats.std[a];
  }
}

inline WindowSet apply_stats(const WindowSet& set, const NormStats& stats) {
  WindowSet out = set;
  for (std::size_t i = 0; i < out.size(); ++i) standardize_in_place(out.values(i), stats);
  return out;
}

struct Fractions {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

struct Splits {
  WindowSet train;
  WindowSet val;
  WindowSet test;
};

// Stratified split: each class is shuffled with the seed and cut by
// rounded fractions; every split keeps the input order.
inline Splits split(const WindowSet& set, Fractions f, std::uint64_t seed) {
  if (!(f.train > 0.0 && f.val > 0.0 && f.test > 0.0) ||
      std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw Error(Errc::InvalidFractions, "fractions must be positive and sum to 1");
  }
  enum class Part : std::uint8_t { Train, Val, Test };
  std::vector<Part> assignment(set.size(), Part::Test);
  Rng rng(seed);
  for (std::uint8_t label : {kNoFog, kFog}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set[i].label == label) idx.push_back(i);
    }
    rng.shuffle(std::span(idx));
    const double n = static_cast<double>(idx.size());
    const auto n_train = std::min(idx.size(), static_cast<std::size_t>(std::llround(n * f.train)));
    const auto n_val =
        std::min(idx.size() - n_train, static_cast<std::size_t>(std::llround(n * f.val)));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      assignment[idx[k]] = k < n_train ? Part::Train : (k < n_train + n_val ? Part::Val : Part::Test);
    }
  }
  Splits out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    switch (assignment[i]) {
      case Part::Train: out.train.push_back(set[i]); break;
      case Part::Val: out.val.push_back(set[i]); break;
      case Part::Test: out.test.push_back(set[i]); break;
    }
  }
  return out;
}

// ---- windows.bin ----
// "FOGW", u32 version, u32 count, then per window: u32 label, u32 subject,
// u32 trial, u32 segment, u32 start, float32 values (time-major).
// Version 1 holds 129-step windows (387 values). Version 2 inserts a u32
// step count after `count` for other window lengths.

inline std::vector<std::uint8_t> encode_windows(const WindowSet& set) {
  const std::size_t steps = set.empty() ? kWindowLen : set[0].steps();
  for (const auto& w : set) {
    if (w.steps() != steps || w.values.size() != steps * kAxes) {
      throw Error(Errc::ShapeMismatch, "all windows must share one shape");
    }
  }
  ByteWriter out;
  out.magic("FOGW");
  const bool v1 = steps == kWindowLen;
  out.put<std::uint32_t>(v1 ? 1 : 2);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(set.size()));
  if (!v1) out.put<std::uint32_t>(static_cast<std::uint32_t>(steps));
  std::vector<float> buf;
  for (const auto& w : set) {
    out.put<std::uint32_t>(w.label);
    out.put(w.origin.subject);
    out.put(w.origin.trial);
    out.put(w.origin.segment);
    out.put(w.origin.start);
    buf.assign(w.values.begin(), w.values.end());
    out.put_all(std::span<const float>(buf));
  }
  return std::move(out).bytes();
}

inline WindowSet decode_windows(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (!in.magic("FOGW")) throw Error(Errc::BadMagic, "not a windows file");
  const auto version = in.get<std::uint32_t>();
  if (version != 1 && version != 2) {
    throw Error(Errc::BadVersion, "windows version " + std::to_string(version));
  }
  const auto count = in.get<std::uint32_t>();
  const std::size_t steps = version == 1 ? kWindowLen : in.get<std::uint32_t>();
  if (count > 0 && (steps == 0 || steps * kAxes > in.remaining() / sizeof(float))) {
    throw Error(Errc::UnexpectedEOF, "window payload runs past end of file");
  }
  WindowSet set;
  std::vector<float> buf(steps * kAxes);
  for (std::uint32_t i = 0; i < count; ++i) {
    Window w;
    const auto label = in.get<std::uint32_t>();
    if (label > 1) throw Error(Errc::BadModel, "window label " + std::to_string(label));
    w.label = static_cast<std::uint8_t>(label);
    w.origin.subject = in.get<std::uint32_t>();
    w.origin.trial = in.get<std::uint32_t>();
    w.origin.segment = in.get<std::uint32_t>();
    w.origin.start = in.get<std::uint32_t>();
    in.get_all(std::span(buf));
    w.values.assign(buf.begin(), buf.end());
    set.push_back(std::move(w));
  }
  return set;
}

inline void save_windows(const std::filesystem::path& path, const WindowSet& set) {
  write_file_bytes(path, encode_windows(set));
}

inline WindowSet load_windows(const std::filesystem::path& path) {
  return decode_windows(read_file_bytes(path));
}

// windows.bin -> windows.train.bin etc.
inline std::filesystem::path split_path(const std::filesystem::path& base, std::string_view part) {
  auto p = base;
  p.replace_filename(base.stem().string() + "." + std::string(part) + base.extension().string());
  return p;
}

}  // namespace fog::windows
