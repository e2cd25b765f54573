#pragma once

// Daphnet-style recording ingestion: parsing, channel projection, and
// splitting into contiguous in-experiment runs.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fog/error.hpp"

namespace fog::ingest {

using Vec3i = std::array<std::int32_t, 3>;

enum class Channel { Ankle, Thigh, Trunk };
enum class Format { DaphnetText, CSV };

// Annotation codes as recorded: 0 = outside the experiment, 1 = no freeze,
// 2 = freeze.
inline constexpr std::uint8_t kOutOfExperiment = 0;
inline constexpr std::uint8_t kNoFreeze = 1;
inline constexpr std::uint8_t kFreeze = 2;

struct RawRecord {
  std::int64_t time_ms = 0;
  Vec3i ankle{};
  Vec3i thigh{};
  Vec3i trunk{};
  std::uint8_t annotation = 0;

  const Vec3i& sensor(Channel ch) const {
    switch (ch) {
      case Channel::Ankle: return ankle;
      case Channel::Trunk: return trunk;
      case Channel::Thigh: break;
    }
    return thigh;
  }

  bool operator==(const RawRecord&) const = default;
};

struct Recording {
  std::string subject_id;
  std::string trial_id;
  std::vector<RawRecord> records;
  // Set once select_channel has projected the recording onto one sensor.
  std::optional<Channel> channel;

  bool operator==(const Recording&) const = default;
};

struct Sample {
  std::int64_t time_ms = 0;
  Vec3i accel{};
  std::uint8_t annotation = kNoFreeze;

  bool operator==(const Sample&) const = default;
};

struct CleanSeries {
  std::string subject_id;
  std::string trial_id;
  std::uint32_t segment_index = 0;
  std::vector<Sample> samples;

  bool operator==(const CleanSeries&) const = default;
};

// Inclusive time range to drop from one trial, for manual no-walking trims.
struct TimeExclusion {
  std::string subject_id;
  std::string trial_id;
  std::int64_t from_ms = 0;
  std::int64_t to_ms = 0;
};

inline std::optional<Channel> parse_channel(std::string_view name) {
  if (name == "ankle") return Channel::Ankle;
  if (name == "thigh") return Channel::Thigh;
  if (name == "trunk") return Channel::Trunk;
  return std::nullopt;
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, Format format) {
  std::vector<std::string_view> out;
  if (format == Format::CSV) {
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      out.push_back(field);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i >= line.size()) break;
      const std::size_t begin = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      out.push_back(line.substr(begin, i - begin));
    }
  }
  return out;
}

template <typename Int>
bool parse_int(std::string_view token, Int& out) {
  if (token.empty()) return false;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

inline bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace detail

// Parses 11-column sample lines (time, ankle xyz, thigh xyz, trunk xyz,
// annotation). Blank lines are skipped but still counted for line numbers.
inline std::vector<RawRecord> parse_records(std::string_view text, Format format) {
  std::vector<RawRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    auto line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::is_blank(line)) continue;

    const auto fields = detail::split_fields(line, format);
    if (fields.size() != 11) {
      throw Error(Errc::MalformedLine, "expected 11 fields, got " + std::to_string(fields.size()),
                  line_no);
    }
    RawRecord rec;
    if (!detail::parse_int(fields[0], rec.time_ms)) {
      throw Error(Errc::MalformedLine, "bad time token '" + std::string(fields[0]) + "'", line_no);
    }
    std::array<Vec3i*, 3> sensors{&rec.ankle, &rec.thigh, &rec.trunk};
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t axis = 0; axis < 3; ++axis) {
        const auto token = fields[1 + 3 * s + axis];
        if (!detail::parse_int(token, (*sensors[s])[axis])) {
          throw Error(Errc::MalformedLine, "bad acceleration token '" + std::string(token) + "'",
                      line_no);
        }
      }
    }
    int annotation = -1;
    if (!detail::parse_int(fields[10], annotation) || annotation < 0 || annotation > 2) {
      throw Error(Errc::MalformedLine, "annotation must be 0, 1 or 2, got '" +
                                           std::string(fields[10]) + "'",
                  line_no);
    }
    rec.annotation = static_cast<std::uint8_t>(annotation);
    if (!records.empty() && rec.time_ms <= records.back().time_ms) {
      throw Error(Errc::NonMonotonicTime,
                  "time " + std::to_string(rec.time_ms) + " after " +
                      std::to_string(records.back().time_ms),
                  line_no);
    }
    records.push_back(rec);
  }
  return records;
}

// Derives (subject, trial) from a file stem. Daphnet names look like
// "S01R02"; anything else becomes subject=<stem>, trial="T0".
inline std::pair<std::string, std::string> ids_from_stem(const std::string& stem) {
  static const std::regex daphnet(R"((S\d+)(R\d+))");
  std::smatch m;
  if (std::regex_match(stem, m, daphnet)) return {m[1].str(), m[2].str()};
  return {stem, "T0"};
}

inline Recording parse_file(const std::filesystem::path& path, Format format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto [subject, trial] = ids_from_stem(path.stem().string());
  return Recording{std::move(subject), std::move(trial), parse_records(buf.str(), format), {}};
}

inline Format format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? Format::CSV : Format::DaphnetText;
}

// Inverse of parse_records.
inline std::string format_records(const std::vector<RawRecord>& records, Format format) {
  const char sep = format == Format::CSV ? ',' : ' ';
  std::string out;
  for (const auto& r : records) {
    out += std::to_string(r.time_ms);
    for (const Vec3i* v : {&r.ankle, &r.thigh, &r.trunk}) {
      for (auto x : *v) {
        out += sep;
        out += std::to_string(x);
      }
    }
    out += sep;
    out += std::to_string(r.annotation);
    out += '\n';
  }
  return out;
}

// Projection onto one sensor: the other two sensors are zeroed. Idempotent.
inline Recording select_channel(const Recording& rec, Channel channel = Channel::Thigh) {
  Recording out{rec.subject_id, rec.trial_id, {}, channel};
  out.records.reserve(rec.records.size());
  for (const auto& r : rec.records) {
    RawRecord p{r.time_ms, {}, {}, {}, r.annotation};
    switch (channel) {
      case Channel::Ankle: p.ankle = r.ankle; break;
      case Channel::Thigh: p.thigh = r.thigh; break;
      case Channel::Trunk: p.trunk = r.trunk; break;
    }
    out.records.push_back(p);
  }
  return out;
}

// Splits a recording into maximal runs of in-experiment records. Records
// annotated 0 or falling inside an exclusion range for this trial break a
// run; gaps are never bridged. Samples carry the projected channel (thigh
// when the recording has not been projected).
inline std::vector<CleanSeries> clean(const Recording& rec,
                                      const std::vector<TimeExclusion>& exclusions = {}) {
  const Channel channel = rec.channel.value_or(Channel::Thigh);
  std::vector<const TimeExclusion*> mine;
  for (const auto& ex : exclusions) {
    if (ex.subject_id == rec.subject_id && ex.trial_id == rec.trial_id) mine.push_back(&ex);
  }
  auto excluded = [&](std::int64_t t) {
    return std::any_of(mine.begin(), mine.end(),
                       [t](const TimeExclusion* ex) { return t >= ex->from_ms && t <= ex->to_ms; });
  };

  std::vector<CleanSeries> out;
  bool in_run = false;
  for (const auto& r : rec.records) {
    const bool keep = r.annotation != kOutOfExperiment && !excluded(r.time_ms);
    if (!keep) {
      in_run = false;
      continue;
    }
    if (!in_run) {
      out.push_back(CleanSeries{rec.subject_id, rec.trial_id,
                                static_cast<std::uint32_t>(out.size()), {}});
      in_run = true;
    }
    out.back().samples.push_back(Sample{r.time_ms, r.sensor(channel), r.annotation});
  }
  return out;
}

// ---- cleaned CSV files: header "time_ms,x,y,z,annotation" ----

inline constexpr std::string_view kCleanHeader = "time_ms,x,y,z,annotation";

inline std::string clean_file_name(const CleanSeries& s) {
  return s.subject_id + "_" + s.trial_id + "_" + std::to_string(s.segment_index) + ".csv";
}

inline std::string format_clean_csv(const CleanSeries& s) {
  std::string out(kCleanHeader);
  out += '\n';
  for (const auto& p : s.samples) {
    out += std::to_string(p.time_ms);
    for (auto x : p.accel) {
      out += ',';
      out += std::to_string(x);
    }
    out += ',';
    out += std::to_string(p.annotation);
    out += '\n';
  }
  return out;
}

inline CleanSeries parse_clean_csv(std::string_view text, std::string subject, std::string trial,
                                   std::uint32_t segment) {
  CleanSeries s{std::move(subject), std::move(trial), segment, {}};
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    auto line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != kCleanHeader) throw Error(Errc::MalformedLine, "missing header", line_no);
      continue;
    }
    if (detail::is_blank(line)) continue;
    const auto fields = detail::split_fields(line, Format::CSV);
    if (fields.size() != 5) {
      throw Error(Errc::MalformedLine, "expected 5 fields, got " + std::to_string(fields.size()),
                  line_no);
    }
    Sample p;
    int annotation = 0;
    bool ok = detail::parse_int(fields[0], p.time_ms);
    for (std::size_t a = 0; a < 3; ++a) ok = ok && detail::parse_int(fields[1 + a], p.accel[a]);
    ok = ok && detail::parse_int(fields[4], annotation);
    if (!ok || (annotation != kNoFreeze && annotation != kFreeze)) {
      throw Error(Errc::MalformedLine, "bad cleaned sample", line_no);
    }
    p.annotation = static_cast<std::uint8_t>(annotation);
    if (!s.samples.empty() && p.time_ms <= s.samples.back().time_ms) {
      throw Error(Errc::NonMonotonicTime, "time does not increase", line_no);
    }
    s.samples.push_back(p);
  }
  if (line_no == 0) throw Error(Errc::MalformedLine, "missing header", 1);
  return s;
}

inline std::filesystem::path write_clean_csv(const CleanSeries& s,
                                             const std::filesystem::path& dir) {
  const auto path = dir / clean_file_name(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot create " + path.string());
  out << format_clean_csv(s);
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
  return path;
}

// Reads "<subject>_<trial>_<segment>.csv"; the subject may itself contain
// underscores.
inline CleanSeries read_clean_csv(const std::filesystem::path& path) {
  const std::string stem = path.stem().string();
  const auto last = stem.rfind('_');
  const auto mid = last == std::string::npos || last == 0 ? std::string::npos
                                                          : stem.rfind('_', last - 1);
  std::uint32_t segment = 0;
  if (mid == std::string::npos ||
      !detail::parse_int(std::string_view(stem).substr(last + 1), segment)) {
    throw Error(Errc::InvalidArgument, "cleaned file name must be <subject>_<trial>_<segment>.csv: " +
                                           path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_clean_csv(buf.str(), stem.substr(0, mid), stem.substr(mid + 1, last - mid - 1),
                         segment);
}

}  // namespace fog::ingest
