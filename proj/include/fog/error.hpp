#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fog {

enum class Errc {
  MalformedLine,
  NonMonotonicTime,
  EmptyClass,
  DegenerateAxis,
  InvalidFractions,
  ShapeMismatch,
  EmptyCalibrationSet,
  SizeBudgetExceeded,
  BadMagic,
  BadVersion,
  UnexpectedEOF,
  BadModel,
  FlashBudgetExceeded,
  RamBudgetExceeded,
  TransportTimeout,
  ShortReply,
  InvalidArgument,
  Io,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::NonMonotonicTime: return "NonMonotonicTime";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::DegenerateAxis: return "DegenerateAxis";
    case Errc::InvalidFractions: return "InvalidFractions";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyCalibrationSet: return "EmptyCalibrationSet";
    case Errc::SizeBudgetExceeded: return "SizeBudgetExceeded";
    case Errc::BadMagic: return "BadMagic";
    case Errc::BadVersion: return "BadVersion";
    case Errc::UnexpectedEOF: return "UnexpectedEOF";
    case Errc::BadModel: return "BadModel";
    case Errc::FlashBudgetExceeded: return "FlashBudgetExceeded";
    case Errc::RamBudgetExceeded: return "RamBudgetExceeded";
    case Errc::TransportTimeout: return "TransportTimeout";
    case Errc::ShortReply: return "ShortReply";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

// Every failure in the library is reported through this one exception type;
// callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Error(Errc code, const std::string& what, std::size_t line_no)
      : std::runtime_error(std::string(to_string(code)) + " at line " + std::to_string(line_no) +
                           ": " + what),
        code_(code),
        line_(line_no) {}

  Errc code() const noexcept { return code_; }

  // 1-based source line for parse errors.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  Errc code_;
  std::optional<std::size_t> line_;
};

}  // namespace fog
