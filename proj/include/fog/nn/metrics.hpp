#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "fog/error.hpp"

namespace fog::nn {

struct Confusion {
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tp = 0;

  std::size_t total() const { return tn + fp + fn + tp; }
  bool operator==(const Confusion&) const = default;
};

// Per-class accuracy is recall: correct_c / total_c (0 when class c is absent).
struct EvalReport {
  Confusion confusion;
  double accuracy_overall = 0.0;
  std::array<double, 2> accuracy_per_class{0.0, 0.0};
  double loss = 0.0;
};

inline EvalReport report_from_predictions(std::span<const std::uint8_t> truth,
                                          std::span<const std::uint8_t> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(Errc::ShapeMismatch, "truth and prediction lengths differ");
  }
  EvalReport r;
  auto& c = r.confusion;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] > 1 || predicted[i] > 1) throw Error(Errc::InvalidArgument, "labels must be 0/1");
    if (truth[i] == 0) {
      (predicted[i] == 0 ? c.tn : c.fp)++;
    } else {
      (predicted[i] == 1 ? c.tp : c.fn)++;
    }
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  r.accuracy_overall = ratio(c.tn + c.tp, c.total());
  r.accuracy_per_class = {ratio(c.tn, c.tn + c.fp), ratio(c.tp, c.tp + c.fn)};
  return r;
}

}  // namespace fog::nn
