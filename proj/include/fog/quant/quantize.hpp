#pragma once

// Affine int8 quantization primitives and fixed-point requantization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace fog::quant {

inline constexpr float kDegenerateScale = 1e-6f;

// real ≈ (q - zero_point) * scale
struct QuantParams {
  float scale = 1.0f;
  std::int32_t zero_point = 0;

  bool operator==(const QuantParams&) const = default;
};

inline std::int8_t saturate_int8(double v) {
  return static_cast<std::int8_t>(std::clamp(v, -128.0, 127.0));
}

// clamp(round(x / scale) + zero_point, -128, 127), rounding half away from
// zero. NaN maps to the zero point.
inline std::int8_t quantize(double x, QuantParams q) {
  if (std::isnan(x)) return static_cast<std::int8_t>(std::clamp(q.zero_point, -128, 127));
  const double scaled = x / static_cast<double>(q.scale);
  if (!std::isfinite(scaled)) return scaled > 0 ? 127 : -128;
  return saturate_int8(std::round(scaled) + q.zero_point);
}

inline double dequantize(std::int8_t v, QuantParams q) {
  return static_cast<double>(static_cast<std::int32_t>(v) - q.zero_point) *
         static_cast<double>(q.scale);
}

struct RangeResult {
  QuantParams params;
  bool degenerate = false;  // max == min; fell back to kDegenerateScale
};

// scale = (max - min) / 255, zero_point = round(-128 - min / scale) clamped
// to [-128, 127].
inline RangeResult affine_from_range(double min, double max) {
  RangeResult r;
  r.degenerate = !(max > min);
  r.params.scale = r.degenerate ? kDegenerateScale : static_cast<float>((max - min) / 255.0);
  if (!(r.params.scale > 0.0f)) {
    r.params.scale = kDegenerateScale;
    r.degenerate = true;
  }
  const double zp = std::round(-128.0 - min / static_cast<double>(r.params.scale));
  r.params.zero_point = static_cast<std::int32_t>(std::clamp(zp, -128.0, 127.0));
  return r;
}

// Symmetric: zero_point 0, scale = max|w| / 127.
inline RangeResult symmetric_from_absmax(double absmax) {
  RangeResult r;
  r.params.scale = static_cast<float>(absmax / 127.0);
  if (!(r.params.scale > 0.0f) || !std::isfinite(r.params.scale)) {
    r.params.scale = kDegenerateScale;
    r.degenerate = true;
  }
  return r;
}

// Real multiplier m represented as mantissa * 2^(shift - 31) with the
// mantissa in [2^30, 2^31).
struct Requantizer {
  std::int32_t mantissa = 0;
  int shift = 0;

  static Requantizer from_real(double m) {
    Requantizer r;
    if (!(m > 0.0) || !std::isfinite(m)) return r;
    int exp = 0;
    const double frac = std::frexp(m, &exp);
    auto mant = static_cast<std::int64_t>(std::llround(frac * 2147483648.0));
    if (mant == (std::int64_t{1} << 31)) {
      mant /= 2;
      ++exp;
    }
    if (exp < -62) return r;
    r.mantissa = static_cast<std::int32_t>(mant);
    r.shift = exp;
    return r;
  }

  // round(acc * m), half away from zero, saturated to int32.
  std::int32_t apply(std::int32_t acc) const {
    const std::int64_t prod = static_cast<std::int64_t>(acc) * mantissa;
    const int right = 31 - shift;
    std::int64_t out;
    if (right <= 0) {
      const int left = -right;
      if (left >= 32) {
        out = prod == 0 ? 0 : (prod > 0 ? INT64_MAX : INT64_MIN);
      } else {
        const std::int64_t lim = INT64_MAX >> left;
        out = prod > lim ? INT64_MAX : (prod < -lim ? INT64_MIN : prod * (std::int64_t{1} << left));
      }
    } else if (right >= 63) {
      out = 0;
    } else {
      const std::uint64_t mag = prod < 0 ? static_cast<std::uint64_t>(-prod) : static_cast<std::uint64_t>(prod);
      const std::uint64_t rounded = (mag + (std::uint64_t{1} << (right - 1))) >> right;
      out = prod < 0 ? -static_cast<std::int64_t>(rounded) : static_cast<std::int64_t>(rounded);
    }
    return static_cast<std::int32_t>(
        std::clamp<std::int64_t>(out, std::numeric_limits<std::int32_t>::min(),
                                 std::numeric_limits<std::int32_t>::max()));
  }
};

}  // namespace fog::quant
