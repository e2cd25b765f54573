#pragma once

// Frozen int8 model: freezing, calibration, packing to model.q.bin and the
// integer-only inference path shared by the host and the simulated device.
//
// model.q.bin (little-endian):
//   "FOGM", u32 version=1, u32 n_layers, u32 steps, u32 channels,
//   NormStats (mean xyz, std xyz as float32),
//   input QuantParams (f32 scale, i32 zero_point), output QuantParams,
//   then per layer: u8 kind {0=conv1d, 1=maxpool, 2=dense} and
//     conv1d : u32 filters, kernel, in_channels, activation; output QP; weight QP;
//              int8 weights (kernel, in_channels, filters); int32 bias (filters)
//     maxpool: u32 pool; output QP
//     dense  : u32 in, out, activation; output QP; weight QP;
//              int8 weights (in, out); int32 bias (out)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fog/byteio.hpp"
#include "fog/error.hpp"
#include "fog/nn/model.hpp"
#include "fog/quant/quantize.hpp"
#include "fog/rng.hpp"
#include "fog/windows.hpp"

namespace fog::quant {

inline constexpr std::uint32_t kPackedVersion = 1;
inline constexpr std::size_t kFlashBudget = 1'048'576;
inline constexpr std::size_t kHeaderBytes = 4 + 4 * 4 + 6 * 4 + 2 * 8;

// Drops dropout layers; inference output is unchanged bit for bit.
inline nn::Model freeze(const nn::Model& model) {
  nn::Model out{model.input, {}};
  for (const auto& layer : model.layers) {
    if (!std::holds_alternative<nn::Dropout>(layer)) out.layers.push_back(layer);
  }
  return out;
}

// ---- calibration ----

struct Calibration {
  QuantParams input;
  std::vector<QuantParams> outputs;   // one per layer of the frozen model
  std::vector<QuantParams> weights;   // conv/dense only; unused entries default
  std::vector<std::string> degenerate;  // tensors that hit the range fallback
};

// Seeded sample (without replacement) of up to n windows.
inline windows::WindowSet calibration_sample(const windows::WindowSet& set, std::size_t n,
                                             std::uint64_t seed) {
  std::vector<std::size_t> idx(set.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span(idx));
  idx.resize(std::min(n, idx.size()));
  std::sort(idx.begin(), idx.end());
  windows::WindowSet out;
  for (auto i : idx) out.push_back(set[i]);
  return out;
}

// Min/max range per tensor over the (standardized) calibration windows.
// Max-pool outputs reuse their input's parameters.
inline Calibration calibrate(const nn::Model& model, const windows::WindowSet& calib_set) {
  if (calib_set.empty()) throw Error(Errc::EmptyCalibrationSet, "no calibration windows");
  const nn::Model frozen = freeze(model);
  const std::size_t L = frozen.layers.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo(L + 1, inf), hi(L + 1, -inf);

  nn::ExampleCache cache;
  for (const auto& w : calib_set) {
    if (w.values.size() != frozen.input.size()) {
      throw Error(Errc::ShapeMismatch, "calibration window does not match model input");
    }
    nn::forward_example(frozen, w.values, false, nullptr, &cache);
    for (std::size_t t = 0; t <= L; ++t) {
      const auto [mn, mx] = std::minmax_element(cache.acts[t].begin(), cache.acts[t].end());
      lo[t] = std::min(lo[t], *mn);
      hi[t] = std::max(hi[t], *mx);
    }
  }

  Calibration cal;
  auto range = [&](std::size_t t, const std::string& name) {
    const auto r = affine_from_range(lo[t], hi[t]);
    if (r.degenerate) cal.degenerate.push_back(name);
    return r.params;
  };
  cal.input = range(0, "input");
  cal.outputs.resize(L);
  cal.weights.resize(L);
  for (std::size_t i = 0; i < L; ++i) {
    const auto& layer = frozen.layers[i];
    const QuantParams in_q = i == 0 ? cal.input : cal.outputs[i - 1];
    if (std::holds_alternative<nn::MaxPool1D>(layer)) {
      cal.outputs[i] = in_q;
      continue;
    }
    cal.outputs[i] = range(i + 1, "layer" + std::to_string(i) + ".output");
    const auto& w = std::holds_alternative<nn::Conv1D>(layer) ? std::get<nn::Conv1D>(layer).weight
                                                              : std::get<nn::Dense>(layer).weight;
    double absmax = 0.0;
    for (double x : w) absmax = std::max(absmax, std::abs(x));
    const auto r = symmetric_from_absmax(absmax);
    if (r.degenerate) cal.degenerate.push_back("layer" + std::to_string(i) + ".weight");
    cal.weights[i] = r.params;
  }
  return cal;
}

// ---- packed model ----

struct QConv1D {
  std::uint32_t filters = 0, kernel = 0, in_channels = 0;
  nn::Activation activation = nn::Activation::ReLU;
  QuantParams output, weight_q;
  std::vector<std::int8_t> weights;
  std::vector<std::int32_t> bias;

  bool operator==(const QConv1D&) const = default;
};

struct QMaxPool1D {
  std::uint32_t pool = 2;
  QuantParams output;

  bool operator==(const QMaxPool1D&) const = default;
};

struct QDense {
  std::uint32_t in = 0, out = 0;
  nn::Activation activation = nn::Activation::None;
  QuantParams output, weight_q;
  std::vector<std::int8_t> weights;
  std::vector<std::int32_t> bias;

  bool operator==(const QDense&) const = default;
};

using QLayer = std::variant<QConv1D, QMaxPool1D, QDense>;

struct PackedModel {
  nn::Shape input{windows::kWindowLen, windows::kAxes};
  std::array<float, 3> mean{0, 0, 0};
  std::array<float, 3> std{1, 1, 1};
  QuantParams input_q, output_q;
  std::vector<QLayer> layers;

  bool operator==(const PackedModel&) const = default;
};

// Serialized size in bytes.
inline std::size_t total_size_bytes(const PackedModel& m) {
  std::size_t n = kHeaderBytes;
  for (const auto& layer : m.layers) {
    n += 1;
    if (const auto* c = std::get_if<QConv1D>(&layer)) {
      n += 16 + 16 + c->weights.size() + 4 * c->bias.size();
    } else if (std::holds_alternative<QMaxPool1D>(layer)) {
      n += 4 + 8;
    } else {
      const auto& d = std::get<QDense>(layer);
      n += 12 + 16 + d.weights.size() + 4 * d.bias.size();
    }
  }
  return n;
}

// Size the float model will occupy once frozen and packed.
inline std::size_t packed_size_bytes(const nn::Model& model) {
  std::size_t n = kHeaderBytes;
  for (const auto& layer : model.layers) {
    if (const auto* c = std::get_if<nn::Conv1D>(&layer)) {
      n += 1 + 16 + 16 + c->weight.size() + 4 * c->bias.size();
    } else if (std::holds_alternative<nn::MaxPool1D>(layer)) {
      n += 1 + 4 + 8;
    } else if (const auto* d = std::get_if<nn::Dense>(&layer)) {
      n += 1 + 12 + 16 + d->weight.size() + 4 * d->bias.size();
    }
  }
  return n;
}

namespace detail {

inline std::vector<std::int8_t> quantize_weights(const std::vector<double>& w, QuantParams q) {
  std::vector<std::int8_t> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = quantize(w[i], q);
  return out;
}

inline std::vector<std::int32_t> quantize_bias(const std::vector<double>& b, double scale) {
  std::vector<std::int32_t> out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    out[i] = static_cast<std::int32_t>(std::clamp(std::round(b[i] / scale), -2147483648.0, 2147483647.0));
  }
  return out;
}

inline void validate_packed(const PackedModel& m);

}  // namespace detail

// Quantizes a float model with its calibration. Throws
// SizeBudgetExceeded when the packed form would reach `budget` bytes.
inline PackedModel pack(const nn::Model& model, const Calibration& cal,
                        const windows::NormStats& norm, std::size_t budget = kFlashBudget) {
  const nn::Model frozen = freeze(model);
  nn::layer_shapes(frozen);
  if (cal.outputs.size() != frozen.layers.size() || cal.weights.size() != frozen.layers.size()) {
    throw Error(Errc::InvalidArgument, "calibration does not match the frozen model");
  }
  PackedModel p;
  p.input = frozen.input;
  for (std::size_t a = 0; a < 3; ++a) {
    p.mean[a] = static_cast<float>(norm.mean[a]);
    p.std[a] = static_cast<float>(norm.std[a]);
  }
  p.input_q = cal.input;
  QuantParams in_q = cal.input;
  for (std::size_t i = 0; i < frozen.layers.size(); ++i) {
    const auto& layer = frozen.layers[i];
    const double bias_scale = static_cast<double>(in_q.scale) * cal.weights[i].scale;
    if (const auto* c = std::get_if<nn::Conv1D>(&layer)) {
      p.layers.emplace_back(QConv1D{static_cast<std::uint32_t>(c->filters),
                                    static_cast<std::uint32_t>(c->kernel),
                                    static_cast<std::uint32_t>(c->in_channels), c->activation,
                                    cal.outputs[i], cal.weights[i],
                                    detail::quantize_weights(c->weight, cal.weights[i]),
                                    detail::quantize_bias(c->bias, bias_scale)});
    } else if (const auto* mp = std::get_if<nn::MaxPool1D>(&layer)) {
      p.layers.emplace_back(QMaxPool1D{static_cast<std::uint32_t>(mp->pool), in_q});
    } else {
      const auto& d = std::get<nn::Dense>(layer);
      p.layers.emplace_back(QDense{static_cast<std::uint32_t>(d.in), static_cast<std::uint32_t>(d.out),
                                   d.activation, cal.outputs[i], cal.weights[i],
                                   detail::quantize_weights(d.weight, cal.weights[i]),
                                   detail::quantize_bias(d.bias, bias_scale)});
    }
    in_q = std::visit([](const auto& l) { return l.output; }, p.layers.back());
  }
  p.output_q = in_q;
  detail::validate_packed(p);
  const auto size = total_size_bytes(p);
  if (size >= budget) {
    throw Error(Errc::SizeBudgetExceeded, std::to_string(size) + " bytes >= budget " +
                                              std::to_string(budget));
  }
  return p;
}

// ---- serialization ----

namespace detail {

inline void put_q(ByteWriter& out, QuantParams q) {
  out.put(q.scale);
  out.put(q.zero_point);
}

inline QuantParams get_q(ByteReader& in) {
  QuantParams q;
  q.scale = in.get<float>();
  q.zero_point = in.get<std::int32_t>();
  return q;
}

template <typename T>
std::vector<T> get_blob(ByteReader& in, std::size_t n) {
  if (n > in.remaining() / sizeof(T)) throw Error(Errc::UnexpectedEOF, "blob runs past end of data");
  std::vector<T> v(n);
  in.get_all(std::span(v));
  return v;
}

inline void check_q(QuantParams q, const std::string& what) {
  if (!(q.scale > 0.0f) || !std::isfinite(q.scale) || q.zero_point < -128 || q.zero_point > 127) {
    throw Error(Errc::BadModel, what + ": invalid quantization parameters");
  }
}

// Shape and parameter consistency of an in-memory packed model.
inline void validate_packed(const PackedModel& m) {
  check_q(m.input_q, "input");
  check_q(m.output_q, "output");
  if (m.input.size() == 0) throw Error(Errc::BadModel, "empty input shape");
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(m.std[a] > 0.0f) || !std::isfinite(m.mean[a])) throw Error(Errc::BadModel, "invalid NormStats");
  }
  nn::Shape cur = m.input;
  QuantParams in_q = m.input_q;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const std::string where = "layer " + std::to_string(i);
    if (const auto* c = std::get_if<QConv1D>(&m.layers[i])) {
      check_q(c->output, where);
      check_q(c->weight_q, where);
      if (c->in_channels != cur.channels || c->kernel == 0 || c->kernel > cur.steps ||
          c->filters == 0 || c->weights.size() != std::size_t{c->kernel} * c->in_channels * c->filters ||
          c->bias.size() != c->filters) {
        throw Error(Errc::BadModel, where + ": conv1d does not fit its input");
      }
      cur = {cur.steps - c->kernel + 1, c->filters};
      in_q = c->output;
    } else if (const auto* p = std::get_if<QMaxPool1D>(&m.layers[i])) {
      if (p->pool == 0 || p->pool > cur.steps) throw Error(Errc::BadModel, where + ": bad pool");
      if (p->output != in_q) throw Error(Errc::BadModel, where + ": maxpool must keep its input scale");
      cur = {cur.steps / p->pool, cur.channels};
    } else {
      const auto& d = std::get<QDense>(m.layers[i]);
      check_q(d.output, where);
      check_q(d.weight_q, where);
      if (d.in != cur.size() || d.out == 0 || d.weights.size() != std::size_t{d.in} * d.out ||
          d.bias.size() != d.out) {
        throw Error(Errc::BadModel, where + ": dense does not fit its input");
      }
      cur = {1, d.out};
      in_q = d.output;
    }
  }
  if (cur.size() != 2) throw Error(Errc::BadModel, "model must end in exactly 2 logits");
  if (in_q != m.output_q) throw Error(Errc::BadModel, "output parameters disagree with last layer");
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const PackedModel& m) {
  ByteWriter out;
  out.magic("FOGM");
  out.put(kPackedVersion);
  out.put(static_cast<std::uint32_t>(m.layers.size()));
  out.put(static_cast<std::uint32_t>(m.input.steps));
  out.put(static_cast<std::uint32_t>(m.input.channels));
  for (float v : m.mean) out.put(v);
  for (float v : m.std) out.put(v);
  detail::put_q(out, m.input_q);
  detail::put_q(out, m.output_q);
  for (const auto& layer : m.layers) {
    if (const auto* c = std::get_if<QConv1D>(&layer)) {
      out.put<std::uint8_t>(0);
      out.put(c->filters);
      out.put(c->kernel);
      out.put(c->in_channels);
      out.put(static_cast<std::uint32_t>(c->activation));
      detail::put_q(out, c->output);
      detail::put_q(out, c->weight_q);
      out.put_all(std::span<const std::int8_t>(c->weights));
      out.put_all(std::span<const std::int32_t>(c->bias));
    } else if (const auto* p = std::get_if<QMaxPool1D>(&layer)) {
      out.put<std::uint8_t>(1);
      out.put(p->pool);
      detail::put_q(out, p->output);
    } else {
      const auto& d = std::get<QDense>(layer);
      out.put<std::uint8_t>(2);
      out.put(d.in);
      out.put(d.out);
      out.put(static_cast<std::uint32_t>(d.activation));
      detail::put_q(out, d.output);
      detail::put_q(out, d.weight_q);
      out.put_all(std::span<const std::int8_t>(d.weights));
      out.put_all(std::span<const std::int32_t>(d.bias));
    }
  }
  return std::move(out).bytes();
}

inline PackedModel unpack(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (!in.magic("FOGM")) throw Error(Errc::BadMagic, "not a packed model");
  const auto version = in.get<std::uint32_t>();
  if (version != kPackedVersion) throw Error(Errc::BadVersion, "packed model version " + std::to_string(version));
  PackedModel m;
  const auto n_layers = in.get<std::uint32_t>();
  m.input.steps = in.get<std::uint32_t>();
  m.input.channels = in.get<std::uint32_t>();
  for (auto& v : m.mean) v = in.get<float>();
  for (auto& v : m.std) v = in.get<float>();
  m.input_q = detail::get_q(in);
  m.output_q = detail::get_q(in);
  auto activation = [&in] {
    const auto a = in.get<std::uint32_t>();
    if (a > 1) throw Error(Errc::BadModel, "unknown activation " + std::to_string(a));
    return static_cast<nn::Activation>(a);
  };
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const auto kind = in.get<std::uint8_t>();
    if (kind == 0) {
      QConv1D c;
      c.filters = in.get<std::uint32_t>();
      c.kernel = in.get<std::uint32_t>();
      c.in_channels = in.get<std::uint32_t>();
      c.activation = activation();
      c.output = detail::get_q(in);
      c.weight_q = detail::get_q(in);
      c.weights = detail::get_blob<std::int8_t>(in, std::size_t{c.kernel} * c.in_channels * c.filters);
      c.bias = detail::get_blob<std::int32_t>(in, c.filters);
      m.layers.emplace_back(std::move(c));
    } else if (kind == 1) {
      QMaxPool1D p;
      p.pool = in.get<std::uint32_t>();
      p.output = detail::get_q(in);
      m.layers.emplace_back(p);
    } else if (kind == 2) {
      QDense d;
      d.in = in.get<std::uint32_t>();
      d.out = in.get<std::uint32_t>();
      d.activation = activation();
      d.output = detail::get_q(in);
      d.weight_q = detail::get_q(in);
      d.weights = detail::get_blob<std::int8_t>(in, std::size_t{d.in} * d.out);
      d.bias = detail::get_blob<std::int32_t>(in, d.out);
      m.layers.emplace_back(std::move(d));
    } else {
      throw Error(Errc::BadModel, "unknown layer kind " + std::to_string(kind));
    }
  }
  if (in.remaining() != 0) throw Error(Errc::BadModel, "trailing bytes after last layer");
  detail::validate_packed(m);
  return m;
}

inline void save_packed(const std::filesystem::path& path, const PackedModel& m) {
  write_file_bytes(path, serialize(m));
}

inline PackedModel load_packed(const std::filesystem::path& path) {
  return unpack(read_file_bytes(path));
}

// C array form of a packed model, for embedding in firmware sources.
inline std::string to_c_header(std::span<const std::uint8_t> bytes, const std::string& name = "g_model") {
  static constexpr char hex[] = "0123456789abcdef";
  std::string out = "// Generated packed model, " + std::to_string(bytes.size()) + " bytes.\n";
  out += "alignas(8) const unsigned char " + name + "[] = {";
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i % 12 == 0) out += "\n  ";
    out += "0x";
    out += hex[bytes[i] >> 4];
    out += hex[bytes[i] & 0xF];
    out += i + 1 < bytes.size() ? ", " : "";
  }
  out += "\n};\nconst unsigned int " + name + "_len = " + std::to_string(bytes.size()) + ";\n";
  return out;
}

// ---- integer inference ----

// Derived per-model constants, computed once per model.
struct InferencePlan {
  std::vector<Requantizer> requant;  // per layer; unused for maxpool
  std::vector<nn::Shape> shapes;     // output shape per layer
  std::size_t max_activation = 0;    // largest tensor, input included
};

inline InferencePlan make_plan(const PackedModel& m) {
  InferencePlan plan;
  nn::Shape cur = m.input;
  QuantParams in_q = m.input_q;
  plan.max_activation = cur.size();
  for (const auto& layer : m.layers) {
    Requantizer rq;
    if (const auto* c = std::get_if<QConv1D>(&layer)) {
      rq = Requantizer::from_real(static_cast<double>(in_q.scale) * c->weight_q.scale / c->output.scale);
      cur = {cur.steps - c->kernel + 1, c->filters};
      in_q = c->output;
    } else if (const auto* p = std::get_if<QMaxPool1D>(&layer)) {
      cur = {cur.steps / p->pool, cur.channels};
    } else {
      const auto& d = std::get<QDense>(layer);
      rq = Requantizer::from_real(static_cast<double>(in_q.scale) * d.weight_q.scale / d.output.scale);
      cur = {1, d.out};
      in_q = d.output;
    }
    plan.requant.push_back(rq);
    plan.shapes.push_back(cur);
    plan.max_activation = std::max(plan.max_activation, cur.size());
  }
  return plan;
}

struct QuantizedOutput {
  std::uint8_t label = 0;
  std::uint8_t prob_uint8 = 0;
  std::array<double, 2> probs{0.5, 0.5};
};

// Standardizes raw float32 samples with the header statistics (float32
// arithmetic) and quantizes them. Non-finite standardized values become 0;
// returns how many were replaced.
inline std::size_t prepare_input(const PackedModel& m, std::span<const float> raw,
                                 std::span<std::int8_t> out) {
  if (raw.size() != m.input.size() || out.size() != raw.size()) {
    throw Error(Errc::ShapeMismatch, "input length does not match the model");
  }
  std::size_t replaced = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::size_t a = i % 3;
    float z = (raw[i] - m.mean[a]) / m.std[a];
    if (!std::isfinite(z)) {
      z = 0.0f;
      ++replaced;
    }
    out[i] = quantize(z, m.input_q);
  }
  return replaced;
}

namespace detail {

inline std::int8_t requantize(std::int32_t acc, const Requantizer& rq, QuantParams out_q,
                              nn::Activation act) {
  std::int32_t v = rq.apply(acc) + out_q.zero_point;
  const std::int32_t lo = act == nn::Activation::ReLU ? std::max(out_q.zero_point, -128) : -128;
  return static_cast<std::int8_t>(std::clamp(v, lo, 127));
}

}  // namespace detail

// Integer-only forward pass using two caller-provided scratch buffers of at
// least plan.max_activation bytes each; allocates nothing.
inline QuantizedOutput quantized_forward(const PackedModel& m, const InferencePlan& plan,
                                         std::span<const std::int8_t> input,
                                         std::span<std::int8_t> scratch_a,
                                         std::span<std::int8_t> scratch_b) {
  if (input.size() != m.input.size() || scratch_a.size() < plan.max_activation ||
      scratch_b.size() < plan.max_activation) {
    throw Error(Errc::ShapeMismatch, "quantized input or scratch has the wrong size");
  }
  std::copy(input.begin(), input.end(), scratch_a.begin());
  std::int8_t* cur = scratch_a.data();
  std::int8_t* next = scratch_b.data();
  nn::Shape shape = m.input;
  QuantParams in_q = m.input_q;

  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const auto& layer = m.layers[i];
    if (const auto* c = std::get_if<QConv1D>(&layer)) {
      const std::size_t C = c->in_channels, F = c->filters, K = c->kernel;
      const std::size_t t_out = shape.steps - K + 1;
      for (std::size_t t = 0; t < t_out; ++t) {
        for (std::size_t f = 0; f < F; ++f) {
          std::int32_t acc = c->bias[f];
          for (std::size_t k = 0; k < K; ++k) {
            const std::int8_t* x = cur + (t + k) * C;
            const std::int8_t* w = c->weights.data() + k * C * F + f;
            for (std::size_t ch = 0; ch < C; ++ch) {
              acc += (static_cast<std::int32_t>(x[ch]) - in_q.zero_point) * w[ch * F];
            }
          }
          next[t * F + f] = detail::requantize(acc, plan.requant[i], c->output, c->activation);
        }
      }
      shape = {t_out, F};
      in_q = c->output;
    } else if (const auto* p = std::get_if<QMaxPool1D>(&layer)) {
      const std::size_t C = shape.channels, t_out = shape.steps / p->pool;
      for (std::size_t t = 0; t < t_out; ++t) {
        for (std::size_t ch = 0; ch < C; ++ch) {
          std::int8_t best = cur[t * p->pool * C + ch];
          for (std::size_t j = 1; j < p->pool; ++j) best = std::max(best, cur[(t * p->pool + j) * C + ch]);
          next[t * C + ch] = best;
        }
      }
      shape = {t_out, C};
    } else {
      const auto& d = std::get<QDense>(layer);
      for (std::size_t o = 0; o < d.out; ++o) {
        std::int32_t acc = d.bias[o];
        for (std::size_t k = 0; k < d.in; ++k) {
          acc += (static_cast<std::int32_t>(cur[k]) - in_q.zero_point) * d.weights[k * d.out + o];
        }
        next[o] = detail::requantize(acc, plan.requant[i], d.output, d.activation);
      }
      shape = {1, d.out};
      in_q = d.output;
    }
    std::swap(cur, next);
  }

  QuantizedOutput out;
  const std::array<double, 2> logit{dequantize(cur[0], m.output_q), dequantize(cur[1], m.output_q)};
  std::array<double, 2> probs{};
  nn::softmax(logit, probs);
  out.probs = probs;
  out.label = probs[1] > probs[0] ? 1 : 0;
  out.prob_uint8 = static_cast<std::uint8_t>(std::lround(255.0 * probs[out.label]));
  return out;
}

// Convenience overload that owns its scratch.
inline QuantizedOutput quantized_forward(const PackedModel& m, std::span<const std::int8_t> input) {
  const auto plan = make_plan(m);
  std::vector<std::int8_t> a(plan.max_activation), b(plan.max_activation);
  return quantized_forward(m, plan, input, a, b);
}

// Raw float32 window -> label via the integer path.
inline QuantizedOutput classify_raw(const PackedModel& m, std::span<const float> raw) {
  std::vector<std::int8_t> q(raw.size());
  prepare_input(m, raw, q);
  return quantized_forward(m, q);
}

}  // namespace fog::quant
