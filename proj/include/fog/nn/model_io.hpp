#pragma once

// model.fp.bin: float model plus the standardization it was trained with.
//
//   "FOGF", u32 version=1, NormStats (mean xyz, std xyz as float32),
//   u32 input steps, u32 input channels, u32 n_layers, then per layer a u8
//   kind {0=conv1d, 1=maxpool, 2=dense, 3=dropout} followed by
//     conv1d : u32 filters, kernel, in_channels, activation; f32 weights; f32 bias
//     maxpool: u32 pool
//     dense  : u32 in, out, activation; f32 weights; f32 bias
//     dropout: f32 rate
//   All little-endian.

#include <filesystem>
#include <variant>
#include <vector>

#include "fog/byteio.hpp"
#include "fog/nn/model.hpp"
#include "fog/windows.hpp"

namespace fog::nn {

struct FloatModelFile {
  Model model;
  windows::NormStats norm;
};

inline constexpr std::uint32_t kFloatModelVersion = 1;

namespace detail {

inline void put_floats(ByteWriter& out, const std::vector<double>& values) {
  std::vector<float> buf(values.begin(), values.end());
  out.put_all(std::span<const float>(buf));
}

inline std::vector<double> get_floats(ByteReader& in, std::size_t n) {
  if (n > in.remaining() / sizeof(float)) {
    throw Error(Errc::UnexpectedEOF, "weight blob runs past end of file");
  }
  std::vector<float> buf(n);
  in.get_all(std::span(buf));
  return {buf.begin(), buf.end()};
}

inline Activation get_activation(ByteReader& in) {
  const auto a = in.get<std::uint32_t>();
  if (a > 1) throw Error(Errc::BadModel, "unknown activation " + std::to_string(a));
  return static_cast<Activation>(a);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_float_model(const FloatModelFile& file) {
  layer_shapes(file.model);
  ByteWriter out;
  out.magic("FOGF");
  out.put(kFloatModelVersion);
  for (double m : file.norm.mean) out.put(static_cast<float>(m));
  for (double s : file.norm.std) out.put(static_cast<float>(s));
  out.put(static_cast<std::uint32_t>(file.model.input.steps));
  out.put(static_cast<std::uint32_t>(file.model.input.channels));
  out.put(static_cast<std::uint32_t>(file.model.layers.size()));
  for (const auto& layer : file.model.layers) {
    std::visit(
        [&](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, Conv1D>) {
            out.put<std::uint8_t>(0);
            out.put(static_cast<std::uint32_t>(l.filters));
            out.put(static_cast<std::uint32_t>(l.kernel));
            out.put(static_cast<std::uint32_t>(l.in_channels));
            out.put(static_cast<std::uint32_t>(l.activation));
            detail::put_floats(out, l.weight);
            detail::put_floats(out, l.bias);
          } else if constexpr (std::is_same_v<T, MaxPool1D>) {
            out.put<std::uint8_t>(1);
            out.put(static_cast<std::uint32_t>(l.pool));
          } else if constexpr (std::is_same_v<T, Dense>) {
            out.put<std::uint8_t>(2);
            out.put(static_cast<std::uint32_t>(l.in));
            out.put(static_cast<std::uint32_t>(l.out));
            out.put(static_cast<std::uint32_t>(l.activation));
            detail::put_floats(out, l.weight);
            detail::put_floats(out, l.bias);
          } else {
            out.put<std::uint8_t>(3);
            out.put(static_cast<float>(l.rate));
          }
        },
        layer);
  }
  return std::move(out).bytes();
}

inline FloatModelFile decode_float_model(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (!in.magic("FOGF")) throw Error(Errc::BadMagic, "not a float model file");
  const auto version = in.get<std::uint32_t>();
  if (version != kFloatModelVersion) {
    throw Error(Errc::BadVersion, "float model version " + std::to_string(version));
  }
  FloatModelFile file;
  for (auto& m : file.norm.mean) m = in.get<float>();
  for (auto& s : file.norm.std) s = in.get<float>();
  file.model.input.steps = in.get<std::uint32_t>();
  file.model.input.channels = in.get<std::uint32_t>();
  const auto n_layers = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const auto kind = in.get<std::uint8_t>();
    switch (kind) {
      case 0: {
        Conv1D c;
        c.filters = in.get<std::uint32_t>();
        c.kernel = in.get<std::uint32_t>();
        c.in_channels = in.get<std::uint32_t>();
        c.activation = detail::get_activation(in);
        c.weight = detail::get_floats(in, c.kernel * c.in_channels * c.filters);
        c.bias = detail::get_floats(in, c.filters);
        file.model.layers.emplace_back(std::move(c));
        break;
      }
      case 1: file.model.layers.emplace_back(MaxPool1D{in.get<std::uint32_t>()}); break;
      case 2: {
        Dense d;
        d.in = in.get<std::uint32_t>();
        d.out = in.get<std::uint32_t>();
        d.activation = detail::get_activation(in);
        d.weight = detail::get_floats(in, d.in * d.out);
        d.bias = detail::get_floats(in, d.out);
        file.model.layers.emplace_back(std::move(d));
        break;
      }
      case 3: file.model.layers.emplace_back(Dropout{in.get<float>()}); break;
      default: throw Error(Errc::BadModel, "unknown layer kind " + std::to_string(kind));
    }
  }
  try {
    layer_shapes(file.model);
  } catch (const Error& e) {
    throw Error(Errc::BadModel, e.what());
  }
  return file;
}

inline void save_float_model(const std::filesystem::path& path, const FloatModelFile& file) {
  write_file_bytes(path, encode_float_model(file));
}

inline FloatModelFile load_float_model(const std::filesystem::path& path) {
  return decode_float_model(read_file_bytes(path));
}

}  // namespace fog::nn
