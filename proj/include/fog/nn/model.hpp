#pragma once

// Sequential 1-D CNN: layer definitions, initialization, forward pass with
// activation cache, softmax cross-entropy and exact backpropagation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fog/error.hpp"
#include "fog/nn/tensor.hpp"
#include "fog/rng.hpp"

namespace fog::nn {

enum class Activation : std::uint8_t { None = 0, ReLU = 1 };

// Weights laid out (kernel, in_channels, filters). Stride 1, no padding.
struct Conv1D {
  std::size_t in_channels = 0;
  std::size_t filters = 0;
  std::size_t kernel = 0;
  Activation activation = Activation::ReLU;
  std::vector<double> weight;
  std::vector<double> bias;

  bool operator==(const Conv1D&) const = default;
};

// Window and stride both equal `pool`; a trailing partial window is dropped.
struct MaxPool1D {
  std::size_t pool = 2;

  bool operator==(const MaxPool1D&) const = default;
};

// Inverted dropout: active only in training, scales kept units by 1/(1-rate).
struct Dropout {
  double rate = 0.0;

  bool operator==(const Dropout&) const = default;
};

// Flattens its (steps, channels) input. Weights laid out (in, out).
struct Dense {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::None;
  std::vector<double> weight;
  std::vector<double> bias;

  bool operator==(const Dense&) const = default;
};

using Layer = std::variant<Conv1D, MaxPool1D, Dropout, Dense>;

struct Shape {
  std::size_t steps = 0;
  std::size_t channels = 0;

  std::size_t size() const { return steps * channels; }
  bool operator==(const Shape&) const = default;
};

struct Model {
  Shape input{129, 3};
  std::vector<Layer> layers;

  bool operator==(const Model&) const = default;
};

// Output shape of each layer; throws ShapeMismatch on any inconsistency.
inline std::vector<Shape> layer_shapes(const Model& model) {
  std::vector<Shape> shapes;
  Shape cur = model.input;
  if (cur.size() == 0) throw Error(Errc::ShapeMismatch, "empty input shape");
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const std::string where = "layer " + std::to_string(i) + ": ";
    std::visit(
        [&](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, Conv1D>) {
            if (l.in_channels != cur.channels || l.kernel == 0 || l.kernel > cur.steps ||
                l.filters == 0 || l.weight.size() != l.kernel * l.in_channels * l.filters ||
                l.bias.size() != l.filters) {
              throw Error(Errc::ShapeMismatch, where + "conv1d does not fit its input");
            }
            cur = {cur.steps - l.kernel + 1, l.filters};
          } else if constexpr (std::is_same_v<T, MaxPool1D>) {
            if (l.pool == 0 || l.pool > cur.steps) {
              throw Error(Errc::ShapeMismatch, where + "pool wider than input");
            }
            cur = {cur.steps / l.pool, cur.channels};
          } else if constexpr (std::is_same_v<T, Dropout>) {
            if (!(l.rate >= 0.0 && l.rate < 1.0)) {
              throw Error(Errc::ShapeMismatch, where + "dropout rate outside [0,1)");
            }
          } else {
            if (l.in != cur.size() || l.out == 0 || l.weight.size() != l.in * l.out ||
                l.bias.size() != l.out) {
              throw Error(Errc::ShapeMismatch, where + "dense does not fit its input");
            }
            cur = {1, l.out};
          }
        },
        model.layers[i]);
    shapes.push_back(cur);
  }
  return shapes;
}

inline std::size_t output_size(const Model& model) {
  const auto shapes = layer_shapes(model);
  return shapes.empty() ? model.input.size() : shapes.back().size();
}

inline std::size_t parameter_count(const Model& model) {
  std::size_t n = 0;
  for (const auto& layer : model.layers) {
    if (const auto* c = std::get_if<Conv1D>(&layer)) n += c->weight.size() + c->bias.size();
    if (const auto* d = std::get_if<Dense>(&layer)) n += d->weight.size() + d->bias.size();
  }
  return n;
}

// Weight/bias buffers in layer order: w0, b0, w1, b1, ...
inline std::vector<std::span<double>> parameters(Model& model) {
  std::vector<std::span<double>> out;
  for (auto& layer : model.layers) {
    if (auto* c = std::get_if<Conv1D>(&layer)) {
      out.emplace_back(c->weight);
      out.emplace_back(c->bias);
    } else if (auto* d = std::get_if<Dense>(&layer)) {
      out.emplace_back(d->weight);
      out.emplace_back(d->bias);
    }
  }
  return out;
}

// ---- architecture descriptors ----

struct LayerSpec {
  enum class Kind { Conv1D, MaxPool1D, Dropout, Dense } kind = Kind::Dense;
  std::size_t filters = 0;  // conv
  std::size_t kernel = 0;   // conv
  std::size_t pool = 0;     // maxpool
  double rate = 0.0;        // dropout
  std::size_t units = 0;    // dense
  Activation activation = Activation::None;

  static LayerSpec conv(std::size_t filters, std::size_t kernel,
                        Activation act = Activation::ReLU) {
    return {Kind::Conv1D, filters, kernel, 0, 0.0, 0, act};
  }
  static LayerSpec maxpool(std::size_t pool) { return {Kind::MaxPool1D, 0, 0, pool, 0.0, 0, {}}; }
  static LayerSpec dropout(double rate) { return {Kind::Dropout, 0, 0, 0, rate, 0, {}}; }
  static LayerSpec dense(std::size_t units, Activation act = Activation::None) {
    return {Kind::Dense, 0, 0, 0, 0.0, units, act};
  }
};

// Three conv blocks, dropout and a two-logit head.
inline std::vector<LayerSpec> default_architecture() {
  return {LayerSpec::conv(16, 5), LayerSpec::maxpool(2), LayerSpec::conv(32, 5),
          LayerSpec::maxpool(2), LayerSpec::conv(32, 3), LayerSpec::maxpool(2),
          LayerSpec::dropout(0.3), LayerSpec::dense(2)};
}

// First conv gets `filters`, every later conv gets twice that.
inline std::vector<LayerSpec> with_filters(std::vector<LayerSpec> specs, std::size_t filters) {
  bool first = true;
  for (auto& s : specs) {
    if (s.kind != LayerSpec::Kind::Conv1D) continue;
    s.filters = first ? filters : 2 * filters;
    first = false;
  }
  return specs;
}

// Uniform fan-in init: He (sqrt(6/fan_in)) ahead of ReLU, LeCun
// (sqrt(3/fan_in)) for linear outputs. Biases start at zero.
inline Model build_model(Shape input, const std::vector<LayerSpec>& specs, std::uint64_t seed) {
  Model model{input, {}};
  Rng rng(seed);
  Shape cur = input;
  auto init = [&rng](std::vector<double>& w, std::size_t fan_in, Activation act) {
    const double limit = std::sqrt((act == Activation::ReLU ? 6.0 : 3.0) /
                                   static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    for (auto& x : w) x = rng.uniform(-limit, limit);
  };
  for (const auto& s : specs) {
    switch (s.kind) {
      case LayerSpec::Kind::Conv1D: {
        Conv1D c{cur.channels, s.filters, s.kernel, s.activation, {}, {}};
        c.weight.resize(s.kernel * cur.channels * s.filters);
        c.bias.assign(s.filters, 0.0);
        init(c.weight, s.kernel * cur.channels, s.activation);
        model.layers.emplace_back(std::move(c));
        break;
      }
      case LayerSpec::Kind::MaxPool1D: model.layers.emplace_back(MaxPool1D{s.pool}); break;
      case LayerSpec::Kind::Dropout: model.layers.emplace_back(Dropout{s.rate}); break;
      case LayerSpec::Kind::Dense: {
        Dense d{cur.size(), s.units, s.activation, {}, {}};
        d.weight.resize(d.in * d.out);
        d.bias.assign(d.out, 0.0);
        init(d.weight, d.in, s.activation);
        model.layers.emplace_back(std::move(d));
        break;
      }
    }
    const auto shapes = layer_shapes(model);
    cur = shapes.back();
  }
  return model;
}

// ---- forward ----

// Per-example record of a forward pass: the input to every layer (the last
// entry is the logits), pooling argmax positions and dropout keep masks.
struct ExampleCache {
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<std::uint32_t>> argmax;
  std::vector<std::vector<std::uint8_t>> keep;
};

struct ForwardResult {
  Tensor probs;  // (B, classes)
  std::vector<ExampleCache> cache;
};

// Numerically stable softmax.
inline void softmax(std::span<const double> logits, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += out[i] = std::exp(logits[i] - mx);
  for (auto& p : out) p /= sum;
}

namespace detail {

inline void apply_activation(std::span<double> v, Activation act) {
  if (act == Activation::ReLU) {
    for (auto& x : v) x = x > 0.0 ? x : 0.0;
  }
}

inline void conv_forward(const Conv1D& l, std::span<const double> in, std::size_t steps,
                         std::vector<double>& out) {
  const std::size_t C = l.in_channels, F = l.filters, K = l.kernel;
  const std::size_t t_out = steps - K + 1;
  out.assign(t_out * F, 0.0);
  for (std::size_t t = 0; t < t_out; ++t) {
    double* o = out.data() + t * F;
    for (std::size_t f = 0; f < F; ++f) o[f] = l.bias[f];
    for (std::size_t k = 0; k < K; ++k) {
      const double* x = in.data() + (t + k) * C;
      for (std::size_t c = 0; c < C; ++c) {
        const double xv = x[c];
        const double* w = l.weight.data() + (k * C + c) * F;
        for (std::size_t f = 0; f < F; ++f) o[f] += xv * w[f];
      }
    }
  }
  apply_activation(out, l.activation);
}

inline void pool_forward(const MaxPool1D& l, std::span<const double> in, Shape shape,
                         std::vector<double>& out, std::vector<std::uint32_t>* argmax) {
  const std::size_t C = shape.channels, t_out = shape.steps / l.pool;
  out.assign(t_out * C, 0.0);
  if (argmax) argmax->assign(t_out * C, 0);
  for (std::size_t t = 0; t < t_out; ++t) {
    for (std::size_t c = 0; c < C; ++c) {
      std::size_t best = t * l.pool * C + c;
      for (std::size_t j = 1; j < l.pool; ++j) {
        const std::size_t idx = (t * l.pool + j) * C + c;
        if (in[idx] > in[best]) best = idx;
      }
      out[t * C + c] = in[best];
      if (argmax) (*argmax)[t * C + c] = static_cast<std::uint32_t>(best);
    }
  }
}

inline void dense_forward(const Dense& l, std::span<const double> in, std::vector<double>& out) {
  out.assign(l.bias.begin(), l.bias.end());
  for (std::size_t i = 0; i < l.in; ++i) {
    const double xv = in[i];
    const double* w = l.weight.data() + i * l.out;
    for (std::size_t o = 0; o < l.out; ++o) out[o] += xv * w[o];
  }
  apply_activation(out, l.activation);
}

}  // namespace detail

// Runs one example. With a cache every intermediate is kept for backward;
// dropout draws from rng only when training.
inline std::vector<double> forward_example(const Model& model, std::span<const double> input,
                                           bool training, Rng* rng, ExampleCache* cache) {
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  Shape shape = model.input;
  if (cache) {
    cache->acts.assign(1, cur);
    cache->argmax.assign(model.layers.size(), {});
    cache->keep.assign(model.layers.size(), {});
  }
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& layer = model.layers[i];
    if (const auto* c = std::get_if<Conv1D>(&layer)) {
      detail::conv_forward(*c, cur, shape.steps, next);
      shape = {shape.steps - c->kernel + 1, c->filters};
    } else if (const auto* p = std::get_if<MaxPool1D>(&layer)) {
      detail::pool_forward(*p, cur, shape, next, cache ? &cache->argmax[i] : nullptr);
      shape = {shape.steps / p->pool, shape.channels};
    } else if (const auto* d = std::get_if<Dropout>(&layer)) {
      next = cur;
      if (training && d->rate > 0.0) {
        const double scale = 1.0 / (1.0 - d->rate);
        std::vector<std::uint8_t> keep(next.size());
        for (std::size_t k = 0; k < next.size(); ++k) {
          keep[k] = rng->uniform() >= d->rate;
          next[k] = keep[k] ? next[k] * scale : 0.0;
        }
        if (cache) cache->keep[i] = std::move(keep);
      }
    } else {
      const auto& dl = std::get<Dense>(layer);
      detail::dense_forward(dl, cur, next);
      shape = {1, dl.out};
    }
    std::swap(cur, next);
    if (cache) cache->acts.push_back(cur);
  }
  return cur;
}

inline std::vector<double> logits(const Model& model, std::span<const double> input) {
  return forward_example(model, input, false, nullptr, nullptr);
}

inline std::vector<double> predict_proba(const Model& model, std::span<const double> input) {
  auto z = logits(model, input);
  std::vector<double> p(z.size());
  softmax(z, p);
  return p;
}

// Index of the largest entry; ties go to the lower index.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// batch is (B, steps, channels). Dropout masks come from Rng(seed).
inline ForwardResult forward(const Model& model, const Tensor& batch, bool training,
                             std::uint64_t seed = 0) {
  if (batch.rank() != 3 || batch.dim(1) != model.input.steps ||
      batch.dim(2) != model.input.channels) {
    throw Error(Errc::ShapeMismatch, "batch must be (B, " + std::to_string(model.input.steps) +
                                         ", " + std::to_string(model.input.channels) + ")");
  }
  const std::size_t classes = output_size(model);
  const std::size_t B = batch.dim(0);
  ForwardResult result{Tensor({B, classes}), std::vector<ExampleCache>(B)};
  Rng rng(seed);
  for (std::size_t b = 0; b < B; ++b) {
    const auto z = forward_example(model, batch.row(b), training, &rng, &result.cache[b]);
    softmax(z, result.probs.row(b));
  }
  return result;
}

// ---- loss and gradients ----

inline constexpr double kProbClamp = 1e-12;

// Mean over the batch of -w[y] * log(p[y]), p clamped to [1e-12, 1-1e-12].
inline double loss(const Tensor& probs, std::span<const std::uint8_t> labels,
                   std::array<double, 2> class_weights) {
  if (probs.rank() != 2 || probs.dim(0) != labels.size()) {
    throw Error(Errc::ShapeMismatch, "probabilities and labels disagree on batch size");
  }
  if (labels.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probs.row(i)[labels[i]], kProbClamp, 1.0 - kProbClamp);
    total += -class_weights[labels[i]] * std::log(p);
  }
  return total / static_cast<double>(labels.size());
}

// One buffer per parameter, ordered like parameters(model).
using Gradients = std::vector<std::vector<double>>;

namespace detail {

inline void relu_backward(std::span<const double> out, std::span<double> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(out[i] > 0.0)) grad[i] = 0.0;
  }
}

}  // namespace detail

// Exact gradient of loss(...) with respect to every weight and bias.
inline Gradients backward(const Model& model, const ForwardResult& fwd,
                          std::span<const std::uint8_t> labels,
                          std::array<double, 2> class_weights) {
  const std::size_t B = labels.size();
  if (fwd.cache.size() != B) throw Error(Errc::ShapeMismatch, "cache/label batch mismatch");
  const auto shapes = layer_shapes(model);

  Gradients grads;
  std::vector<std::size_t> slot(model.layers.size(), 0);
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    slot[i] = grads.size();
    if (const auto* c = std::get_if<Conv1D>(&model.layers[i])) {
      grads.emplace_back(c->weight.size(), 0.0);
      grads.emplace_back(c->bias.size(), 0.0);
    } else if (const auto* d = std::get_if<Dense>(&model.layers[i])) {
      grads.emplace_back(d->weight.size(), 0.0);
      grads.emplace_back(d->bias.size(), 0.0);
    }
  }

  std::vector<double> dy, dx;
  for (std::size_t b = 0; b < B; ++b) {
    const auto& cache = fwd.cache[b];
    const auto p = fwd.probs.row(b);
    const double scale = class_weights[labels[b]] / static_cast<double>(B);
    dy.assign(p.begin(), p.end());
    dy[labels[b]] -= 1.0;
    for (auto& g : dy) g *= scale;

    for (std::size_t i = model.layers.size(); i-- > 0;) {
      const auto& in = cache.acts[i];
      const auto& out = cache.acts[i + 1];
      const Shape in_shape = i == 0 ? model.input : shapes[i - 1];
      const auto& layer = model.layers[i];
      dx.assign(in.size(), 0.0);
      if (const auto* c = std::get_if<Conv1D>(&layer)) {
        if (c->activation == Activation::ReLU) detail::relu_backward(out, dy);
        auto& gw = grads[slot[i]];
        auto& gb = grads[slot[i] + 1];
        const std::size_t C = c->in_channels, F = c->filters, K = c->kernel;
        const std::size_t t_out = in_shape.steps - K + 1;
        for (std::size_t t = 0; t < t_out; ++t) {
          const double* g = dy.data() + t * F;
          for (std::size_t f = 0; f < F; ++f) gb[f] += g[f];
          for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t ch = 0; ch < C; ++ch) {
              const std::size_t xi = (t + k) * C + ch;
              const std::size_t wi = (k * C + ch) * F;
              const double xv = in[xi];
              double acc = 0.0;
              for (std::size_t f = 0; f < F; ++f) {
                gw[wi + f] += xv * g[f];
                acc += c->weight[wi + f] * g[f];
              }
              dx[xi] += acc;
            }
          }
        }
      } else if (std::holds_alternative<MaxPool1D>(layer)) {
        const auto& am = cache.argmax[i];
        for (std::size_t k = 0; k < am.size(); ++k) dx[am[k]] += dy[k];
      } else if (const auto* d = std::get_if<Dropout>(&layer)) {
        const auto& keep = cache.keep[i];
        if (keep.empty()) {
          dx = dy;
        } else {
          const double s = 1.0 / (1.0 - d->rate);
          for (std::size_t k = 0; k < dx.size(); ++k) dx[k] = keep[k] ? dy[k] * s : 0.0;
        }
      } else {
        const auto& dl = std::get<Dense>(layer);
        if (dl.activation == Activation::ReLU) detail::relu_backward(out, dy);
        auto& gw = grads[slot[i]];
        auto& gb = grads[slot[i] + 1];
        for (std::size_t o = 0; o < dl.out; ++o) gb[o] += dy[o];
        for (std::size_t k = 0; k < dl.in; ++k) {
          const double xv = in[k];
          const double* w = dl.weight.data() + k * dl.out;
          double* g = gw.data() + k * dl.out;
          double acc = 0.0;
          for (std::size_t o = 0; o < dl.out; ++o) {
            g[o] += xv * dy[o];
            acc += w[o] * dy[o];
          }
          dx[k] = acc;
        }
      }
      std::swap(dy, dx);
    }
  }
  return grads;
}

}  // namespace fog::nn
