#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fog/error.hpp"

namespace fog::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update of `params` in place; t is 1-based.
inline void adam_update(std::span<double> params, std::span<const double> grads,
                        std::span<double> m, std::span<double> v, std::size_t t,
                        double learning_rate, const AdamConfig& cfg) {
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    params[i] -= learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.epsilon);
  }
}

// Moment buffers for a fixed list of parameter buffers.
class Adam {
 public:
  Adam(const std::vector<std::span<double>>& params, double learning_rate, AdamConfig cfg = {})
      : lr_(learning_rate), cfg_(cfg) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }

  void step(const std::vector<std::span<double>>& params,
            const std::vector<std::vector<double>>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
      throw Error(Errc::ShapeMismatch, "optimizer parameter list changed");
    }
    ++t_;
    for (std::size_t i = 0; i < params.size(); ++i) {
      adam_update(params[i], grads[i], m_[i], v_[i], t_, lr_, cfg_);
    }
  }

  std::size_t steps() const { return t_; }

 private:
  double lr_;
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace fog::nn
