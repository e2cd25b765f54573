#pragma once

// Mini-batch training with Adam, class weighting and early stopping.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "fog/error.hpp"
#include "fog/nn/adam.hpp"
#include "fog/nn/metrics.hpp"
#include "fog/nn/model.hpp"
#include "fog/rng.hpp"
#include "fog/windows.hpp"

namespace fog::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  // Unset means class_weights_from(train_set).
  std::optional<std::array<double, 2>> class_weights;
  std::uint64_t seed = 42;
  AdamConfig adam;

  void validate() const {
    if (!(learning_rate > 0.0)) throw Error(Errc::InvalidArgument, "learning_rate must be > 0");
    if (batch_size < 1) throw Error(Errc::InvalidArgument, "batch_size must be >= 1");
    if (patience < 1) throw Error(Errc::InvalidArgument, "patience must be >= 1");
    if (class_weights && !((*class_weights)[0] > 0.0 && (*class_weights)[1] > 0.0)) {
      throw Error(Errc::InvalidArgument, "class weights must be > 0");
    }
  }
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  bool stopped_early = false;
  std::array<double, 2> class_weights{1.0, 1.0};
};

// w_c = N / (2 N_c)
inline std::array<double, 2> class_weights_from(const windows::WindowSet& set) {
  if (set.count_fog() == 0 || set.count_nofog() == 0) {
    throw Error(Errc::EmptyClass, "class weights need both classes present");
  }
  const double n = static_cast<double>(set.size());
  return {n / (2.0 * static_cast<double>(set.count_nofog())),
          n / (2.0 * static_cast<double>(set.count_fog()))};
}

// Tracks the best (lowest) monitored loss. update() returns true once the
// loss has failed to improve for `patience` consecutive epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  bool update(std::size_t epoch, double loss) {
    if (loss < best_loss_) {
      best_loss_ = loss;
      best_epoch_ = epoch;
      stale_ = 0;
      return false;
    }
    return ++stale_ >= patience_;
  }

  bool improved_at(std::size_t epoch) const { return best_epoch_ == epoch; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  std::size_t best_epoch_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

inline Tensor make_batch(const windows::WindowSet& set, std::span<const std::size_t> idx,
                         Shape input) {
  Tensor batch({idx.size(), input.steps, input.channels});
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const auto& v = set[idx[b]].values;
    if (v.size() != input.size()) throw Error(Errc::ShapeMismatch, "window does not match model input");
    std::copy(v.begin(), v.end(), batch.row(b).begin());
  }
  return batch;
}

// Inference-mode evaluation; loss uses the given class weights.
inline EvalReport evaluate(const Model& model, const windows::WindowSet& set,
                           std::array<double, 2> class_weights = {1.0, 1.0}) {
  std::vector<std::uint8_t> truth, predicted;
  truth.reserve(set.size());
  predicted.reserve(set.size());
  double total = 0.0;
  for (const auto& w : set) {
    if (w.values.size() != model.input.size()) {
      throw Error(Errc::ShapeMismatch, "window does not match model input");
    }
    const auto p = predict_proba(model, w.values);
    truth.push_back(w.label);
    predicted.push_back(static_cast<std::uint8_t>(argmax(p)));
    total += -class_weights[w.label] * std::log(std::clamp(p[w.label], kProbClamp, 1.0 - kProbClamp));
  }
  auto report = report_from_predictions(truth, predicted);
  report.loss = set.empty() ? 0.0 : total / static_cast<double>(set.size());
  return report;
}

// Early stopping monitors validation loss (training loss when val_set is
// empty) and the returned model carries the best epoch's weights.
inline TrainResult train(Model model, const windows::WindowSet& train_set,
                         const windows::WindowSet& val_set, const TrainConfig& config) {
  config.validate();
  TrainResult result;
  result.class_weights = config.class_weights.value_or(
      config.max_epochs == 0 ? std::array<double, 2>{1.0, 1.0} : class_weights_from(train_set));
  result.model = model;
  if (config.max_epochs == 0 || train_set.empty()) return result;

  const auto weights = result.class_weights;
  auto params = parameters(model);
  Adam adam(params, config.learning_rate, config.adam);
  EarlyStopping stopper(config.patience);
  std::vector<std::size_t> order(train_set.size());
  std::vector<std::uint8_t> labels;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffler(mix_seed(config.seed, 2 * epoch));
    shuffler.shuffle(std::span(order));

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0, batch_no = 0; start < order.size();
         start += config.batch_size, ++batch_no) {
      const auto idx = std::span(order).subspan(start, std::min(config.batch_size, order.size() - start));
      const Tensor batch = make_batch(train_set, idx, model.input);
      labels.resize(idx.size());
      for (std::size_t b = 0; b < idx.size(); ++b) labels[b] = train_set[idx[b]].label;

      const auto fwd = forward(model, batch, true, mix_seed(config.seed, 2 * epoch + 1) ^ batch_no);
      loss_sum += loss(fwd.probs, labels, weights) * static_cast<double>(idx.size());
      for (std::size_t b = 0; b < idx.size(); ++b) correct += argmax(fwd.probs.row(b)) == labels[b];
      adam.step(params, backward(model, fwd, labels, weights));
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train_set.size());
    stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    if (!val_set.empty()) {
      const auto val = evaluate(model, val_set, weights);
      stats.val_loss = val.loss;
      stats.val_accuracy = val.accuracy_overall;
    } else {
      stats.val_loss = stats.train_loss;
      stats.val_accuracy = stats.train_accuracy;
    }
    result.history.push_back(stats);

    const bool stop = stopper.update(epoch, stats.val_loss);
    if (stopper.improved_at(epoch)) result.model = model;
    if (stop) {
      result.stopped_early = epoch < config.max_epochs;
      break;
    }
  }
  result.best_epoch = stopper.best_epoch();
  return result;
}

}  // namespace fog::nn
