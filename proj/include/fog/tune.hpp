#pragma once

// Exhaustive hyperparameter grid over first-layer filters, learning rate,
// epoch budget and batch size, scored on the validation split.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fog/error.hpp"
#include "fog/nn/model.hpp"
#include "fog/nn/train.hpp"
#include "fog/quant/packed_model.hpp"
#include "fog/windows.hpp"

namespace fog::tune {

struct Grid {
  std::vector<std::size_t> filters{8, 16, 32};
  std::vector<double> learning_rates{1e-2, 1e-3, 1e-4};
  std::vector<std::size_t> epochs{50};
  std::vector<std::size_t> batch_sizes{32, 64};

  std::size_t cells() const {
    return filters.size() * learning_rates.size() * epochs.size() * batch_sizes.size();
  }

  void validate() const {
    if (filters.empty() || learning_rates.empty() || epochs.empty() || batch_sizes.empty()) {
      throw Error(Errc::InvalidArgument, "every grid axis needs at least one value");
    }
    for (auto f : filters) {
      if (f == 0) throw Error(Errc::InvalidArgument, "filters must be positive");
    }
    for (auto lr : learning_rates) {
      if (!(lr > 0.0)) throw Error(Errc::InvalidArgument, "learning rates must be positive");
    }
    for (auto e : epochs) {
      if (e == 0) throw Error(Errc::InvalidArgument, "epochs must be positive");
    }
    for (auto b : batch_sizes) {
      if (b == 0) throw Error(Errc::InvalidArgument, "batch sizes must be positive");
    }
  }
};

struct CellConfig {
  std::size_t filters = 0;
  double learning_rate = 0.0;
  std::size_t epochs = 0;
  std::size_t batch_size = 0;

  bool operator==(const CellConfig&) const = default;
};

struct CellResult {
  CellConfig config;
  std::size_t order = 0;  // position in the Cartesian enumeration
  double val_accuracy = 0.0;
  double val_loss = 0.0;
  std::size_t model_size_bytes = 0;
};

struct CellFailure {
  CellConfig config;
  std::size_t order = 0;
  std::string error;
};

struct TuneResult {
  std::vector<CellResult> table;
  std::vector<CellFailure> failures;
  std::optional<CellResult> best;
};

// Highest val accuracy; ties go to the smaller model, then the lower
// learning rate, then the earlier cell.
inline bool better(const CellResult& a, const CellResult& b) {
  if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
  if (a.model_size_bytes != b.model_size_bytes) return a.model_size_bytes < b.model_size_bytes;
  if (a.config.learning_rate != b.config.learning_rate) {
    return a.config.learning_rate < b.config.learning_rate;
  }
  return a.order < b.order;
}

inline std::optional<CellResult> select_best(const std::vector<CellResult>& table) {
  std::optional<CellResult> best;
  for (const auto& r : table) {
    if (!best || better(r, *best)) best = r;
  }
  return best;
}

// Cells in declaration order: filters, then learning rate, epochs, batch.
inline std::vector<CellConfig> enumerate(const Grid& grid) {
  std::vector<CellConfig> cells;
  for (auto f : grid.filters)
    for (auto lr : grid.learning_rates)
      for (auto e : grid.epochs)
        for (auto b : grid.batch_sizes) cells.push_back({f, lr, e, b});
  return cells;
}

using CellLogger = std::function<void(const CellConfig&, const std::string& status)>;

inline TuneResult grid_search(const Grid& grid, const windows::WindowSet& train_set,
                              const windows::WindowSet& val_set, const nn::TrainConfig& base_config,
                              const std::vector<nn::LayerSpec>& architecture, std::uint64_t seed,
                              const CellLogger& log = {}) {
  grid.validate();
  if (train_set.empty()) throw Error(Errc::InvalidArgument, "empty training split");
  const nn::Shape input{train_set[0].steps(), windows::kAxes};
  TuneResult result;
  const auto cells = enumerate(grid);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    try {
      auto model = nn::build_model(input, nn::with_filters(architecture, cell.filters), seed);
      nn::TrainConfig cfg = base_config;
      cfg.learning_rate = cell.learning_rate;
      cfg.max_epochs = cell.epochs;
      cfg.batch_size = cell.batch_size;
      cfg.seed = seed;
      const auto trained = nn::train(std::move(model), train_set, val_set, cfg);
      const auto eval = nn::evaluate(trained.model, val_set, trained.class_weights);
      result.table.push_back({cell, i, eval.accuracy_overall, eval.loss,
                              quant::packed_size_bytes(quant::freeze(trained.model))});
      if (log) log(cell, "ok");
    } catch (const std::exception& e) {
      result.failures.push_back({cell, i, e.what()});
      if (log) log(cell, std::string("failed: ") + e.what());
    }
  }
  result.best = select_best(result.table);
  return result;
}

}  // namespace fog::tune
