#pragma once

// JSON configuration files: train.json, grid.json and exclusion lists.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fog/error.hpp"
#include "fog/ingest.hpp"
#include "fog/nn/model.hpp"
#include "fog/nn/train.hpp"
#include "fog/tune.hpp"
#include "json.hpp"

namespace fog::config {

using nlohmann::json;

inline json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, path.string() + ": " + e.what());
  }
}

inline nn::Activation parse_activation(const std::string& name) {
  if (name == "relu") return nn::Activation::ReLU;
  if (name == "none" || name == "linear") return nn::Activation::None;
  throw Error(Errc::InvalidArgument, "unknown activation '" + name + "'");
}

// [{"type": "conv1d", "filters": 16, "kernel": 5, "activation": "relu"},
//  {"type": "maxpool", "pool": 2}, {"type": "dropout", "rate": 0.3},
//  {"type": "dense", "units": 2}]
inline std::vector<nn::LayerSpec> parse_architecture(const json& j) {
  if (!j.is_array()) throw Error(Errc::InvalidArgument, "architecture must be a list");
  std::vector<nn::LayerSpec> specs;
  for (const auto& l : j) {
    const auto type = l.at("type").get<std::string>();
    if (type == "conv1d") {
      specs.push_back(nn::LayerSpec::conv(l.at("filters").get<std::size_t>(), l.at("kernel").get<std::size_t>(),
                                          parse_activation(l.value("activation", "relu"))));
    } else if (type == "maxpool") {
      specs.push_back(nn::LayerSpec::maxpool(l.value("pool", std::size_t{2})));
    } else if (type == "dropout") {
      specs.push_back(nn::LayerSpec::dropout(l.at("rate").get<double>()));
    } else if (type == "dense") {
      specs.push_back(nn::LayerSpec::dense(l.at("units").get<std::size_t>(),
                                           parse_activation(l.value("activation", "none"))));
    } else {
      throw Error(Errc::InvalidArgument, "unknown layer type '" + type + "'");
    }
  }
  return specs;
}

inline json architecture_to_json(const std::vector<nn::LayerSpec>& specs) {
  json out = json::array();
  auto act = [](nn::Activation a) { return a == nn::Activation::ReLU ? "relu" : "none"; };
  for (const auto& s : specs) {
    switch (s.kind) {
      case nn::LayerSpec::Kind::Conv1D:
        out.push_back({{"type", "conv1d"}, {"filters", s.filters}, {"kernel", s.kernel}, {"activation", act(s.activation)}});
        break;
      case nn::LayerSpec::Kind::MaxPool1D: out.push_back({{"type", "maxpool"}, {"pool", s.pool}}); break;
      case nn::LayerSpec::Kind::Dropout: out.push_back({{"type", "dropout"}, {"rate", s.rate}}); break;
      case nn::LayerSpec::Kind::Dense:
        out.push_back({{"type", "dense"}, {"units", s.units}, {"activation", act(s.activation)}});
        break;
    }
  }
  return out;
}

struct TrainSettings {
  nn::TrainConfig train;
  std::vector<nn::LayerSpec> architecture = nn::default_architecture();
};

// Keys: learning_rate, batch_size, max_epochs, patience, seed, dropout,
// architecture, adam {beta1, beta2, epsilon}, class_weights ("auto" or
// [w0, w1]). Missing keys keep their defaults; "dropout" overrides the rate
// of every dropout layer.
inline TrainSettings parse_train_settings(const json& j) {
  TrainSettings s;
  try {
    auto& t = s.train;
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.max_epochs = j.value("max_epochs", t.max_epochs);
    t.patience = j.value("patience", t.patience);
    t.seed = j.value("seed", t.seed);
    if (j.contains("adam")) {
      const auto& a = j["adam"];
      t.adam.beta1 = a.value("beta1", t.adam.beta1);
      t.adam.beta2 = a.value("beta2", t.adam.beta2);
      t.adam.epsilon = a.value("epsilon", t.adam.epsilon);
    }
    if (j.contains("class_weights")) {
      const auto& cw = j["class_weights"];
      if (cw.is_string() && cw.get<std::string>() == "auto") {
        t.class_weights.reset();
      } else {
        t.class_weights = std::array<double, 2>{cw.at(0).get<double>(), cw.at(1).get<double>()};
      }
    }
    if (j.contains("architecture")) s.architecture = parse_architecture(j["architecture"]);
    if (j.contains("dropout")) {
      const double rate = j["dropout"].get<double>();
      for (auto& l : s.architecture) {
        if (l.kind == nn::LayerSpec::Kind::Dropout) l.rate = rate;
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("train config: ") + e.what());
  }
  s.train.validate();
  return s;
}

// {"filters": [...], "learning_rates": [...], "epochs": [...], "batch_sizes": [...]}
inline tune::Grid parse_grid(const json& j) {
  tune::Grid g;
  try {
    g.filters = j.value("filters", g.filters);
    g.learning_rates = j.value("learning_rates", g.learning_rates);
    g.epochs = j.value("epochs", g.epochs);
    g.batch_sizes = j.value("batch_sizes", g.batch_sizes);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("grid: ") + e.what());
  }
  g.validate();
  return g;
}

// [{"subject": "S01", "trial": "R01", "from_ms": 1000, "to_ms": 5000}, ...]
inline std::vector<ingest::TimeExclusion> parse_exclusions(const json& j) {
  std::vector<ingest::TimeExclusion> out;
  try {
    for (const auto& e : j) {
      out.push_back({e.at("subject").get<std::string>(), e.at("trial").get<std::string>(),
                     e.at("from_ms").get<std::int64_t>(), e.at("to_ms").get<std::int64_t>()});
      if (out.back().to_ms < out.back().from_ms) {
        throw Error(Errc::InvalidArgument, "exclusion ends before it starts");
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("exclusions: ") + e.what());
  }
  return out;
}

inline json to_json(const nn::EvalReport& r) {
  const auto& c = r.confusion;
  return {{"confusion", {{c.tn, c.fp}, {c.fn, c.tp}}},
          {"accuracy", r.accuracy_overall},
          {"per_class", {r.accuracy_per_class[0], r.accuracy_per_class[1]}},
          {"loss", r.loss},
          {"n_windows", c.total()}};
}

inline json to_json(const std::vector<nn::EpochStats>& history) {
  json out = json::array();
  for (const auto& h : history) {
    out.push_back({{"epoch", h.epoch},
                   {"train_loss", h.train_loss},
                   {"train_accuracy", h.train_accuracy},
                   {"val_loss", h.val_loss},
                   {"val_accuracy", h.val_accuracy}});
  }
  return out;
}

inline json to_json(const tune::CellConfig& c) {
  return {{"filters", c.filters}, {"learning_rate", c.learning_rate}, {"epochs", c.epochs}, {"batch_size", c.batch_size}};
}

inline json to_json(const tune::TuneResult& r) {
  json table = json::array(), failures = json::array();
  for (const auto& row : r.table) {
    auto j = to_json(row.config);
    j["val_accuracy"] = row.val_accuracy;
    j["val_loss"] = row.val_loss;
    j["model_size_bytes"] = row.model_size_bytes;
    table.push_back(j);
  }
  for (const auto& f : r.failures) {
    auto j = to_json(f.config);
    j["error"] = f.error;
    failures.push_back(j);
  }
  return {{"table", table}, {"failures", failures}, {"best", r.best ? to_json(r.best->config) : json(nullptr)}};
}

}  // namespace fog::config
