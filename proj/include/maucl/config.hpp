#pragma once

// Experiment configuration: JSON schema, defaults, resolution (materializing
// derived fields such as log-spaced rate profiles), and the pinned synthetic
// benchmark.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "maucl/dataset.hpp"
#include "maucl/eval.hpp"
#include "maucl/loss.hpp"
#include "maucl/memory.hpp"
#include "maucl/model.hpp"

namespace maucl {

inline std::vector<double> log_spaced_rates(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi > lo && hi < 1.0))
    throw std::invalid_argument("log_spaced_rates: need 0 < lo < hi < 1");
  if (count < 2) throw std::invalid_argument("log_spaced_rates: need count >= 2");
  std::vector<double> rates(static_cast<std::size_t>(count));
  const double ratio = std::log(hi / lo);
  for (int k = 0; k < count; ++k)
    rates[static_cast<std::size_t>(k)] =
        lo * std::exp(ratio * static_cast<double>(k) / static_cast<double>(count - 1));
  return rates;
}

struct DatasetConfig {
  std::optional<std::string> path;       // load from JSONL when set
  GeneratorConfig generate;              // otherwise generate synthetically
};

struct SplitConfig {
  int tasks = 2;
  std::uint64_t seed = 0;
  std::optional<std::size_t> negative_padding;
};

struct FeatureMapConfig {
  std::string kind = "identity";  // or "rff"
  int dim = 64;
  double bandwidth = 4.0;
  std::uint64_t seed = 0;
};

struct ModelConfig {
  double eta = 0.05;
  int batch_size = 32;
  int epochs = 30;
  double weight_decay = 1e-5;
  double momentum = 0.0;
  FeatureMapConfig feature_map;
  std::optional<double> norm_cap;
  std::uint64_t seed = 0;
};

struct LossConfig {
  LossKind loss = LossKind::rldam;
  BaseKind base = BaseKind::hinge;
  double lambda = 1.0;
  bool normalized_margin = false;
  bool reweighted = true;
  // Replayed data is reweighted by the stored original counts by default;
  // they are what the buffer stores them for, and they scale the replay
  // gradient to the share of the task the memory actually holds. Policies
  // without stored counts fall back to memory-view counts either way.
  ReplayWeights replay_weights = ReplayWeights::stored_counts;

  LossSpec spec() const { return LossSpec{loss, base, lambda, normalized_margin}; }
};

struct MemoryConfig {
  std::size_t memory_size = 120;
  MemoryPolicy policy = MemoryPolicy::wru;
  std::size_t wru_subset = 64;  // candidate pool per greedy step; 0 = all
};

struct EvalConfig {
  TieHandling ties = TieHandling::strict;
  ForgettingKind forgetting = ForgettingKind::best_checkpoint;
  double train_fraction = 0.8;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  SplitConfig split;
  ModelConfig model;
  LossConfig loss;
  MemoryConfig memory;
  EvalConfig evaluation;
  std::vector<std::uint64_t> seeds = {1};
  int threads = 0;  // 0 = hardware concurrency

  // sweep settings (used by the sweep operation)
  std::string sweep_parameter;        // "memory_size" or "lambda"
  std::vector<double> sweep_values;
};

// The pinned desk-scale benchmark: small enough for minutes-scale CI,
// imbalanced enough to separate methods.
inline ExperimentConfig standard_benchmark_config() {
  ExperimentConfig cfg;
  cfg.dataset.generate.feature_dim = 32;
  cfg.dataset.generate.num_classes = 12;
  cfg.dataset.generate.num_tasks = 4;
  cfg.dataset.generate.examples_per_task = 800;
  cfg.dataset.generate.positive_rates = log_spaced_rates(0.02, 0.4, 12);
  cfg.dataset.generate.label_correlation = 0.2;
  cfg.dataset.generate.seed = 7;
  cfg.split.tasks = 4;
  cfg.split.seed = 11;
  cfg.model.eta = 0.05;
  cfg.model.batch_size = 32;
  cfg.model.epochs = 30;
  cfg.model.weight_decay = 1e-5;
  cfg.model.momentum = 0.0;
  cfg.model.feature_map.kind = "identity";
  cfg.model.seed = 13;
  cfg.loss.loss = LossKind::rldam;
  cfg.loss.base = BaseKind::hinge;
  cfg.loss.lambda = 1.0;
  cfg.memory.memory_size = 120;
  cfg.memory.policy = MemoryPolicy::wru;
  cfg.memory.wru_subset = 64;
  cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return cfg;
}

// ---- JSON bindings -------------------------------------------------------

inline nlohmann::json to_json(const GeneratorConfig& g) {
  nlohmann::json j;
  j["d"] = g.feature_dim;
  j["K"] = g.num_classes;
  j["T"] = g.num_tasks;
  j["n_per_task"] = g.examples_per_task;
  j["positive_rates"] = g.positive_rates;
  j["label_correlation"] = g.label_correlation;
  j["seed"] = g.seed;
  return j;
}

inline GeneratorConfig generator_from_json(const nlohmann::json& j) {
  GeneratorConfig g;
  g.feature_dim = j.value("d", g.feature_dim);
  g.num_classes = j.value("K", g.num_classes);
  g.num_tasks = j.value("T", g.num_tasks);
  g.examples_per_task = j.value("n_per_task", g.examples_per_task);
  g.label_correlation = j.value("label_correlation", g.label_correlation);
  g.seed = j.value("seed", g.seed);
  if (j.contains("positive_rates")) {
    const auto& pr = j.at("positive_rates");
    if (pr.is_object() && pr.contains("log_spaced")) {
      const auto range = pr.at("log_spaced").get<std::vector<double>>();
      if (range.size() != 2)
        throw std::invalid_argument("config: positive_rates.log_spaced needs [lo, hi]");
      g.positive_rates = log_spaced_rates(range[0], range[1], g.num_classes);
    } else {
      g.positive_rates = pr.get<std::vector<double>>();
    }
  }
  return g;
}

inline LossKind loss_kind_from_string(const std::string& s) {
  if (s == "rldam") return LossKind::rldam;
  if (s == "ru") return LossKind::ru;
  if (s == "bce") return LossKind::bce;
  throw std::invalid_argument("config: unknown loss \"" + s + "\"");
}

inline BaseKind base_kind_from_string(const std::string& s) {
  if (s == "hinge") return BaseKind::hinge;
  if (s == "logistic") return BaseKind::logistic;
  throw std::invalid_argument("config: unknown base loss \"" + s + "\"");
}

inline MemoryPolicy policy_from_string(const std::string& s) {
  if (s == "wru") return MemoryPolicy::wru;
  if (s == "reservoir") return MemoryPolicy::reservoir;
  if (s == "random") return MemoryPolicy::random;
  throw std::invalid_argument("config: unknown memory policy \"" + s + "\"");
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  if (cfg.dataset.path)
    j["dataset"]["path"] = *cfg.dataset.path;
  else
    j["dataset"]["generate"] = to_json(cfg.dataset.generate);

  j["split"]["tasks"] = cfg.split.tasks;
  j["split"]["seed"] = cfg.split.seed;
  if (cfg.split.negative_padding)
    j["split"]["negative_padding"] = *cfg.split.negative_padding;

  j["model"]["eta"] = cfg.model.eta;
  j["model"]["batch_size"] = cfg.model.batch_size;
  j["model"]["epochs"] = cfg.model.epochs;
  j["model"]["weight_decay"] = cfg.model.weight_decay;
  j["model"]["momentum"] = cfg.model.momentum;
  j["model"]["feature_map"]["kind"] = cfg.model.feature_map.kind;
  if (cfg.model.feature_map.kind == "rff") {
    j["model"]["feature_map"]["dim"] = cfg.model.feature_map.dim;
    j["model"]["feature_map"]["bandwidth"] = cfg.model.feature_map.bandwidth;
    j["model"]["feature_map"]["seed"] = cfg.model.feature_map.seed;
  }
  if (cfg.model.norm_cap) j["model"]["norm_cap"] = *cfg.model.norm_cap;
  j["model"]["seed"] = cfg.model.seed;

  j["loss"]["loss"] = to_string(cfg.loss.loss);
  j["loss"]["base"] = to_string(cfg.loss.base);
  j["loss"]["lambda"] = cfg.loss.lambda;
  j["loss"]["normalized_margin"] = cfg.loss.normalized_margin;
  j["loss"]["reweighted"] = cfg.loss.reweighted;
  j["loss"]["replay_weights"] =
      cfg.loss.replay_weights == ReplayWeights::memory_view ? "memory" : "stored";

  j["memory"]["memory_size"] = cfg.memory.memory_size;
  j["memory"]["policy"] = to_string(cfg.memory.policy);
  j["memory"]["wru_subset"] = cfg.memory.wru_subset;

  j["evaluation"]["ties"] = cfg.evaluation.ties == TieHandling::strict ? "strict" : "half";
  j["evaluation"]["forgetting"] =
      cfg.evaluation.forgetting == ForgettingKind::best_checkpoint ? "best" : "previous";
  j["evaluation"]["train_fraction"] = cfg.evaluation.train_fraction;

  j["seeds"] = cfg.seeds;
  j["threads"] = cfg.threads;
  if (!cfg.sweep_parameter.empty()) {
    j["sweep"]["parameter"] = cfg.sweep_parameter;
    j["sweep"]["values"] = cfg.sweep_values;
  }
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    if (d.contains("path"))
      cfg.dataset.path = d.at("path").get<std::string>();
    else if (d.contains("generate"))
      cfg.dataset.generate = generator_from_json(d.at("generate"));
    else
      throw std::invalid_argument("config: dataset needs \"path\" or \"generate\"");
  }
  if (j.contains("split")) {
    const auto& s = j.at("split");
    cfg.split.tasks = s.value("tasks", cfg.split.tasks);
    cfg.split.seed = s.value("seed", cfg.split.seed);
    if (s.contains("negative_padding") && !s.at("negative_padding").is_null())
      cfg.split.negative_padding = s.at("negative_padding").get<std::size_t>();
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    cfg.model.eta = m.value("eta", cfg.model.eta);
    cfg.model.batch_size = m.value("batch_size", cfg.model.batch_size);
    cfg.model.epochs = m.value("epochs", cfg.model.epochs);
    cfg.model.weight_decay = m.value("weight_decay", cfg.model.weight_decay);
    cfg.model.momentum = m.value("momentum", cfg.model.momentum);
    if (m.contains("feature_map")) {
      const auto& f = m.at("feature_map");
      cfg.model.feature_map.kind = f.value("kind", cfg.model.feature_map.kind);
      cfg.model.feature_map.dim = f.value("dim", cfg.model.feature_map.dim);
      cfg.model.feature_map.bandwidth = f.value("bandwidth", cfg.model.feature_map.bandwidth);
      cfg.model.feature_map.seed = f.value("seed", cfg.model.feature_map.seed);
      if (cfg.model.feature_map.kind != "identity" && cfg.model.feature_map.kind != "rff")
        throw std::invalid_argument("config: feature_map.kind must be identity or rff");
    }
    if (m.contains("norm_cap") && !m.at("norm_cap").is_null())
      cfg.model.norm_cap = m.at("norm_cap").get<double>();
    cfg.model.seed = m.value("seed", cfg.model.seed);
  }
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    cfg.loss.loss = loss_kind_from_string(l.value("loss", to_string(cfg.loss.loss)));
    cfg.loss.base = base_kind_from_string(l.value("base", to_string(cfg.loss.base)));
    cfg.loss.lambda = l.value("lambda", cfg.loss.lambda);
    cfg.loss.normalized_margin = l.value("normalized_margin", cfg.loss.normalized_margin);
    cfg.loss.reweighted = l.value("reweighted", cfg.loss.reweighted);
    const std::string rw = l.value("replay_weights", "stored");
    if (rw == "memory")
      cfg.loss.replay_weights = ReplayWeights::memory_view;
    else if (rw == "stored")
      cfg.loss.replay_weights = ReplayWeights::stored_counts;
    else
      throw std::invalid_argument("config: replay_weights must be \"memory\" or \"stored\"");
  }
  if (j.contains("memory")) {
    const auto& m = j.at("memory");
    cfg.memory.memory_size = m.value("memory_size", cfg.memory.memory_size);
    cfg.memory.policy = policy_from_string(m.value("policy", to_string(cfg.memory.policy)));
    cfg.memory.wru_subset = m.value("wru_subset", cfg.memory.wru_subset);
  }
  if (j.contains("evaluation")) {
    const auto& e = j.at("evaluation");
    const std::string ties = e.value("ties", "strict");
    if (ties == "strict")
      cfg.evaluation.ties = TieHandling::strict;
    else if (ties == "half")
      cfg.evaluation.ties = TieHandling::half;
    else
      throw std::invalid_argument("config: ties must be \"strict\" or \"half\"");
    const std::string fg = e.value("forgetting", "best");
    if (fg == "best")
      cfg.evaluation.forgetting = ForgettingKind::best_checkpoint;
    else if (fg == "previous")
      cfg.evaluation.forgetting = ForgettingKind::previous_checkpoint;
    else
      throw std::invalid_argument("config: forgetting must be \"best\" or \"previous\"");
    cfg.evaluation.train_fraction = e.value("train_fraction", cfg.evaluation.train_fraction);
  }
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (cfg.seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
  cfg.threads = j.value("threads", cfg.threads);
  if (j.contains("sweep")) {
    cfg.sweep_parameter = j.at("sweep").value("parameter", "");
    if (j.at("sweep").contains("values"))
      cfg.sweep_values = j.at("sweep").at("values").get<std::vector<double>>();
  }
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("config: malformed JSON in " + path);
  return config_from_json(j);
}

}  // namespace maucl
