#pragma once

// Multi-label dataset model: synthetic imbalanced generation, class-incremental
// task splitting, and per-class count statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "maucl/rng.hpp"

namespace maucl {

struct Example {
  std::vector<double> features;      // dense, length d
  std::vector<std::uint8_t> labels;  // multi-hot over all K global classes

  bool operator==(const Example&) const = default;
};

struct ClassStats {
  long pos = 0;
  long neg = 0;
  double tau = 0.0;  // min(pos, neg) / n

  bool operator==(const ClassStats&) const = default;
};

struct MultiLabelDataset {
  int feature_dim = 0;
  int num_classes = 0;          // K, length of every label vector
  std::vector<int> class_ids;   // classes this dataset is "about" (sorted)
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }

  std::vector<std::size_t> positives(int k) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < examples.size(); ++i)
      if (examples[i].labels[static_cast<std::size_t>(k)]) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> negatives(int k) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < examples.size(); ++i)
      if (!examples[i].labels[static_cast<std::size_t>(k)]) out.push_back(i);
    return out;
  }

  bool operator==(const MultiLabelDataset&) const = default;
};

struct Task {
  int task_id = 0;
  std::vector<int> class_ids;  // this task's class set, sorted
  MultiLabelDataset data;      // labels masked to class_ids

  bool operator==(const Task&) const = default;
};

struct TaskSequence {
  int feature_dim = 0;
  int num_classes = 0;  // K across all tasks
  std::vector<Task> tasks;

  bool operator==(const TaskSequence&) const = default;
};

struct GeneratorConfig {
  int feature_dim = 16;                 // d
  int num_classes = 4;                  // K
  int num_tasks = 2;                    // T
  int examples_per_task = 100;          // dataset size is T * examples_per_task
  std::vector<double> positive_rates;   // per class, in (0, 1)
  double label_correlation = 0.0;       // in [0, 1]
  std::uint64_t seed = 0;
};

inline void validate(const GeneratorConfig& cfg) {
  if (cfg.feature_dim < 1) throw std::invalid_argument("generator: feature_dim must be >= 1");
  if (cfg.num_classes < 1) throw std::invalid_argument("generator: num_classes must be >= 1");
  if (cfg.num_tasks < 1) throw std::invalid_argument("generator: num_tasks must be >= 1");
  if (cfg.num_classes < cfg.num_tasks)
    throw std::invalid_argument("generator: need num_classes >= num_tasks");
  if (cfg.examples_per_task < 4)
    throw std::invalid_argument("generator: examples_per_task must be >= 4");
  if (static_cast<int>(cfg.positive_rates.size()) != cfg.num_classes)
    throw std::invalid_argument("generator: positive_rates size must equal num_classes");
  const double n = static_cast<double>(cfg.num_tasks) * cfg.examples_per_task;
  for (double r : cfg.positive_rates) {
    if (!(r > 0.0 && r < 1.0))
      throw std::invalid_argument("generator: positive rates must lie strictly in (0,1)");
    if (r * n < 2.0)
      throw std::invalid_argument("generator: expected positive count below 2 for some class");
  }
  if (cfg.label_correlation < 0.0 || cfg.label_correlation > 1.0)
    throw std::invalid_argument("generator: label_correlation must lie in [0,1]");
}

// x = sum_k y_k * mu_k + eps, with prototypes mu_k on the 3-sphere (radius 3)
// and eps standard normal, so a linear scorer suffices. With probability
// label_correlation an extra relevant label is copied onto a second class
// drawn proportionally to the rate profile, which keeps the profile shape
// while guaranteeing multi-label samples.
inline MultiLabelDataset generate_synthetic(const GeneratorConfig& cfg) {
  validate(cfg);
  const int d = cfg.feature_dim;
  const int K = cfg.num_classes;
  const std::size_t n =
      static_cast<std::size_t>(cfg.num_tasks) * static_cast<std::size_t>(cfg.examples_per_task);

  Rng proto_rng = make_stream(cfg.seed, StreamTag::prototypes);
  std::vector<std::vector<double>> prototypes(static_cast<std::size_t>(K));
  for (auto& mu : prototypes) {
    mu.resize(static_cast<std::size_t>(d));
    double norm_sq = 0.0;
    for (double& v : mu) {
      v = proto_rng.normal();
      norm_sq += v * v;
    }
    const double scale = 3.0 / std::sqrt(std::max(norm_sq, 1e-300));
    for (double& v : mu) v *= scale;
  }

  // Cumulative rate mass for rate-proportional second-class draws.
  std::vector<double> cum_rates(static_cast<std::size_t>(K));
  double total_rate = 0.0;
  for (int k = 0; k < K; ++k) {
    total_rate += cfg.positive_rates[static_cast<std::size_t>(k)];
    cum_rates[static_cast<std::size_t>(k)] = total_rate;
  }

  Rng label_rng = make_stream(cfg.seed, StreamTag::labels);
  Rng noise_rng = make_stream(cfg.seed, StreamTag::noise);

  MultiLabelDataset ds;
  ds.feature_dim = d;
  ds.num_classes = K;
  ds.class_ids.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) ds.class_ids[static_cast<std::size_t>(k)] = k;
  ds.examples.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    Example& ex = ds.examples[i];
    ex.labels.assign(static_cast<std::size_t>(K), 0);
    for (int k = 0; k < K; ++k)
      ex.labels[static_cast<std::size_t>(k)] =
          label_rng.bernoulli(cfg.positive_rates[static_cast<std::size_t>(k)]) ? 1 : 0;

    if (cfg.label_correlation > 0.0 && label_rng.bernoulli(cfg.label_correlation)) {
      std::vector<int> relevant;
      for (int k = 0; k < K; ++k)
        if (ex.labels[static_cast<std::size_t>(k)]) relevant.push_back(k);
      if (!relevant.empty() && K >= 2) {
        const int src = relevant[label_rng.uniform_below(relevant.size())];
        int dst = src;
        while (dst == src) {
          const double u = label_rng.uniform01() * total_rate;
          dst = K - 1;
          for (int k = 0; k < K; ++k) {
            if (u < cum_rates[static_cast<std::size_t>(k)]) {
              dst = k;
              break;
            }
          }
        }
        ex.labels[static_cast<std::size_t>(dst)] = 1;
      }
    }

    ex.features.assign(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < d; ++j) ex.features[static_cast<std::size_t>(j)] = noise_rng.normal();
    for (int k = 0; k < K; ++k) {
      if (!ex.labels[static_cast<std::size_t>(k)]) continue;
      const auto& mu = prototypes[static_cast<std::size_t>(k)];
      for (int j = 0; j < d; ++j) ex.features[static_cast<std::size_t>(j)] += mu[static_cast<std::size_t>(j)];
    }
  }
  return ds;
}

inline ClassStats class_stats_for(const MultiLabelDataset& ds, int k) {
  if (ds.examples.empty()) throw std::invalid_argument("class_stats: empty dataset");
  ClassStats s;
  for (const Example& ex : ds.examples)
    (ex.labels[static_cast<std::size_t>(k)] ? s.pos : s.neg) += 1;
  const long n = s.pos + s.neg;
  s.tau = static_cast<double>(std::min(s.pos, s.neg)) / static_cast<double>(n);
  return s;
}

// Per-class (|D_k+|, |D_k-|, tau_k) over ds.class_ids.
inline std::map<int, ClassStats> class_stats(const MultiLabelDataset& ds) {
  std::map<int, ClassStats> out;
  for (int k : ds.class_ids) out[k] = class_stats_for(ds, k);
  return out;
}

struct SplitOptions {
  // Negative-only examples added per task. Unset: pad until every class in the
  // task has at least max(1, pos_k) negatives.
  std::optional<std::size_t> negative_padding;
  int max_attempts = 100;
};

namespace detail {

inline bool has_positive_in(const Example& ex, const std::vector<int>& classes) {
  for (int k : classes)
    if (ex.labels[static_cast<std::size_t>(k)]) return true;
  return false;
}

inline Example masked_copy(const Example& ex, const std::vector<int>& classes) {
  Example out;
  out.features = ex.features;
  out.labels.assign(ex.labels.size(), 0);
  for (int k : classes)
    out.labels[static_cast<std::size_t>(k)] = ex.labels[static_cast<std::size_t>(k)];
  return out;
}

}  // namespace detail

// Random disjoint class partition into T tasks; each task takes every example
// with a positive among its classes (labels masked to the task's class set)
// plus negative-only padding. Examples may repeat across tasks. Retries the
// partition until every task holds a multi-label sample.
inline TaskSequence split_tasks(const MultiLabelDataset& ds, int num_tasks, std::uint64_t seed,
                                const SplitOptions& opt = {}) {
  const int K = ds.num_classes;
  if (num_tasks < 1 || K < num_tasks)
    throw std::invalid_argument("split_tasks: need 1 <= T <= K");
  for (int k : ds.class_ids)
    if (class_stats_for(ds, k).pos == 0)
      throw std::invalid_argument("split_tasks: class " + std::to_string(k) +
                                  " has no positive instance");

  Rng rng = make_stream(seed, StreamTag::split);
  std::string failure;
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    std::vector<int> order = ds.class_ids;
    rng.shuffle(order);

    // Near-equal contiguous chunks; the first K % T tasks get one extra class.
    std::vector<std::vector<int>> partition(static_cast<std::size_t>(num_tasks));
    const int base = K / num_tasks;
    const int extra = K % num_tasks;
    std::size_t cursor = 0;
    for (int t = 0; t < num_tasks; ++t) {
      const int take = base + (t < extra ? 1 : 0);
      for (int j = 0; j < take; ++j) partition[static_cast<std::size_t>(t)].push_back(order[cursor++]);
      std::sort(partition[static_cast<std::size_t>(t)].begin(), partition[static_cast<std::size_t>(t)].end());
    }

    TaskSequence seq;
    seq.feature_dim = ds.feature_dim;
    seq.num_classes = K;
    bool ok = true;
    for (int t = 0; t < num_tasks && ok; ++t) {
      const std::vector<int>& classes = partition[static_cast<std::size_t>(t)];
      Task task;
      task.task_id = t;
      task.class_ids = classes;
      task.data.feature_dim = ds.feature_dim;
      task.data.num_classes = K;
      task.data.class_ids = classes;

      std::vector<std::size_t> pool;  // negative-only candidates
      for (std::size_t i = 0; i < ds.examples.size(); ++i) {
        if (detail::has_positive_in(ds.examples[i], classes))
          task.data.examples.push_back(detail::masked_copy(ds.examples[i], classes));
        else
          pool.push_back(i);
      }

      std::vector<long> pos(classes.size(), 0);
      for (const Example& ex : task.data.examples)
        for (std::size_t c = 0; c < classes.size(); ++c)
          if (ex.labels[static_cast<std::size_t>(classes[c])]) pos[c] += 1;

      // Each padding example is negative for every task class.
      std::size_t need = 0;
      const std::size_t members = task.data.examples.size();
      for (std::size_t c = 0; c < classes.size(); ++c) {
        const std::size_t neg_have = members - static_cast<std::size_t>(pos[c]);
        const std::size_t neg_want = std::max<std::size_t>(1, static_cast<std::size_t>(pos[c]));
        if (neg_want > neg_have) need = std::max(need, neg_want - neg_have);
      }
      std::size_t pad = opt.negative_padding ? std::max(*opt.negative_padding, need) : need;
      pad = std::min(pad, pool.size());

      if (pad > 0) {
        rng.shuffle(pool);
        for (std::size_t j = 0; j < pad; ++j)
          task.data.examples.push_back(detail::masked_copy(ds.examples[pool[j]], classes));
      }

      // Every task class needs one positive, one negative, and the task a
      // multi-label sample; otherwise this partition attempt fails.
      bool multi = false;
      for (const Example& ex : task.data.examples) {
        int cnt = 0;
        for (int k : classes) cnt += ex.labels[static_cast<std::size_t>(k)];
        if (cnt >= 2) {
          multi = true;
          break;
        }
      }
      if (!multi) {
        ok = false;
        failure = "task " + std::to_string(t) + " has no multi-label sample";
        break;
      }
      const std::size_t total = task.data.examples.size();
      for (std::size_t c = 0; c < classes.size(); ++c) {
        long p = 0;
        for (const Example& ex : task.data.examples)
          if (ex.labels[static_cast<std::size_t>(classes[c])]) ++p;
        if (p == 0 || p == static_cast<long>(total)) {
          ok = false;
          failure = "class " + std::to_string(classes[c]) + " one-sided in task " + std::to_string(t);
          break;
        }
      }
      seq.tasks.push_back(std::move(task));
    }
    if (ok) return seq;
  }
  throw std::runtime_error("split_tasks: no valid partition after " +
                           std::to_string(opt.max_attempts) + " attempts (" + failure + ")");
}

}  // namespace maucl
