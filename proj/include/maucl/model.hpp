#pragma once

// Norm-bounded linear scorer over a pluggable feature map, with analytic
// gradients of the task risks and the two-gradient SGD update used by the
// replay training loop.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "maucl/dataset.hpp"
#include "maucl/loss.hpp"
#include "maucl/memory.hpp"
#include "maucl/rng.hpp"

namespace maucl {

struct IdentityMap {
  int dim = 0;
};

// phi(x) = sqrt(2/D) * cos(Omega x + b) with Omega entries N(0, 1/bandwidth^2)
// and phases uniform in [0, 2*pi); approximates a Gaussian kernel and keeps
// ||phi(x)|| <= sqrt(2).
struct RandomFourierMap {
  int input_dim = 0;
  int dim = 0;
  double bandwidth = 1.0;
  std::uint64_t seed = 0;
  std::vector<double> omega;  // dim x input_dim, row-major
  std::vector<double> phase;  // dim

  static RandomFourierMap make(int input_dim, int dim, double bandwidth, std::uint64_t seed) {
    if (input_dim < 1 || dim < 1)
      throw std::invalid_argument("RandomFourierMap: dimensions must be >= 1");
    if (!(bandwidth > 0.0))
      throw std::invalid_argument("RandomFourierMap: bandwidth must be positive");
    RandomFourierMap m;
    m.input_dim = input_dim;
    m.dim = dim;
    m.bandwidth = bandwidth;
    m.seed = seed;
    Rng rng = make_stream(seed, StreamTag::feature_map);
    m.omega.resize(static_cast<std::size_t>(dim) * static_cast<std::size_t>(input_dim));
    for (double& v : m.omega) v = rng.normal() / bandwidth;
    m.phase.resize(static_cast<std::size_t>(dim));
    for (double& v : m.phase) v = rng.uniform01() * 6.283185307179586476925286766559;
    return m;
  }
};

class FeatureMap {
 public:
  FeatureMap() : impl_(IdentityMap{0}) {}
  explicit FeatureMap(IdentityMap m) : impl_(m) {}
  explicit FeatureMap(RandomFourierMap m) : impl_(std::move(m)) {}

  static FeatureMap identity(int dim) { return FeatureMap(IdentityMap{dim}); }
  static FeatureMap random_fourier(int input_dim, int dim, double bandwidth, std::uint64_t seed) {
    return FeatureMap(RandomFourierMap::make(input_dim, dim, bandwidth, seed));
  }

  int output_dim() const {
    if (std::holds_alternative<IdentityMap>(impl_)) return std::get<IdentityMap>(impl_).dim;
    return std::get<RandomFourierMap>(impl_).dim;
  }

  bool is_identity() const { return std::holds_alternative<IdentityMap>(impl_); }

  void apply(std::span<const double> x, std::span<double> out) const {
    if (std::holds_alternative<IdentityMap>(impl_)) {
      const auto& m = std::get<IdentityMap>(impl_);
      if (static_cast<int>(x.size()) != m.dim || out.size() != x.size())
        throw std::invalid_argument("FeatureMap: dimension mismatch");
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
      return;
    }
    const auto& m = std::get<RandomFourierMap>(impl_);
    if (static_cast<int>(x.size()) != m.input_dim || static_cast<int>(out.size()) != m.dim)
      throw std::invalid_argument("FeatureMap: dimension mismatch");
    const double scale = std::sqrt(2.0 / static_cast<double>(m.dim));
    for (int j = 0; j < m.dim; ++j) {
      double acc = m.phase[static_cast<std::size_t>(j)];
      const double* row = m.omega.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(m.input_dim);
      for (int i = 0; i < m.input_dim; ++i) acc += row[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(j)] = scale * std::cos(acc);
    }
  }

  std::vector<double> map_batch(const std::vector<const Example*>& batch) const {
    std::vector<double> mapped(batch.size() * static_cast<std::size_t>(output_dim()));
    for (std::size_t i = 0; i < batch.size(); ++i)
      apply(batch[i]->features,
            std::span<double>(mapped.data() + i * static_cast<std::size_t>(output_dim()),
                              static_cast<std::size_t>(output_dim())));
    return mapped;
  }

 private:
  std::variant<IdentityMap, RandomFourierMap> impl_;
};

// Single-head linear scorer: one weight row per global class, optional per-row
// norm cap enforced by projection after every update.
struct Scorer {
  int num_classes = 0;
  int feature_dim = 0;
  std::vector<double> weights;  // num_classes x feature_dim, row-major
  std::optional<double> norm_cap;

  static Scorer zeros(int num_classes, int feature_dim, std::optional<double> norm_cap = {}) {
    Scorer s;
    s.num_classes = num_classes;
    s.feature_dim = feature_dim;
    s.weights.assign(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(feature_dim), 0.0);
    s.norm_cap = norm_cap;
    return s;
  }

  std::span<double> row(int k) {
    return {weights.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(feature_dim),
            static_cast<std::size_t>(feature_dim)};
  }
  std::span<const double> row(int k) const {
    return {weights.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(feature_dim),
            static_cast<std::size_t>(feature_dim)};
  }

  double row_norm(int k) const {
    double acc = 0.0;
    for (double v : row(k)) acc += v * v;
    return std::sqrt(acc);
  }
};

// Scores for mapped features (n x feature_dim) -> n x num_classes.
inline std::vector<double> forward(const Scorer& s, std::span<const double> mapped, std::size_t n) {
  if (mapped.size() != n * static_cast<std::size_t>(s.feature_dim))
    throw std::invalid_argument("forward: feature dimension mismatch");
  std::vector<double> scores(n * static_cast<std::size_t>(s.num_classes), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = mapped.data() + i * static_cast<std::size_t>(s.feature_dim);
    for (int k = 0; k < s.num_classes; ++k) {
      const double* w = s.weights.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(s.feature_dim);
      double acc = 0.0;
      for (int j = 0; j < s.feature_dim; ++j) acc += w[j] * x[j];
      scores[i * static_cast<std::size_t>(s.num_classes) + static_cast<std::size_t>(k)] = acc;
    }
  }
  return scores;
}

struct ModelBatch {
  std::vector<double> mapped;         // n x feature_dim
  std::vector<std::uint8_t> labels;   // n x num_classes
  std::size_t n = 0;
};

struct RiskGrad {
  double risk = 0.0;
  std::vector<double> grad;   // num_classes x feature_dim
  std::vector<int> dropped;   // degenerate classes in this view
};

// Risk of the batch under the loss spec plus d(risk)/dW via the chain rule.
// Rows for classes outside class_set stay exactly zero.
inline RiskGrad risk_and_grad(const Scorer& s, const ModelBatch& batch,
                              const std::vector<int>& class_set, const ClassWeights& weights,
                              const MarginSchedule& sched, const LossSpec& spec) {
  if (batch.n == 0) throw std::invalid_argument("risk_and_grad: empty batch");
  const std::vector<double> scores = forward(s, batch.mapped, batch.n);
  BatchView view{scores, batch.labels, batch.n, static_cast<std::size_t>(s.num_classes)};

  std::vector<double> dscore(scores.size(), 0.0);
  TaskRiskResult r = task_risk_grad(view, class_set, weights, sched, spec, dscore);

  RiskGrad out;
  out.risk = r.value;
  out.dropped = std::move(r.dropped);
  out.grad.assign(s.weights.size(), 0.0);
  for (std::size_t i = 0; i < batch.n; ++i) {
    const double* x = batch.mapped.data() + i * static_cast<std::size_t>(s.feature_dim);
    for (int k : class_set) {
      const double g = dscore[i * static_cast<std::size_t>(s.num_classes) + static_cast<std::size_t>(k)];
      if (g == 0.0) continue;
      double* row = out.grad.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(s.feature_dim);
      for (int j = 0; j < s.feature_dim; ++j) row[j] += g * x[j];
    }
  }
  return out;
}

// Two-gradient update: subtract eta * grad_current, then eta * grad_memory,
// then apply weight decay and project rows onto the norm cap.
inline void sgd_step(Scorer& s, std::span<const double> grad_current,
                     std::span<const double> grad_memory, double eta, double weight_decay) {
  if (grad_current.size() != s.weights.size() ||
      (!grad_memory.empty() && grad_memory.size() != s.weights.size()))
    throw std::invalid_argument("sgd_step: gradient shape mismatch");
  for (double g : grad_current)
    if (!std::isfinite(g)) throw std::runtime_error("sgd_step: non-finite current gradient");
  for (double g : grad_memory)
    if (!std::isfinite(g)) throw std::runtime_error("sgd_step: non-finite memory gradient");

  for (std::size_t i = 0; i < s.weights.size(); ++i) s.weights[i] -= eta * grad_current[i];
  if (!grad_memory.empty())
    for (std::size_t i = 0; i < s.weights.size(); ++i) s.weights[i] -= eta * grad_memory[i];
  if (weight_decay > 0.0)
    for (double& w : s.weights) w -= eta * weight_decay * w;
  if (s.norm_cap) {
    for (int k = 0; k < s.num_classes; ++k) {
      const double nrm = s.row_norm(k);
      if (nrm > *s.norm_cap) {
        const double f = *s.norm_cap / nrm;
        for (double& w : s.row(k)) w *= f;
      }
    }
  }
}

struct SgdConfig {
  double eta = 0.05;
  int batch_size = 32;
  int epochs = 30;
  double weight_decay = 1e-5;
  double momentum = 0.0;
  std::uint64_t seed = 0;
};

inline void validate(const SgdConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("sgd: eta must be positive");
  if (cfg.batch_size < 1) throw std::invalid_argument("sgd: batch_size must be >= 1");
  if (cfg.epochs < 1) throw std::invalid_argument("sgd: epochs must be >= 1");
  if (cfg.weight_decay < 0.0) throw std::invalid_argument("sgd: weight_decay must be >= 0");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
    throw std::invalid_argument("sgd: momentum must lie in [0,1)");
}

// Which counts reweight replayed data: the memory view's own counts (each
// side an unbiased class-conditional mean) or the stored original counts.
enum class ReplayWeights { memory_view, stored_counts };

struct EpochLog {
  double mean_batch_risk = 0.0;
  double mean_memory_risk = 0.0;
  long dropped_class_events = 0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
};

struct TaskContext {
  const MultiLabelDataset* data = nullptr;  // the task's training data
  std::vector<int> class_ids;
  int task_id = 0;
  MarginSchedule margins;  // built from the training data's positive counts
};

// Loss context for one task held in memory: its class set, the margins to
// apply to replayed samples, and the reweighting built from stored original
// counts when the policy recorded them.
struct MemoryTaskInfo {
  std::vector<int> class_ids;
  MarginSchedule margins;
  ClassWeights stored_weights;
  bool has_stored = false;
};

// One pass of the replay training procedure over a task: for every minibatch
// of the task's data, pair it with a same-size memory batch (omitted while
// the memory is empty, i.e. the first task runs plain batch learning), take
// the two-gradient step, and log per-epoch risks. Deterministic given seeds.
inline TrainLog train_task(Scorer& scorer, const TaskContext& task, const MemoryBuffer* memory,
                           const std::map<int, MemoryTaskInfo>& memory_tasks,
                           const LossSpec& spec, bool reweighted, ReplayWeights replay_weights,
                           const SgdConfig& cfg, const FeatureMap& map) {
  validate(cfg);
  const MultiLabelDataset& data = *task.data;
  const std::size_t n = data.examples.size();
  if (n == 0) throw std::invalid_argument("train_task: empty task dataset");
  const bool replay = memory != nullptr && !memory->empty();

  // Feature-map the task once; memory contents are fixed during the task, so
  // map them once as well.
  std::vector<const Example*> ptrs(n);
  for (std::size_t i = 0; i < n; ++i) ptrs[i] = &data.examples[i];
  const std::vector<double> mapped_all = map.map_batch(ptrs);
  const int fdim = map.output_dim();
  const std::size_t K = static_cast<std::size_t>(scorer.num_classes);

  std::vector<double> mapped_mem;
  if (replay) {
    std::vector<const Example*> mptrs;
    mptrs.reserve(memory->size());
    for (const StoredExample& se : memory->store()) mptrs.push_back(&se.example);
    mapped_mem = map.map_batch(mptrs);
  }

  TrainLog log;
  std::vector<double> velocity;
  if (cfg.momentum > 0.0) velocity.assign(scorer.weights.size(), 0.0);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = make_stream(cfg.seed, StreamTag::shuffle,
                                  static_cast<std::uint64_t>(task.task_id),
                                  static_cast<std::uint64_t>(epoch));
    Rng mem_rng = make_stream(cfg.seed, StreamTag::memory_sample,
                              static_cast<std::uint64_t>(task.task_id),
                              static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    EpochLog elog;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t bsize = stop - start;

      ModelBatch batch;
      batch.n = bsize;
      batch.mapped.resize(bsize * static_cast<std::size_t>(fdim));
      batch.labels.resize(bsize * K);
      for (std::size_t b = 0; b < bsize; ++b) {
        const std::size_t src = order[start + b];
        std::copy_n(mapped_all.data() + src * static_cast<std::size_t>(fdim),
                    static_cast<std::size_t>(fdim),
                    batch.mapped.data() + b * static_cast<std::size_t>(fdim));
        std::copy_n(data.examples[src].labels.data(), K, batch.labels.data() + b * K);
      }

      BatchView lview{std::span<const double>{}, batch.labels, bsize, K};
      const ClassWeights weights =
          reweighted ? weights_from_batch(lview, task.class_ids)
                     : ClassWeights::uniform(bsize, task.class_ids);
      RiskGrad current;
      try {
        current = risk_and_grad(scorer, batch, task.class_ids, weights, task.margins, spec);
      } catch (const std::runtime_error&) {
        // Every class one-sided in this minibatch; skip it.
        continue;
      }
      elog.mean_batch_risk += current.risk;
      elog.dropped_class_events += static_cast<long>(current.dropped.size());

      std::vector<double> grad_memory;
      if (replay) {
        const std::vector<std::size_t> mem_idx =
            memory->sample_indices(static_cast<std::size_t>(cfg.batch_size), mem_rng);

        // Group the sampled batch by source task; each present task
        // contributes its own class set, margins, and weights.
        std::map<int, std::vector<std::size_t>> by_task;
        for (std::size_t i : mem_idx) by_task[memory->store()[i].task_id].push_back(i);

        grad_memory.assign(scorer.weights.size(), 0.0);
        double mem_risk = 0.0;
        int present = 0;
        for (const auto& [tid, rows] : by_task) {
          const auto info_it = memory_tasks.find(tid);
          if (info_it == memory_tasks.end())
            throw std::runtime_error("train_task: no loss context for memory task " +
                                     std::to_string(tid));
          const MemoryTaskInfo& info = info_it->second;

          ModelBatch slice;
          slice.n = rows.size();
          slice.mapped.resize(rows.size() * static_cast<std::size_t>(fdim));
          slice.labels.resize(rows.size() * K);
          for (std::size_t r = 0; r < rows.size(); ++r) {
            const StoredExample& se = memory->store()[rows[r]];
            std::copy_n(mapped_mem.data() + rows[r] * static_cast<std::size_t>(fdim),
                        static_cast<std::size_t>(fdim),
                        slice.mapped.data() + r * static_cast<std::size_t>(fdim));
            std::copy_n(se.example.labels.data(), K, slice.labels.data() + r * K);
          }

          BatchView sview{std::span<const double>{}, slice.labels, slice.n, K};
          ClassWeights wts;
          if (!reweighted)
            wts = ClassWeights::uniform(slice.n, info.class_ids);
          else if (replay_weights == ReplayWeights::stored_counts && info.has_stored)
            wts = info.stored_weights;
          else
            wts = weights_from_batch(sview, info.class_ids);

          RiskGrad part;
          try {
            part = risk_and_grad(scorer, slice, info.class_ids, wts, info.margins, spec);
          } catch (const std::runtime_error&) {
            continue;  // every class of this slice one-sided
          }
          mem_risk += part.risk;
          elog.dropped_class_events += static_cast<long>(part.dropped.size());
          for (std::size_t i = 0; i < grad_memory.size(); ++i) grad_memory[i] += part.grad[i];
          ++present;
        }
        if (present > 0) {
          const double inv = 1.0 / present;
          for (double& g : grad_memory) g *= inv;
          mem_risk *= inv;
          elog.mean_memory_risk += mem_risk;
        } else {
          grad_memory.clear();
        }
      }

      if (cfg.momentum > 0.0) {
        for (std::size_t i = 0; i < velocity.size(); ++i) {
          double g = current.grad[i];
          if (!grad_memory.empty()) g += grad_memory[i];
          velocity[i] = cfg.momentum * velocity[i] + g;
        }
        sgd_step(scorer, velocity, {}, cfg.eta, cfg.weight_decay);
      } else {
        sgd_step(scorer, current.grad, grad_memory, cfg.eta, cfg.weight_decay);
      }
      ++batches;
    }
    if (batches > 0) {
      elog.mean_batch_risk /= static_cast<double>(batches);
      elog.mean_memory_risk /= static_cast<double>(batches);
    }
    log.epochs.push_back(elog);
  }
  return log;
}

}  // namespace maucl
