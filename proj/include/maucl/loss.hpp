#pragma once

// The reweighted label-distribution-aware margin loss family. A per-class
// pair loss applies a base loss to margin-shifted scores; the per-class risk
// reweights positive and negative sides separately; task risk averages over
// the task's classes. Margins shrink with the fourth root of the positive
// count. The RU variant is the same loss with all margins zero; BCE is the
// unweighted baseline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace maucl {

enum class BaseKind { hinge, logistic };
enum class LossKind { rldam, ru, bce };

inline std::string to_string(BaseKind b) { return b == BaseKind::hinge ? "hinge" : "logistic"; }
inline std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::rldam: return "rldam";
    case LossKind::ru: return "ru";
    default: return "bce";
  }
}

// hinge: max(0, 1 - z), subgradient 0 at the kink.
// logistic: log(1 + e^-z), evaluated stably for large |z|.
inline double base_loss(double z, BaseKind kind) {
  if (kind == BaseKind::hinge) return std::max(0.0, 1.0 - z);
  return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

inline double base_loss_grad(double z, BaseKind kind) {
  if (kind == BaseKind::hinge) return z < 1.0 ? -1.0 : 0.0;
  return -1.0 / (1.0 + std::exp(z));
}

struct MarginSchedule {
  double lambda = 0.0;
  std::map<int, double> delta_pos;
  std::map<int, double> delta_neg;

  double pos(int k) const {
    auto it = delta_pos.find(k);
    return it == delta_pos.end() ? 0.0 : it->second;
  }
  double neg(int k) const {
    auto it = delta_neg.find(k);
    return it == delta_neg.end() ? 0.0 : it->second;
  }
};

// delta_k = lambda / |D_k+|^(1/4), equal on the positive and negative side.
inline MarginSchedule build_margins(const std::map<int, long>& counts_pos, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("build_margins: lambda must be >= 0");
  MarginSchedule sched;
  sched.lambda = lambda;
  for (const auto& [k, count] : counts_pos) {
    if (count < 1)
      throw std::invalid_argument("build_margins: class " + std::to_string(k) +
                                  " has zero positives; exclude it upstream");
    const double delta = lambda / std::pow(static_cast<double>(count), 0.25);
    sched.delta_pos[k] = delta;
    sched.delta_neg[k] = delta;
  }
  return sched;
}

struct LossSpec {
  LossKind kind = LossKind::rldam;
  BaseKind base = BaseKind::hinge;
  double lambda = 0.0;
  // Scales the shifted argument by 1/delta_k so the per-class loss is
  // (1/delta_k)-Lipschitz. Off by default: the plain base loss is applied to
  // the shifted argument as printed. No effect where delta_k = 0.
  bool normalized_margin = false;
};

namespace detail {

inline double margin_term(double shifted, double delta, const LossSpec& spec) {
  if (spec.normalized_margin && delta > 0.0) return base_loss(shifted / delta, spec.base);
  return base_loss(shifted, spec.base);
}

// d(term)/d(shifted argument)
inline double margin_term_grad(double shifted, double delta, const LossSpec& spec) {
  if (spec.normalized_margin && delta > 0.0)
    return base_loss_grad(shifted / delta, spec.base) / delta;
  return base_loss_grad(shifted, spec.base);
}

inline double effective_delta(const MarginSchedule& sched, int k, const LossSpec& spec, bool pos) {
  if (spec.kind != LossKind::rldam) return 0.0;
  return pos ? sched.pos(k) : sched.neg(k);
}

}  // namespace detail

// Two-term pair loss for one positive and one negative score of class k.
inline double rldam_pair(double f_pos, double f_neg, int k, const MarginSchedule& sched,
                         const LossSpec& spec) {
  const double dp = detail::effective_delta(sched, k, spec, true);
  const double dn = detail::effective_delta(sched, k, spec, false);
  return detail::margin_term(f_pos - dp, dp, spec) + detail::margin_term(-f_neg - dn, dn, spec);
}

// Per-class reweighting factors together with the counts they came from.
struct WeightEntry {
  double w_pos = 0.0;
  double w_neg = 0.0;
  long count_pos = 0;
  long count_neg = 0;
};

struct ClassWeights {
  std::map<int, WeightEntry> by_class;

  WeightEntry get(int k) const {
    auto it = by_class.find(k);
    if (it == by_class.end())
      throw std::invalid_argument("ClassWeights: no entry for class " + std::to_string(k));
    return it->second;
  }

  // 1/count reweighting from explicit per-class counts; zero counts yield a
  // zero weight on that (necessarily empty) side.
  static ClassWeights from_counts(const std::map<int, std::pair<long, long>>& counts) {
    ClassWeights w;
    for (const auto& [k, pn] : counts) {
      WeightEntry e;
      e.count_pos = pn.first;
      e.count_neg = pn.second;
      e.w_pos = pn.first > 0 ? 1.0 / static_cast<double>(pn.first) : 0.0;
      e.w_neg = pn.second > 0 ? 1.0 / static_cast<double>(pn.second) : 0.0;
      w.by_class[k] = e;
    }
    return w;
  }

  // Unweighted mode: both sides weighted 1/n (the margins-without-reweighting
  // ablation arm).
  static ClassWeights uniform(std::size_t n, const std::vector<int>& class_set) {
    ClassWeights w;
    const double u = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
    for (int k : class_set) {
      WeightEntry e;
      e.w_pos = u;
      e.w_neg = u;
      e.count_pos = static_cast<long>(n);
      e.count_neg = static_cast<long>(n);
      w.by_class[k] = e;
    }
    return w;
  }
};

// One class's scores and 0/1 labels over a sample view.
struct ClassView {
  std::span<const double> scores;
  std::span<const std::uint8_t> labels;
};

struct ClassRiskResult {
  double value = 0.0;
  bool pos_empty = false;
  bool neg_empty = false;

  bool degenerate() const { return pos_empty || neg_empty; }
};

// Per-class empirical risk over a view: reweighted sum of margin-shifted
// base losses, positives and negatives weighted separately. A missing side
// contributes zero and is flagged; the caller decides what to do with it.
inline ClassRiskResult class_risk(const ClassView& view, const WeightEntry& w, int k,
                                  const MarginSchedule& sched, const LossSpec& spec) {
  if (view.scores.size() != view.labels.size())
    throw std::invalid_argument("class_risk: scores/labels size mismatch");
  const double dp = detail::effective_delta(sched, k, spec, true);
  const double dn = detail::effective_delta(sched, k, spec, false);
  ClassRiskResult r;
  long pos = 0, neg = 0;
  for (std::size_t i = 0; i < view.scores.size(); ++i) {
    const double f = view.scores[i];
    if (view.labels[i]) {
      r.value += w.w_pos * detail::margin_term(f - dp, dp, spec);
      ++pos;
    } else {
      r.value += w.w_neg * detail::margin_term(-f - dn, dn, spec);
      ++neg;
    }
  }
  r.pos_empty = pos == 0;
  r.neg_empty = neg == 0;
  return r;
}

// d(class_risk)/d(score_i), accumulated into grad (same length as the view).
inline ClassRiskResult class_risk_grad(const ClassView& view, const WeightEntry& w, int k,
                                       const MarginSchedule& sched, const LossSpec& spec,
                                       std::span<double> grad, double scale) {
  if (view.scores.size() != view.labels.size() || grad.size() != view.scores.size())
    throw std::invalid_argument("class_risk_grad: size mismatch");
  const double dp = detail::effective_delta(sched, k, spec, true);
  const double dn = detail::effective_delta(sched, k, spec, false);
  ClassRiskResult r;
  long pos = 0, neg = 0;
  for (std::size_t i = 0; i < view.scores.size(); ++i) {
    const double f = view.scores[i];
    if (view.labels[i]) {
      r.value += w.w_pos * detail::margin_term(f - dp, dp, spec);
      grad[i] += scale * w.w_pos * detail::margin_term_grad(f - dp, dp, spec);
      ++pos;
    } else {
      r.value += w.w_neg * detail::margin_term(-f - dn, dn, spec);
      grad[i] += scale * w.w_neg * -detail::margin_term_grad(-f - dn, dn, spec);
      ++neg;
    }
  }
  r.pos_empty = pos == 0;
  r.neg_empty = neg == 0;
  return r;
}

struct TaskRiskResult {
  double value = 0.0;
  std::vector<int> dropped;  // degenerate classes excluded from the mean
  int used = 0;
};

// Batch view of scores and labels, row-major: n examples x K global classes.
struct BatchView {
  std::span<const double> scores;
  std::span<const std::uint8_t> labels;
  std::size_t n = 0;
  std::size_t num_classes = 0;

  double score(std::size_t i, int k) const { return scores[i * num_classes + static_cast<std::size_t>(k)]; }
  std::uint8_t label(std::size_t i, int k) const { return labels[i * num_classes + static_cast<std::size_t>(k)]; }
};

namespace detail {

inline void extract_class(const BatchView& batch, int k, std::vector<double>& scores,
                          std::vector<std::uint8_t>& labels) {
  scores.resize(batch.n);
  labels.resize(batch.n);
  for (std::size_t i = 0; i < batch.n; ++i) {
    scores[i] = batch.score(i, k);
    labels[i] = batch.label(i, k);
  }
}

}  // namespace detail

// Unweighted binary cross-entropy with logits, mean over classes and samples.
inline double bce_risk(const BatchView& batch, const std::vector<int>& class_set) {
  if (class_set.empty()) throw std::invalid_argument("bce_risk: empty class set");
  if (batch.n == 0) throw std::invalid_argument("bce_risk: empty batch");
  double acc = 0.0;
  for (int k : class_set) {
    for (std::size_t i = 0; i < batch.n; ++i) {
      const double z = batch.score(i, k);
      const double y = batch.label(i, k) ? 1.0 : 0.0;
      acc += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
  }
  return acc / (static_cast<double>(batch.n) * static_cast<double>(class_set.size()));
}

inline double bce_risk_grad(const BatchView& batch, const std::vector<int>& class_set,
                            std::span<double> grad_scores) {
  if (class_set.empty()) throw std::invalid_argument("bce_risk_grad: empty class set");
  if (batch.n == 0) throw std::invalid_argument("bce_risk_grad: empty batch");
  const double scale = 1.0 / (static_cast<double>(batch.n) * static_cast<double>(class_set.size()));
  double acc = 0.0;
  for (int k : class_set) {
    for (std::size_t i = 0; i < batch.n; ++i) {
      const double z = batch.score(i, k);
      const double y = batch.label(i, k) ? 1.0 : 0.0;
      acc += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
      const double sigma = 1.0 / (1.0 + std::exp(-z));
      grad_scores[i * batch.num_classes + static_cast<std::size_t>(k)] += scale * (sigma - y);
    }
  }
  return acc * scale;
}

// Task risk: mean of class risks over the task's class set. Degenerate
// classes (a side missing in the view) are dropped from the mean and
// reported. BCE ignores weights, margins, and the drop rule.
inline TaskRiskResult task_risk(const BatchView& batch, const std::vector<int>& class_set,
                                const ClassWeights& weights, const MarginSchedule& sched,
                                const LossSpec& spec) {
  if (class_set.empty()) throw std::invalid_argument("task_risk: empty class set");
  TaskRiskResult out;
  if (spec.kind == LossKind::bce) {
    out.value = bce_risk(batch, class_set);
    out.used = static_cast<int>(class_set.size());
    return out;
  }
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  double acc = 0.0;
  for (int k : class_set) {
    detail::extract_class(batch, k, scores, labels);
    const ClassRiskResult r =
        class_risk({scores, labels}, weights.get(k), k, sched, spec);
    if (r.degenerate()) {
      out.dropped.push_back(k);
      continue;
    }
    acc += r.value;
    out.used += 1;
  }
  if (out.used == 0) throw std::runtime_error("task_risk: all classes degenerate in this view");
  out.value = acc / out.used;
  return out;
}

// task_risk plus d(risk)/d(score), written into grad_scores (n x K, zeroed by
// the caller or accumulated into as-is).
inline TaskRiskResult task_risk_grad(const BatchView& batch, const std::vector<int>& class_set,
                                     const ClassWeights& weights, const MarginSchedule& sched,
                                     const LossSpec& spec, std::span<double> grad_scores) {
  if (class_set.empty()) throw std::invalid_argument("task_risk_grad: empty class set");
  if (grad_scores.size() != batch.n * batch.num_classes)
    throw std::invalid_argument("task_risk_grad: gradient buffer size mismatch");
  TaskRiskResult out;
  if (spec.kind == LossKind::bce) {
    out.value = bce_risk_grad(batch, class_set, grad_scores);
    out.used = static_cast<int>(class_set.size());
    return out;
  }
  // Two passes: the divisor is the count of non-degenerate classes.
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  std::vector<int> active;
  for (int k : class_set) {
    detail::extract_class(batch, k, scores, labels);
    const ClassRiskResult r = class_risk({scores, labels}, weights.get(k), k, sched, spec);
    if (r.degenerate())
      out.dropped.push_back(k);
    else
      active.push_back(k);
  }
  if (active.empty()) throw std::runtime_error("task_risk_grad: all classes degenerate in this view");
  out.used = static_cast<int>(active.size());
  const double scale = 1.0 / out.used;
  std::vector<double> class_grad;
  double acc = 0.0;
  for (int k : active) {
    detail::extract_class(batch, k, scores, labels);
    class_grad.assign(batch.n, 0.0);
    const ClassRiskResult r =
        class_risk_grad({scores, labels}, weights.get(k), k, sched, spec, class_grad, scale);
    acc += r.value;
    for (std::size_t i = 0; i < batch.n; ++i)
      grad_scores[i * batch.num_classes + static_cast<std::size_t>(k)] += class_grad[i];
  }
  out.value = acc / out.used;
  return out;
}

// Mean of the current-task risk and all per-memory-task risks: the adjusted
// continual risk (1/t)(R_D + sum_i R_M_i).
inline double adjusted_cl_risk(double current_task_risk, std::span<const double> memory_task_risks) {
  double acc = current_task_risk;
  for (double r : memory_task_risks) acc += r;
  return acc / static_cast<double>(1 + memory_task_risks.size());
}

// View-derived reweighting: per-class counts taken from the batch itself.
inline ClassWeights weights_from_batch(const BatchView& batch, const std::vector<int>& class_set) {
  std::map<int, std::pair<long, long>> counts;
  for (int k : class_set) {
    long pos = 0;
    for (std::size_t i = 0; i < batch.n; ++i)
      if (batch.label(i, k)) ++pos;
    counts[k] = {pos, static_cast<long>(batch.n) - pos};
  }
  return ClassWeights::from_counts(counts);
}

}  // namespace maucl
