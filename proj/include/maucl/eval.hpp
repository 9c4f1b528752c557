#pragma once

// Macro-AUC evaluation, continual-learning run records (overall Macro-AUC and
// forgetting), and the batch generalization-bound diagnostic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "maucl/loss.hpp"

namespace maucl {

enum class TieHandling {
  strict,  // ties count as misranked (the printed indicator f(x+) > f(x-))
  half,    // ties contribute 1/2, as common AUC implementations do
};

struct AucReport {
  std::map<int, double> per_class;  // only non-skipped classes
  std::vector<int> skipped;         // zero positives or zero negatives
  double macro = 0.0;               // mean over non-skipped; NaN if none

  bool is_skipped(int k) const {
    return std::find(skipped.begin(), skipped.end(), k) != skipped.end();
  }
};

namespace detail {

// Pair-counting AUC for one class via an ascending sort; exact integer
// arithmetic, ties handled per convention. numerator is in units of half
// pairs so the half convention stays exact.
inline double class_auc(std::span<const double> scores, std::span<const std::uint8_t> labels,
                        TieHandling ties) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::uint64_t pos_total = 0, neg_total = 0;
  for (std::size_t i = 0; i < n; ++i) (labels[i] ? pos_total : neg_total) += 1;
  if (pos_total == 0 || neg_total == 0)
    throw std::logic_error("class_auc: degenerate class must be skipped by the caller");

  std::uint64_t twice_correct = 0;
  std::uint64_t neg_below = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::uint64_t pos_here = 0, neg_here = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? pos_here : neg_here) += 1;
      ++j;
    }
    twice_correct += 2 * pos_here * neg_below;
    if (ties == TieHandling::half) twice_correct += pos_here * neg_here;
    neg_below += neg_here;
    i = j;
  }
  return static_cast<double>(twice_correct) /
         (2.0 * static_cast<double>(pos_total) * static_cast<double>(neg_total));
}

}  // namespace detail

// Per-class AUC over the view's classes; degenerate classes are skipped from
// the macro mean and listed.
inline AucReport macro_auc(const BatchView& batch, const std::vector<int>& class_set,
                           TieHandling ties = TieHandling::strict) {
  if (class_set.empty()) throw std::invalid_argument("macro_auc: empty class set");
  AucReport report;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  double acc = 0.0;
  for (int k : class_set) {
    scores.resize(batch.n);
    labels.resize(batch.n);
    bool any_pos = false, any_neg = false;
    for (std::size_t i = 0; i < batch.n; ++i) {
      scores[i] = batch.score(i, k);
      labels[i] = batch.label(i, k);
      (labels[i] ? any_pos : any_neg) = true;
    }
    if (!any_pos || !any_neg) {
      report.skipped.push_back(k);
      continue;
    }
    const double auc = detail::class_auc(scores, labels, ties);
    report.per_class[k] = auc;
    acc += auc;
  }
  report.macro = report.per_class.empty()
                     ? std::numeric_limits<double>::quiet_NaN()
                     : acc / static_cast<double>(report.per_class.size());
  return report;
}

// auc[l][j]: Macro-AUC on task j's test set evaluated after finishing task l
// (0-based, j <= l). overall[l] is the running mean over seen tasks.
struct RunRecord {
  std::vector<std::vector<double>> auc;
  std::vector<double> overall;

  int num_checkpoints() const { return static_cast<int>(auc.size()); }

  void push_checkpoint(std::vector<double> row) {
    if (row.size() != auc.size() + 1)
      throw std::invalid_argument("RunRecord: checkpoint row must cover all seen tasks");
    double acc = 0.0;
    for (double v : row) acc += v;
    overall.push_back(acc / static_cast<double>(row.size()));
    auc.push_back(std::move(row));
  }
};

inline double overall_macro_auc(const RunRecord& run, int checkpoint) {
  if (checkpoint < 1 || checkpoint > run.num_checkpoints())
    throw std::invalid_argument("overall_macro_auc: checkpoint out of range");
  return run.overall[static_cast<std::size_t>(checkpoint - 1)];
}

enum class ForgettingKind {
  best_checkpoint,      // drop from the best checkpoint seen (never negative)
  previous_checkpoint,  // drop from the immediately previous checkpoint
};

struct ForgettingReport {
  std::vector<double> per_task;  // tasks 0..T-2
  double mean = 0.0;
};

inline ForgettingReport forgetting(const RunRecord& run,
                                   ForgettingKind kind = ForgettingKind::best_checkpoint) {
  const int T = run.num_checkpoints();
  if (T < 2) throw std::invalid_argument("forgetting: needs at least two tasks");
  ForgettingReport rep;
  double acc = 0.0;
  for (int j = 0; j + 1 < T; ++j) {
    const double final_auc = run.auc[static_cast<std::size_t>(T - 1)][static_cast<std::size_t>(j)];
    double f;
    if (kind == ForgettingKind::best_checkpoint) {
      double best = final_auc;  // max over checkpoints including the final one
      for (int l = j; l < T; ++l)
        best = std::max(best, run.auc[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)]);
      f = best - final_auc;
    } else {
      f = run.auc[static_cast<std::size_t>(T - 2)][static_cast<std::size_t>(j)] - final_auc;
    }
    rep.per_task.push_back(f);
    acc += f;
  }
  rep.mean = acc / static_cast<double>(rep.per_task.size());
  return rep;
}

// Inputs of the batch learning-guarantee: norm cap and feature radius, sample
// size, per-class imbalance tau_k and Lipschitz factors rho = 1/delta, the
// empirical base-loss bound, and the confidence level.
struct BoundInputs {
  double norm_cap = 0.0;  // Lambda
  double radius = 0.0;    // r, bound on the feature-map norm
  std::size_t n = 0;
  std::map<int, double> tau;
  std::map<int, double> rho_pos;
  std::map<int, double> rho_neg;
  double loss_bound = 0.0;  // B, empirical max of the base loss
  double delta = 0.05;      // confidence
};

struct BoundReport {
  double complexity_term = 0.0;
  double confidence_term = 0.0;
  double total = 0.0;
};

// R <= R_hat + (4*Lambda*r/sqrt(n)) * (1/K) sum_k sqrt(1/tau_k)(rho_k+ + rho_k-)
//           + 6*B*sqrt(log(2/delta)/(2n)) * sqrt((1/K) sum_k 1/tau_k)
inline BoundReport batch_bound(const BoundInputs& b, double empirical_risk) {
  if (b.n == 0) throw std::invalid_argument("batch_bound: n must be positive");
  if (!(b.delta > 0.0 && b.delta < 1.0))
    throw std::invalid_argument("batch_bound: delta must lie in (0,1)");
  if (b.tau.empty()) throw std::invalid_argument("batch_bound: no classes");
  const double K = static_cast<double>(b.tau.size());
  double rho_sum = 0.0;
  double inv_tau_sum = 0.0;
  for (const auto& [k, tau_k] : b.tau) {
    if (!(tau_k > 0.0)) throw std::invalid_argument("batch_bound: tau must be positive");
    rho_sum += std::sqrt(1.0 / tau_k) * (b.rho_pos.at(k) + b.rho_neg.at(k));
    inv_tau_sum += 1.0 / tau_k;
  }
  BoundReport rep;
  rep.complexity_term = (4.0 * b.norm_cap * b.radius / std::sqrt(static_cast<double>(b.n))) *
                        (rho_sum / K);
  rep.confidence_term = 6.0 * b.loss_bound *
                        std::sqrt(std::log(2.0 / b.delta) / (2.0 * static_cast<double>(b.n))) *
                        std::sqrt(inv_tau_sum / K);
  rep.total = empirical_risk + rep.complexity_term + rep.confidence_term;
  return rep;
}

}  // namespace maucl
