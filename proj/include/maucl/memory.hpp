#pragma once

// Rehearsal memory. The ratio-retaining policy greedily selects samples whose
// per-class positive/negative ratios track the source dataset and stores the
// source's original counts alongside them; those counts never change, even
// when samples are later evicted. Reservoir sampling and uniform-random
// selection are the baselines (no counts stored).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "maucl/dataset.hpp"
#include "maucl/rng.hpp"

namespace maucl {

enum class MemoryPolicy { wru, reservoir, random };

inline std::string to_string(MemoryPolicy p) {
  switch (p) {
    case MemoryPolicy::wru: return "wru";
    case MemoryPolicy::reservoir: return "reservoir";
    default: return "random";
  }
}

// Rat(D, k) = |D_k+| / |D_k-|; zero negatives yields an infinite ratio that
// compares greater than any finite one.
inline double rat(long pos, long neg) {
  if (neg == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(pos) / static_cast<double>(neg);
}

// |a - b| extended to the infinite sentinel: two infinities agree exactly; a
// single infinity costs a large fixed penalty so the greedy loop avoids
// emptying a class's negatives.
inline double ratio_discrepancy(double a, double b) {
  const bool ia = std::isinf(a), ib = std::isinf(b);
  if (ia && ib) return 0.0;
  if (ia || ib) return 1e6;
  return std::abs(a - b);
}

struct WruSelection {
  std::vector<std::size_t> indices;   // in selection order
  std::size_t evaluations = 0;        // candidates scored (<= quota * subset)
  double final_discrepancy = 0.0;     // summed over the task's classes
};

// Summed per-class ratio discrepancy of an index subset against the full
// dataset's ratios.
inline double selection_discrepancy(const MultiLabelDataset& ds,
                                    const std::vector<std::size_t>& selected) {
  double acc = 0.0;
  for (int k : ds.class_ids) {
    long dpos = 0, dneg = 0, spos = 0, sneg = 0;
    for (std::size_t i = 0; i < ds.examples.size(); ++i)
      (ds.examples[i].labels[static_cast<std::size_t>(k)] ? dpos : dneg) += 1;
    for (std::size_t i : selected)
      (ds.examples[i].labels[static_cast<std::size_t>(k)] ? spos : sneg) += 1;
    acc += ratio_discrepancy(rat(dpos, dneg), rat(spos, sneg));
  }
  return acc;
}

// Greedy ratio-matching selection. Each step scores a fresh random subset of
// the unselected indices (all of them when subset_size is 0 or exceeds the
// remainder) by the discrepancy that adding the candidate would leave, and
// takes the argmin; ties break toward the lowest dataset index.
inline WruSelection wru_select(const MultiLabelDataset& ds, std::size_t quota,
                               std::size_t subset_size, std::uint64_t seed) {
  const std::size_t n = ds.examples.size();
  if (quota > n) throw std::invalid_argument("wru_select: quota exceeds dataset size");
  const std::vector<int>& classes = ds.class_ids;
  const std::size_t C = classes.size();

  std::vector<double> target(C);
  for (std::size_t c = 0; c < C; ++c) {
    long pos = 0;
    for (const Example& ex : ds.examples)
      if (ex.labels[static_cast<std::size_t>(classes[c])]) ++pos;
    target[c] = rat(pos, static_cast<long>(n) - pos);
  }

  Rng rng = make_stream(seed, StreamTag::memory_update);
  std::vector<std::size_t> unselected(n);
  for (std::size_t i = 0; i < n; ++i) unselected[i] = i;

  WruSelection out;
  std::vector<long> sel_pos(C, 0);
  long sel_total = 0;

  while (out.indices.size() < quota) {
    const std::size_t remaining = unselected.size();
    const std::size_t pool = (subset_size == 0 || subset_size >= remaining)
                                 ? remaining
                                 : subset_size;
    // Partial Fisher-Yates: the first `pool` entries become the candidate set.
    for (std::size_t i = 0; i + 1 < remaining && i < pool; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(remaining - i));
      std::swap(unselected[i], unselected[j]);
    }

    double best_score = std::numeric_limits<double>::infinity();
    std::size_t best_pos_in_pool = 0;
    std::size_t best_index = std::numeric_limits<std::size_t>::max();
    for (std::size_t p = 0; p < pool; ++p) {
      const std::size_t cand = unselected[p];
      const Example& ex = ds.examples[cand];
      double score = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        const long pos = sel_pos[c] + (ex.labels[static_cast<std::size_t>(classes[c])] ? 1 : 0);
        const long neg = sel_total + 1 - pos;
        score += ratio_discrepancy(target[c], rat(pos, neg));
      }
      ++out.evaluations;
      if (score < best_score || (score == best_score && cand < best_index)) {
        best_score = score;
        best_index = cand;
        best_pos_in_pool = p;
      }
    }

    out.indices.push_back(best_index);
    const Example& chosen = ds.examples[best_index];
    for (std::size_t c = 0; c < C; ++c)
      if (chosen.labels[static_cast<std::size_t>(classes[c])]) ++sel_pos[c];
    ++sel_total;
    unselected[best_pos_in_pool] = unselected.back();
    unselected.pop_back();
  }
  out.final_discrepancy = selection_discrepancy(ds, out.indices);
  return out;
}

struct StoredExample {
  int task_id = 0;
  Example example;  // labels masked to the source task's class set
};

class MemoryBuffer {
 public:
  explicit MemoryBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("MemoryBuffer: capacity must be >= 1");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return store_.size(); }
  bool empty() const { return store_.empty(); }
  const std::vector<StoredExample>& store() const { return store_; }
  const std::vector<int>& task_ids() const { return task_order_; }

  std::size_t task_count(int task_id) const {
    std::size_t c = 0;
    for (const StoredExample& s : store_)
      if (s.task_id == task_id) ++c;
    return c;
  }

  bool has_stored_counts(int task_id) const { return stored_counts_.count(task_id) > 0; }

  // The source dataset's original per-class (pos, neg) counts, frozen at
  // store time.
  const std::map<int, std::pair<long, long>>& stored_counts(int task_id) const {
    auto it = stored_counts_.find(task_id);
    if (it == stored_counts_.end())
      throw std::invalid_argument("MemoryBuffer: no stored counts for task " +
                                  std::to_string(task_id));
    return it->second;
  }

  // Per-class counts over what is currently stored for a task (the memory
  // view used when original counts are absent or bypassed).
  std::map<int, std::pair<long, long>> view_counts(int task_id, const std::vector<int>& classes) const {
    std::map<int, std::pair<long, long>> counts;
    for (int k : classes) counts[k] = {0, 0};
    for (const StoredExample& s : store_) {
      if (s.task_id != task_id) continue;
      for (int k : classes)
        (s.example.labels[static_cast<std::size_t>(k)] ? counts[k].first : counts[k].second) += 1;
    }
    return counts;
  }

  // Ratio-retaining update: every retained task shrinks to floor(M/t) by
  // seeded uniform removal (stored counts untouched); the new task stores a
  // greedy ratio-matched subset plus its full-dataset counts.
  void update_wru(int task_id, const MultiLabelDataset& task_data, std::size_t subset_size,
                  std::uint64_t seed) {
    begin_task(task_id);
    const std::size_t quota = quota_per_task();
    shrink_existing(quota, seed);
    const std::size_t take = std::min(quota, task_data.examples.size());
    const WruSelection sel = wru_select(task_data, take, subset_size, mix_seed(seed, 0x77u, static_cast<std::uint64_t>(task_id)));
    for (std::size_t i : sel.indices) store_.push_back({task_id, task_data.examples[i]});
    std::map<int, std::pair<long, long>> counts;
    for (const auto& [k, st] : class_stats(task_data)) counts[k] = {st.pos, st.neg};
    stored_counts_.emplace(task_id, std::move(counts));
  }

  // Uniform-random per-task selection with the same quota mechanics; no
  // counts stored.
  void update_random(int task_id, const MultiLabelDataset& task_data, std::uint64_t seed) {
    begin_task(task_id);
    const std::size_t quota = quota_per_task();
    shrink_existing(quota, seed);
    const std::size_t take = std::min(quota, task_data.examples.size());
    Rng rng = make_stream(seed, StreamTag::memory_update, static_cast<std::uint64_t>(task_id));
    for (std::size_t i : rng.sample_without_replacement(task_data.examples.size(), take))
      store_.push_back({task_id, task_data.examples[i]});
  }

  // Classic reservoir over the concatenated task stream: item i of a length-n
  // stream ends up stored with probability exactly M/n.
  void update_reservoir(int task_id, const MultiLabelDataset& task_data, std::uint64_t seed) {
    if (std::find(task_order_.begin(), task_order_.end(), task_id) == task_order_.end())
      task_order_.push_back(task_id);
    Rng rng = make_stream(seed, StreamTag::memory_update, static_cast<std::uint64_t>(task_id));
    for (const Example& ex : task_data.examples) {
      ++stream_seen_;
      if (store_.size() < capacity_) {
        store_.push_back({task_id, ex});
      } else {
        const std::uint64_t j = rng.uniform_below(stream_seen_);
        if (j < capacity_) store_[static_cast<std::size_t>(j)] = {task_id, ex};
      }
    }
  }

  // Uniform positions into store() for a batch of the given size; without
  // replacement when enough samples are stored, with replacement otherwise.
  std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const {
    if (store_.empty()) throw std::runtime_error("MemoryBuffer: cannot sample from empty buffer");
    if (batch_size <= store_.size()) return rng.sample_without_replacement(store_.size(), batch_size);
    std::vector<std::size_t> out(batch_size);
    for (std::size_t b = 0; b < batch_size; ++b)
      out[b] = static_cast<std::size_t>(rng.uniform_below(store_.size()));
    return out;
  }

  // Uniform batch over the union of stored examples, tagged with source tasks.
  std::vector<StoredExample> sample_batch(std::size_t batch_size, Rng& rng) const {
    std::vector<StoredExample> out;
    out.reserve(batch_size);
    for (std::size_t i : sample_indices(batch_size, rng)) out.push_back(store_[i]);
    return out;
  }

  std::vector<StoredExample> sample_batch(std::size_t batch_size, std::uint64_t seed) const {
    Rng rng = make_stream(seed, StreamTag::memory_sample);
    return sample_batch(batch_size, rng);
  }

 private:
  void begin_task(int task_id) {
    if (std::find(task_order_.begin(), task_order_.end(), task_id) != task_order_.end())
      throw std::invalid_argument("MemoryBuffer: task " + std::to_string(task_id) +
                                  " already stored");
    task_order_.push_back(task_id);
  }

  std::size_t quota_per_task() const {
    const std::size_t t = task_order_.size();
    const std::size_t quota = capacity_ / t;
    if (quota == 0)
      throw std::runtime_error("MemoryBuffer: capacity " + std::to_string(capacity_) +
                               " leaves zero quota for " + std::to_string(t) + " tasks");
    return quota;
  }

  void shrink_existing(std::size_t quota, std::uint64_t seed) {
    for (std::size_t ti = 0; ti + 1 < task_order_.size(); ++ti) {
      const int tid = task_order_[ti];
      std::vector<std::size_t> positions;
      for (std::size_t i = 0; i < store_.size(); ++i)
        if (store_[i].task_id == tid) positions.push_back(i);
      if (positions.size() <= quota) continue;
      Rng rng = make_stream(seed, StreamTag::memory_update, 0x5157u, static_cast<std::uint64_t>(tid));
      std::vector<std::size_t> keep = rng.sample_without_replacement(positions.size(), quota);
      std::sort(keep.begin(), keep.end());
      std::vector<bool> remove(store_.size(), false);
      std::size_t kc = 0;
      for (std::size_t p = 0; p < positions.size(); ++p) {
        if (kc < keep.size() && keep[kc] == p)
          ++kc;
        else
          remove[positions[p]] = true;
      }
      std::vector<StoredExample> next;
      next.reserve(store_.size());
      for (std::size_t i = 0; i < store_.size(); ++i)
        if (!remove[i]) next.push_back(std::move(store_[i]));
      store_ = std::move(next);
    }
  }

  std::size_t capacity_;
  std::vector<StoredExample> store_;
  std::vector<int> task_order_;
  std::map<int, std::map<int, std::pair<long, long>>> stored_counts_;
  std::uint64_t stream_seen_ = 0;
};

}  // namespace maucl
