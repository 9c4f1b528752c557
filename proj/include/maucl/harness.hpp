#pragma once

// Experiment runner: the replay training procedure over a task sequence with
// per-task held-out evaluation, plus ablation grids, parameter sweeps, and
// report rendering. All outputs are byte-deterministic functions of
// (config, seed); seeds may run in a worker pool.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "maucl/config.hpp"
#include "maucl/dataset_io.hpp"

namespace maucl {

inline std::string format6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct SeedRunResult {
  std::uint64_t seed = 0;
  RunRecord record;
  std::optional<ForgettingReport> forgetting_report;
  std::string metrics_csv;
  std::string log_text;

  double overall_final() const {
    return record.overall.empty() ? 0.0 : record.overall.back();
  }
};

namespace detail {

template <typename F>
auto with_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("[") + stage + "] " + e.what());
  }
}

inline std::pair<MultiLabelDataset, MultiLabelDataset> train_test_split(
    const MultiLabelDataset& ds, double train_fraction, std::uint64_t seed, int task_id) {
  const std::size_t n = ds.examples.size();
  if (n < 2) throw std::runtime_error("train/test split needs at least 2 examples");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = make_stream(seed, StreamTag::train_test, static_cast<std::uint64_t>(task_id));
  rng.shuffle(order);
  std::size_t n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
  n_train = std::min(std::max<std::size_t>(1, n_train), n - 1);
  MultiLabelDataset train = ds, test = ds;
  train.examples.clear();
  test.examples.clear();
  for (std::size_t i = 0; i < n; ++i)
    (i < n_train ? train : test).examples.push_back(ds.examples[order[i]]);
  return {std::move(train), std::move(test)};
}

inline ModelBatch make_model_batch(const MultiLabelDataset& ds, const FeatureMap& map) {
  ModelBatch b;
  b.n = ds.examples.size();
  std::vector<const Example*> ptrs(b.n);
  for (std::size_t i = 0; i < b.n; ++i) ptrs[i] = &ds.examples[i];
  b.mapped = map.map_batch(ptrs);
  b.labels.resize(b.n * static_cast<std::size_t>(ds.num_classes));
  for (std::size_t i = 0; i < b.n; ++i)
    std::copy_n(ds.examples[i].labels.data(), static_cast<std::size_t>(ds.num_classes),
                b.labels.data() + i * static_cast<std::size_t>(ds.num_classes));
  return b;
}

// Bound diagnostic over a trained task; emitted to the log when a norm cap is
// active and all margins are positive.
inline void log_bound(std::ostringstream& log, const Scorer& scorer, const ModelBatch& batch,
                      const MultiLabelDataset& train, const std::vector<int>& classes,
                      const MarginSchedule& margins, const LossSpec& spec, const FeatureMap& map,
                      int task_display) {
  if (!scorer.norm_cap) return;
  BoundInputs b;
  b.norm_cap = *scorer.norm_cap;
  b.n = train.examples.size();
  b.delta = 0.05;
  double radius = 0.0;
  if (map.is_identity()) {
    for (std::size_t i = 0; i < batch.n; ++i) {
      double acc = 0.0;
      const double* x = batch.mapped.data() + i * static_cast<std::size_t>(scorer.feature_dim);
      for (int j = 0; j < scorer.feature_dim; ++j) acc += x[j] * x[j];
      radius = std::max(radius, std::sqrt(acc));
    }
  } else {
    radius = std::sqrt(2.0);
  }
  b.radius = radius;
  const auto stats = class_stats(train);
  for (int k : classes) {
    const ClassStats& st = stats.at(k);
    if (st.tau <= 0.0) return;
    b.tau[k] = st.tau;
    const double dp = margins.pos(k), dn = margins.neg(k);
    if (dp <= 0.0 || dn <= 0.0) return;  // rho undefined without a margin
    b.rho_pos[k] = 1.0 / dp;
    b.rho_neg[k] = 1.0 / dn;
  }
  const std::vector<double> scores = forward(scorer, batch.mapped, batch.n);
  double max_loss = 0.0;
  double risk = 0.0;
  BatchView view{scores, batch.labels, batch.n, static_cast<std::size_t>(scorer.num_classes)};
  for (int k : classes)
    for (std::size_t i = 0; i < batch.n; ++i) {
      const double f = view.score(i, k);
      const double z = view.label(i, k) ? f - margins.pos(k) : -f - margins.neg(k);
      max_loss = std::max(max_loss, base_loss(z, spec.base));
    }
  b.loss_bound = max_loss;
  try {
    risk = task_risk(view, classes, weights_from_batch(view, classes), margins, spec).value;
  } catch (const std::exception&) {
    return;
  }
  const BoundReport rep = batch_bound(b, risk);
  log << "bound task " << task_display << " empirical " << format6(risk) << " complexity "
      << format6(rep.complexity_term) << " confidence " << format6(rep.confidence_term)
      << " total " << format6(rep.total) << "\n";
}

}  // namespace detail

// One full continual run for one seed: split tasks, train with replay
// (plain batch learning on the first task), update memory, evaluate Macro-AUC
// on every seen task's held-out split after each task.
inline SeedRunResult run_single_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedRunResult result;
  result.seed = seed;
  std::ostringstream log;

  MultiLabelDataset ds = detail::with_stage("dataset", [&] {
    if (cfg.dataset.path) return load_dataset_file(*cfg.dataset.path);
    GeneratorConfig g = cfg.dataset.generate;
    g.seed = mix_seed(g.seed, 0xD5u, seed);
    return generate_synthetic(g);
  });

  TaskSequence seq = detail::with_stage("split", [&] {
    SplitOptions opt;
    opt.negative_padding = cfg.split.negative_padding;
    return split_tasks(ds, cfg.split.tasks, mix_seed(cfg.split.seed, 0x51u, seed), opt);
  });

  const FeatureMap map = detail::with_stage("model", [&] {
    if (cfg.model.feature_map.kind == "identity") return FeatureMap::identity(ds.feature_dim);
    return FeatureMap::random_fourier(ds.feature_dim, cfg.model.feature_map.dim,
                                      cfg.model.feature_map.bandwidth,
                                      mix_seed(cfg.model.feature_map.seed, 0xF7u, seed));
  });

  Scorer scorer = Scorer::zeros(ds.num_classes, map.output_dim(), cfg.model.norm_cap);
  MemoryBuffer memory(cfg.memory.memory_size);
  std::map<int, MemoryTaskInfo> memory_tasks;
  const LossSpec spec = cfg.loss.spec();

  const std::uint64_t model_seed = mix_seed(cfg.model.seed, 0x40u, seed);
  const std::uint64_t split_seed = mix_seed(cfg.split.seed, 0x51u, seed);
  const std::uint64_t memory_seed = mix_seed(cfg.model.seed, 0x3Eu, seed);

  std::vector<MultiLabelDataset> test_sets;
  std::vector<std::vector<int>> task_classes;

  const int T = static_cast<int>(seq.tasks.size());
  for (int t = 0; t < T; ++t) {
    Task& task = seq.tasks[static_cast<std::size_t>(t)];
    log << "task " << (t + 1) << " classes";
    for (int k : task.class_ids) log << ' ' << k;
    log << " n " << task.data.examples.size() << "\n";

    auto [train, test] = detail::with_stage("split", [&] {
      return detail::train_test_split(task.data, cfg.evaluation.train_fraction, split_seed,
                                      task.task_id);
    });
    test_sets.push_back(std::move(test));
    task_classes.push_back(task.class_ids);

    // Margins come from the training data's positive counts; classes whose
    // positives all fell into the test split are left unmargined (they are
    // degenerate in every training view anyway).
    MarginSchedule margins = detail::with_stage("train", [&] {
      std::map<int, long> counts_pos;
      for (const auto& [k, st] : class_stats(train))
        if (st.pos > 0) counts_pos[k] = st.pos;
      return build_margins(counts_pos, cfg.loss.lambda);
    });

    detail::with_stage("train", [&] {
      TaskContext ctx;
      ctx.data = &train;
      ctx.class_ids = task.class_ids;
      ctx.task_id = task.task_id;
      ctx.margins = margins;
      SgdConfig sgd;
      sgd.eta = cfg.model.eta;
      sgd.batch_size = cfg.model.batch_size;
      sgd.epochs = cfg.model.epochs;
      sgd.weight_decay = cfg.model.weight_decay;
      sgd.momentum = cfg.model.momentum;
      sgd.seed = model_seed;
      const TrainLog tl = train_task(scorer, ctx, t > 0 ? &memory : nullptr, memory_tasks, spec,
                                     cfg.loss.reweighted, cfg.loss.replay_weights, sgd, map);
      for (std::size_t e = 0; e < tl.epochs.size(); ++e)
        log << "task " << (t + 1) << " epoch " << (e + 1) << " risk "
            << format6(tl.epochs[e].mean_batch_risk) << " memory_risk "
            << format6(tl.epochs[e].mean_memory_risk) << " dropped "
            << tl.epochs[e].dropped_class_events << "\n";
      return 0;
    });

    detail::with_stage("memory", [&] {
      const std::uint64_t us = mix_seed(memory_seed, static_cast<std::uint64_t>(t));
      switch (cfg.memory.policy) {
        case MemoryPolicy::wru:
          memory.update_wru(task.task_id, train, cfg.memory.wru_subset, us);
          break;
        case MemoryPolicy::random:
          memory.update_random(task.task_id, train, us);
          break;
        case MemoryPolicy::reservoir:
          memory.update_reservoir(task.task_id, train, us);
          break;
      }
      // Refresh the replay loss context for every stored task. With stored
      // original counts the margins are frozen; otherwise they are rebuilt
      // from whatever the buffer currently holds, so they drift as samples
      // get evicted.
      for (std::size_t j = 0; j < task_classes.size(); ++j) {
        const int tid = seq.tasks[j].task_id;
        MemoryTaskInfo info;
        info.class_ids = task_classes[j];
        info.has_stored = memory.has_stored_counts(tid);
        std::map<int, long> counts_pos;
        if (info.has_stored) {
          info.stored_weights = ClassWeights::from_counts(memory.stored_counts(tid));
          for (const auto& [k, pn] : memory.stored_counts(tid))
            if (pn.first > 0) counts_pos[k] = pn.first;
        } else {
          for (const auto& [k, pn] : memory.view_counts(tid, info.class_ids))
            if (pn.first > 0) counts_pos[k] = pn.first;
        }
        info.margins = build_margins(counts_pos, cfg.loss.lambda);
        memory_tasks[tid] = std::move(info);
      }
      log << "task " << (t + 1) << " memory stored " << memory.task_count(task.task_id)
          << " of " << train.examples.size() << " policy " << to_string(cfg.memory.policy)
          << "\n";
      return 0;
    });

    detail::with_stage("eval", [&] {
      std::vector<double> row;
      for (int j = 0; j <= t; ++j) {
        const ModelBatch mb = detail::make_model_batch(test_sets[static_cast<std::size_t>(j)], map);
        const std::vector<double> scores = forward(scorer, mb.mapped, mb.n);
        BatchView view{scores, mb.labels, mb.n, static_cast<std::size_t>(scorer.num_classes)};
        const AucReport rep =
            macro_auc(view, task_classes[static_cast<std::size_t>(j)], cfg.evaluation.ties);
        row.push_back(rep.macro);
        log << "checkpoint " << (t + 1) << " task " << (j + 1) << " macro_auc "
            << format6(rep.macro);
        if (!rep.skipped.empty()) {
          log << " skipped";
          for (int k : rep.skipped) log << ' ' << k;
        }
        log << "\n";
      }
      result.record.push_checkpoint(std::move(row));
      return 0;
    });

    {
      const ModelBatch mb = detail::make_model_batch(train, map);
      detail::log_bound(log, scorer, mb, train, task.class_ids, margins, spec, map, t + 1);
    }
  }

  if (T >= 2)
    result.forgetting_report = detail::with_stage(
        "eval", [&] { return forgetting(result.record, cfg.evaluation.forgetting); });

  // metrics CSV: one row per (checkpoint, task), then summary rows.
  std::ostringstream csv;
  csv << "checkpoint,task,macro_auc,overall,forgetting_mean\n";
  for (int l = 0; l < T; ++l)
    for (int j = 0; j <= l; ++j)
      csv << (l + 1) << ',' << (j + 1) << ','
          << format6(result.record.auc[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)])
          << ',' << format6(result.record.overall[static_cast<std::size_t>(l)]) << ",\n";
  if (result.forgetting_report) {
    for (std::size_t j = 0; j < result.forgetting_report->per_task.size(); ++j)
      csv << "forgetting," << (j + 1) << ",,," << format6(result.forgetting_report->per_task[j])
          << "\n";
  }
  csv << "summary,,," << format6(result.overall_final()) << ','
      << (result.forgetting_report ? format6(result.forgetting_report->mean) : std::string())
      << "\n";
  result.metrics_csv = csv.str();
  result.log_text = log.str();
  return result;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
}

// Runs every seed (optionally in a worker pool), writes one directory per
// seed (config.json snapshot, metrics.csv, log.txt) plus an aggregate
// summary.csv, and returns the per-seed results ordered as cfg.seeds.
inline std::vector<SeedRunResult> run(const ExperimentConfig& cfg,
                                      const std::optional<std::string>& out_dir) {
  const std::size_t n_seeds = cfg.seeds.size();
  std::vector<SeedRunResult> results(n_seeds);
  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n_seeds));

  if (threads <= 1) {
    for (std::size_t i = 0; i < n_seeds; ++i) results[i] = run_single_seed(cfg, cfg.seeds[i]);
  } else {
    std::vector<std::thread> pool;
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::exception_ptr> errors;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= n_seeds || !errors.empty()) return;
            i = next++;
          }
          try {
            SeedRunResult r = run_single_seed(cfg, cfg.seeds[i]);
            std::lock_guard<std::mutex> lock(mu);
            results[i] = std::move(r);
          } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            errors.push_back(std::current_exception());
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (!errors.empty()) std::rethrow_exception(errors.front());
  }

  if (out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(*out_dir);
    for (std::size_t i = 0; i < n_seeds; ++i) {
      const fs::path dir = fs::path(*out_dir) / ("seed_" + std::to_string(cfg.seeds[i]));
      fs::create_directories(dir);
      ExperimentConfig resolved = cfg;
      resolved.seeds = {cfg.seeds[i]};
      write_text_file(dir / "config.json", to_json(resolved).dump(2) + "\n");
      write_text_file(dir / "metrics.csv", results[i].metrics_csv);
      write_text_file(dir / "log.txt", results[i].log_text);
    }
    std::ostringstream csv;
    csv << "seed,overall_final,forgetting_mean\n";
    double acc = 0.0, acc2 = 0.0;
    for (const SeedRunResult& r : results) {
      csv << r.seed << ',' << format6(r.overall_final()) << ','
          << (r.forgetting_report ? format6(r.forgetting_report->mean) : std::string()) << "\n";
      acc += r.overall_final();
      acc2 += r.overall_final() * r.overall_final();
    }
    const double mean = acc / static_cast<double>(n_seeds);
    const double var =
        n_seeds > 1 ? std::max(0.0, (acc2 - acc * mean) / static_cast<double>(n_seeds - 1)) : 0.0;
    csv << "mean," << format6(mean) << ",\n";
    csv << "sd," << format6(std::sqrt(var)) << ",\n";
    write_text_file(fs::path(*out_dir) / "summary.csv", csv.str());
  }
  return results;
}

inline double mean_overall_final(const std::vector<SeedRunResult>& rs) {
  double acc = 0.0;
  for (const SeedRunResult& r : rs) acc += r.overall_final();
  return rs.empty() ? 0.0 : acc / static_cast<double>(rs.size());
}

inline double sd_overall_final(const std::vector<SeedRunResult>& rs) {
  if (rs.size() < 2) return 0.0;
  const double mean = mean_overall_final(rs);
  double acc = 0.0;
  for (const SeedRunResult& r : rs) {
    const double d = r.overall_final() - mean;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(rs.size() - 1));
}

// One ablation arm: which components are active and how the base config is
// modified to realize the combination.
struct AblationCombo {
  bool reweighted = false;
  bool margins = false;
  bool wru = false;

  std::string name() const {
    std::string s;
    s += reweighted ? "rw" : "--";
    s += margins ? "+m" : "--";
    s += wru ? "+wru" : "----";
    return s;
  }
};

// The valid combinations mirror the component table: margins need a loss that
// accepts them (without both toggles the loss degrades to BCE) and the
// count-retaining update only matters for a reweighted loss.
inline std::vector<AblationCombo> ablation_grid() {
  return {
      {false, false, false},  // ER with BCE
      {true, false, false},   // reweighting only
      {true, false, true},    // reweighting + WRU
      {false, true, false},   // margins only
      {true, true, false},    // reweighting + margins
      {true, true, true},     // full method
  };
}

inline ExperimentConfig apply_combo(ExperimentConfig cfg, const AblationCombo& combo) {
  if (!combo.reweighted && !combo.margins) {
    cfg.loss.loss = LossKind::bce;
  } else if (combo.margins) {
    cfg.loss.loss = LossKind::rldam;
    cfg.loss.reweighted = combo.reweighted;
  } else {
    cfg.loss.loss = LossKind::ru;
    cfg.loss.reweighted = true;
  }
  cfg.memory.policy = combo.wru ? MemoryPolicy::wru : MemoryPolicy::random;
  return cfg;
}

struct AblationRow {
  AblationCombo combo;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t seeds = 0;
};

// One run per (combo, seed); aggregates the final overall Macro-AUC.
inline std::vector<AblationRow> ablate(const ExperimentConfig& cfg,
                                       const std::optional<std::string>& out_dir) {
  if (cfg.seeds.size() < 2) throw std::invalid_argument("ablate: need at least 2 seeds");
  std::vector<AblationRow> rows;
  for (const AblationCombo& combo : ablation_grid()) {
    const ExperimentConfig sub = apply_combo(cfg, combo);
    std::optional<std::string> sub_dir;
    if (out_dir) sub_dir = *out_dir + "/runs/" + combo.name();
    const std::vector<SeedRunResult> rs = run(sub, sub_dir);
    rows.push_back({combo, mean_overall_final(rs), sd_overall_final(rs), rs.size()});
  }
  if (out_dir) {
    std::ostringstream csv;
    csv << "reweighted,margin,wru,mean_overall,sd_overall,seeds\n";
    for (const AblationRow& r : rows)
      csv << (r.combo.reweighted ? 1 : 0) << ',' << (r.combo.margins ? 1 : 0) << ','
          << (r.combo.wru ? 1 : 0) << ',' << format6(r.mean) << ',' << format6(r.sd) << ','
          << r.seeds << "\n";
    std::filesystem::create_directories(*out_dir);
    write_text_file(std::filesystem::path(*out_dir) / "ablation.csv", csv.str());
  }
  return rows;
}

struct SweepRow {
  double value = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t seeds = 0;
};

inline ExperimentConfig apply_sweep_value(ExperimentConfig cfg, const std::string& parameter,
                                          double value) {
  if (parameter == "memory_size") {
    if (value < 1.0) throw std::invalid_argument("sweep: memory_size must be >= 1");
    cfg.memory.memory_size = static_cast<std::size_t>(value);
  } else if (parameter == "lambda") {
    cfg.loss.lambda = value;
  } else {
    throw std::invalid_argument("sweep: parameter must be memory_size or lambda");
  }
  return cfg;
}

inline std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const std::string& parameter,
                                   const std::vector<double>& values,
                                   const std::optional<std::string>& out_dir) {
  if (values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
  std::vector<SweepRow> rows;
  for (double v : values) {
    const ExperimentConfig sub = apply_sweep_value(cfg, parameter, v);
    std::optional<std::string> sub_dir;
    if (out_dir) sub_dir = *out_dir + "/runs/" + parameter + "_" + format6(v);
    const std::vector<SeedRunResult> rs = run(sub, sub_dir);
    rows.push_back({v, mean_overall_final(rs), sd_overall_final(rs), rs.size()});
  }
  if (out_dir) {
    std::ostringstream csv;
    csv << "parameter,value,mean_overall,sd_overall,seeds\n";
    for (const SweepRow& r : rows)
      csv << parameter << ',' << format6(r.value) << ',' << format6(r.mean) << ','
          << format6(r.sd) << ',' << r.seeds << "\n";
    std::filesystem::create_directories(*out_dir);
    write_text_file(std::filesystem::path(*out_dir) / "sweep.csv", csv.str());
  }
  return rows;
}

// Renders a run directory (as written by run) into a text summary: the mean
// lower-triangular AUC matrix, the overall curve, and forgetting.
inline std::string report(const std::string& run_dir) {
  namespace fs = std::filesystem;
  const fs::path root(run_dir);
  if (!fs::exists(root / "summary.csv"))
    throw std::runtime_error("report: missing " + (root / "summary.csv").string());

  std::vector<fs::path> seed_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && entry.path().filename().string().rfind("seed_", 0) == 0)
      seed_dirs.push_back(entry.path());
  std::sort(seed_dirs.begin(), seed_dirs.end());
  if (seed_dirs.empty()) throw std::runtime_error("report: no seed_* directories in " + run_dir);

  // Accumulate the AUC triangle and forgetting across seeds.
  std::map<std::pair<int, int>, std::pair<double, int>> cells;
  std::map<int, std::pair<double, int>> overall;
  double forget_acc = 0.0;
  int forget_n = 0;
  for (const fs::path& dir : seed_dirs) {
    const fs::path metrics = dir / "metrics.csv";
    std::ifstream is(metrics);
    if (!is) throw std::runtime_error("report: missing " + metrics.string());
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
      std::istringstream ls(line);
      std::string c0, c1, c2, c3, c4;
      std::getline(ls, c0, ',');
      std::getline(ls, c1, ',');
      std::getline(ls, c2, ',');
      std::getline(ls, c3, ',');
      std::getline(ls, c4, ',');
      if (c0 == "summary") {
        if (!c4.empty()) {
          forget_acc += std::stod(c4);
          ++forget_n;
        }
        continue;
      }
      if (c0 == "forgetting") continue;
      const int l = std::stoi(c0), j = std::stoi(c1);
      auto& cell = cells[{l, j}];
      cell.first += std::stod(c2);
      cell.second += 1;
      auto& ov = overall[l];
      ov.first += std::stod(c3);
      ov.second += 1;
    }
  }

  int T = 0;
  for (const auto& [lj, _] : cells) T = std::max(T, lj.first);

  std::ostringstream out;
  out << "run " << run_dir << " (" << seed_dirs.size() << " seeds)\n\n";
  out << "mean Macro-AUC matrix (rows: after task, cols: evaluated task)\n";
  out << "        ";
  for (int j = 1; j <= T; ++j) out << "   task" << j;
  out << "\n";
  for (int l = 1; l <= T; ++l) {
    out << "after " << l << " ";
    for (int j = 1; j <= l; ++j) {
      const auto& cell = cells.at({l, j});
      out << ' ' << format6(cell.first / cell.second);
    }
    out << "\n";
  }
  out << "\noverall Macro-AUC by checkpoint\n";
  for (int l = 1; l <= T; ++l) {
    const auto& ov = overall.at(l);
    out << "  after task " << l << ": " << format6(ov.first / (ov.second)) << "\n";
  }
  if (forget_n > 0)
    out << "\nmean forgetting (x100): " << format6(100.0 * forget_acc / forget_n) << "\n";
  return out.str();
}

}  // namespace maucl
