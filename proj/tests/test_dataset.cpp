#include <catch_amalgamated.hpp>

#include "maucl/dataset.hpp"

using namespace maucl;

namespace {

GeneratorConfig small_cfg() {
  GeneratorConfig cfg;
  cfg.feature_dim = 8;
  cfg.num_classes = 2;
  cfg.num_tasks = 1;
  cfg.examples_per_task = 100;
  cfg.positive_rates = {0.5, 0.5};
  cfg.label_correlation = 0.0;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

TEST_CASE("balanced rates give near-balanced classes") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    GeneratorConfig cfg = small_cfg();
    cfg.seed = seed;
    const MultiLabelDataset ds = generate_synthetic(cfg);
    REQUIRE(ds.examples.size() == 100);
    for (int k = 0; k < 2; ++k) {
      const long pos = class_stats_for(ds, k).pos;
      REQUIRE(pos >= 35);
      REQUIRE(pos <= 65);
    }
  }
}

TEST_CASE("rare class positive count lands in the binomial 3-sigma interval") {
  // rate 0.05, n=1000: np = 50, sigma = sqrt(47.5) ~ 6.9, 3 sigma ~ [29, 71].
  for (std::uint64_t seed : {4ull, 5ull, 6ull}) {
    GeneratorConfig cfg;
    cfg.feature_dim = 4;
    cfg.num_classes = 2;
    cfg.num_tasks = 1;
    cfg.examples_per_task = 1000;
    cfg.positive_rates = {0.05, 0.5};
    cfg.label_correlation = 0.0;
    cfg.seed = seed;
    const MultiLabelDataset ds = generate_synthetic(cfg);
    const long pos = class_stats_for(ds, 0).pos;
    REQUIRE(pos >= 25);
    REQUIRE(pos <= 75);
  }
}

TEST_CASE("generation is a pure function of the config") {
  const MultiLabelDataset a = generate_synthetic(small_cfg());
  const MultiLabelDataset b = generate_synthetic(small_cfg());
  REQUIRE(a == b);
}

TEST_CASE("expected positive count below 2 is rejected") {
  GeneratorConfig cfg = small_cfg();
  cfg.positive_rates = {0.005, 0.5};  // 0.005 * 100 = 0.5 expected positives
  REQUIRE_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
}

TEST_CASE("label correlation produces multi-label samples") {
  GeneratorConfig cfg = small_cfg();
  cfg.num_classes = 4;
  cfg.positive_rates = {0.2, 0.2, 0.2, 0.2};
  cfg.label_correlation = 0.5;
  const MultiLabelDataset ds = generate_synthetic(cfg);
  long multi = 0;
  for (const Example& ex : ds.examples) {
    int cnt = 0;
    for (auto v : ex.labels) cnt += v;
    if (cnt >= 2) ++multi;
  }
  REQUIRE(multi > 10);
}

TEST_CASE("class_stats basics") {
  MultiLabelDataset ds;
  ds.feature_dim = 1;
  ds.num_classes = 3;
  ds.class_ids = {0, 1, 2};
  for (int i = 0; i < 10; ++i) {
    Example ex;
    ex.features = {0.0};
    ex.labels = {static_cast<std::uint8_t>(i < 3), static_cast<std::uint8_t>(i < 5), 0};
    ds.examples.push_back(ex);
  }
  const auto stats = class_stats(ds);
  REQUIRE(stats.at(0).pos == 3);
  REQUIRE(stats.at(0).neg == 7);
  REQUIRE(stats.at(0).tau == Catch::Approx(0.3));
  REQUIRE(stats.at(1).tau == Catch::Approx(0.5));  // balanced case maximizes tau
  REQUIRE(stats.at(2).pos == 0);
  REQUIRE(stats.at(2).neg == 10);
  REQUIRE(stats.at(2).tau == 0.0);
  for (int k : ds.class_ids) REQUIRE(stats.at(k).pos + stats.at(k).neg == 10);
}

TEST_CASE("split partitions classes disjointly and evenly") {
  GeneratorConfig cfg = small_cfg();
  cfg.num_classes = 6;
  cfg.num_tasks = 3;
  cfg.examples_per_task = 200;
  cfg.positive_rates = {0.3, 0.3, 0.3, 0.3, 0.3, 0.3};
  cfg.label_correlation = 0.3;
  const MultiLabelDataset ds = generate_synthetic(cfg);
  const TaskSequence seq = split_tasks(ds, 3, 99);
  REQUIRE(seq.tasks.size() == 3);
  std::vector<int> seen;
  for (const Task& t : seq.tasks) {
    REQUIRE(t.class_ids.size() == 2);
    for (int k : t.class_ids) seen.push_back(k);
  }
  std::sort(seen.begin(), seen.end());
  REQUIRE(seen == std::vector<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("masking zeroes labels outside the task's classes and keeps features") {
  GeneratorConfig cfg = small_cfg();
  cfg.num_classes = 6;
  cfg.num_tasks = 3;
  cfg.examples_per_task = 150;
  cfg.positive_rates = {0.3, 0.3, 0.3, 0.3, 0.3, 0.3};
  cfg.label_correlation = 0.3;
  const MultiLabelDataset ds = generate_synthetic(cfg);
  const TaskSequence seq = split_tasks(ds, 3, 5);
  for (const Task& t : seq.tasks) {
    for (const Example& ex : t.data.examples) {
      for (int k = 0; k < 6; ++k) {
        const bool in_task =
            std::find(t.class_ids.begin(), t.class_ids.end(), k) != t.class_ids.end();
        if (!in_task) REQUIRE(ex.labels[static_cast<std::size_t>(k)] == 0);
      }
      // Features must match some source example exactly.
      bool found = false;
      for (const Example& src : ds.examples)
        if (src.features == ex.features) {
          found = true;
          break;
        }
      REQUIRE(found);
    }
  }
}

TEST_CASE("every task holds a multi-label sample and two-sided classes") {
  GeneratorConfig cfg = small_cfg();
  cfg.num_classes = 6;
  cfg.num_tasks = 2;
  cfg.examples_per_task = 300;
  cfg.positive_rates = {0.1, 0.2, 0.3, 0.1, 0.2, 0.3};
  cfg.label_correlation = 0.25;
  const MultiLabelDataset ds = generate_synthetic(cfg);
  const TaskSequence seq = split_tasks(ds, 2, 17);
  for (const Task& t : seq.tasks) {
    bool multi = false;
    for (const Example& ex : t.data.examples) {
      int cnt = 0;
      for (int k : t.class_ids) cnt += ex.labels[static_cast<std::size_t>(k)];
      if (cnt >= 2) multi = true;
    }
    REQUIRE(multi);
    for (int k : t.class_ids) {
      const ClassStats st = class_stats_for(t.data, k);
      REQUIRE(st.pos >= 1);
      REQUIRE(st.neg >= st.pos);  // default padding rule
    }
  }
}

TEST_CASE("forced co-occurrence keeps a single task multi-label") {
  // Classes 0 and 1 always co-occur.
  MultiLabelDataset ds;
  ds.feature_dim = 1;
  ds.num_classes = 2;
  ds.class_ids = {0, 1};
  for (int i = 0; i < 10; ++i) {
    Example ex;
    ex.features = {static_cast<double>(i)};
    const std::uint8_t on = i < 4 ? 1 : 0;
    ex.labels = {on, on};
    ds.examples.push_back(ex);
  }
  const TaskSequence seq = split_tasks(ds, 1, 0);
  REQUIRE(seq.tasks.size() == 1);
  bool multi = false;
  for (const Example& ex : seq.tasks[0].data.examples)
    if (ex.labels[0] + ex.labels[1] == 2) multi = true;
  REQUIRE(multi);
}

TEST_CASE("split requires every class to have a positive") {
  MultiLabelDataset ds;
  ds.feature_dim = 1;
  ds.num_classes = 2;
  ds.class_ids = {0, 1};
  for (int i = 0; i < 6; ++i) {
    Example ex;
    ex.features = {static_cast<double>(i)};
    ex.labels = {static_cast<std::uint8_t>(i < 3), 0};  // class 1 never positive
    ds.examples.push_back(ex);
  }
  REQUIRE_THROWS_WITH(split_tasks(ds, 1, 0), Catch::Matchers::ContainsSubstring("no positive"));
}

TEST_CASE("split fails cleanly when no multi-label sample can exist") {
  // Two classes that never co-occur, one task: assumption cannot hold.
  MultiLabelDataset ds;
  ds.feature_dim = 1;
  ds.num_classes = 2;
  ds.class_ids = {0, 1};
  for (int i = 0; i < 8; ++i) {
    Example ex;
    ex.features = {static_cast<double>(i)};
    ex.labels = {static_cast<std::uint8_t>(i % 2 == 0), static_cast<std::uint8_t>(i % 2 == 1)};
    ds.examples.push_back(ex);
  }
  REQUIRE_THROWS_WITH(split_tasks(ds, 1, 0), Catch::Matchers::ContainsSubstring("no valid partition"));
}
