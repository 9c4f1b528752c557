#pragma once

// JSON-lines persistence for datasets and task sequences. First line is a
// header object; every following line is one example {"x":[...],"y":[...]}.
// Doubles round-trip exactly (shortest-representation serialization).

#include <fstream>
#include <string>

#include <json.hpp>

#include "maucl/dataset.hpp"

namespace maucl {

namespace detail {

inline nlohmann::json example_to_json(const Example& ex) {
  nlohmann::json j;
  j["x"] = ex.features;
  nlohmann::json y = nlohmann::json::array();
  for (std::uint8_t v : ex.labels) y.push_back(static_cast<int>(v));
  j["y"] = std::move(y);
  return j;
}

inline Example example_from_json(const nlohmann::json& j, int d, int K, std::size_t line_no) {
  const std::string where = "line " + std::to_string(line_no);
  if (!j.contains("x") || !j.contains("y"))
    throw std::runtime_error(where + ": example record must contain \"x\" and \"y\"");
  Example ex;
  ex.features = j.at("x").get<std::vector<double>>();
  if (static_cast<int>(ex.features.size()) != d)
    throw std::runtime_error(where + ": feature vector length " +
                             std::to_string(ex.features.size()) + " != d=" + std::to_string(d));
  for (const auto& v : j.at("y")) {
    const int y = v.get<int>();
    if (y != 0 && y != 1) throw std::runtime_error(where + ": label entries must be 0 or 1");
    ex.labels.push_back(static_cast<std::uint8_t>(y));
  }
  if (static_cast<int>(ex.labels.size()) != K)
    throw std::runtime_error(where + ": label vector length " + std::to_string(ex.labels.size()) +
                             " != K=" + std::to_string(K));
  return ex;
}

inline nlohmann::json parse_line(const std::string& line, std::size_t line_no) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded())
    throw std::runtime_error("line " + std::to_string(line_no) + ": malformed JSON");
  return j;
}

}  // namespace detail

inline void save(const MultiLabelDataset& ds, std::ostream& os) {
  nlohmann::json header;
  header["type"] = "dataset";
  header["d"] = ds.feature_dim;
  header["K"] = ds.num_classes;
  header["class_ids"] = ds.class_ids;
  os << header.dump() << '\n';
  for (const Example& ex : ds.examples) os << detail::example_to_json(ex).dump() << '\n';
}

inline void save(const TaskSequence& seq, std::ostream& os) {
  nlohmann::json header;
  header["type"] = "task_sequence";
  header["d"] = seq.feature_dim;
  header["K"] = seq.num_classes;
  nlohmann::json tasks = nlohmann::json::array();
  for (const Task& t : seq.tasks) {
    nlohmann::json jt;
    jt["task_id"] = t.task_id;
    jt["class_ids"] = t.class_ids;
    jt["n"] = t.data.examples.size();
    tasks.push_back(std::move(jt));
  }
  header["tasks"] = std::move(tasks);
  os << header.dump() << '\n';
  for (const Task& t : seq.tasks)
    for (const Example& ex : t.data.examples) os << detail::example_to_json(ex).dump() << '\n';
}

template <typename T>
void save_file(const T& value, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save: cannot open " + path);
  save(value, os);
}

inline MultiLabelDataset load_dataset(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw std::runtime_error("load: empty input, missing header");
  ++line_no;
  const nlohmann::json header = detail::parse_line(line, line_no);
  if (header.value("type", "") != "dataset")
    throw std::runtime_error("line 1: expected header with type \"dataset\"");

  MultiLabelDataset ds;
  ds.feature_dim = header.at("d").get<int>();
  ds.num_classes = header.at("K").get<int>();
  ds.class_ids = header.at("class_ids").get<std::vector<int>>();
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    ds.examples.push_back(detail::example_from_json(detail::parse_line(line, line_no),
                                                    ds.feature_dim, ds.num_classes, line_no));
  }
  return ds;
}

inline TaskSequence load_task_sequence(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw std::runtime_error("load: empty input, missing header");
  ++line_no;
  const nlohmann::json header = detail::parse_line(line, line_no);
  if (header.value("type", "") != "task_sequence")
    throw std::runtime_error("line 1: expected header with type \"task_sequence\"");

  TaskSequence seq;
  seq.feature_dim = header.at("d").get<int>();
  seq.num_classes = header.at("K").get<int>();
  std::vector<std::size_t> expected;  // declared example count per task
  for (const auto& jt : header.at("tasks")) {
    Task t;
    t.task_id = jt.at("task_id").get<int>();
    t.class_ids = jt.at("class_ids").get<std::vector<int>>();
    t.data.feature_dim = seq.feature_dim;
    t.data.num_classes = seq.num_classes;
    t.data.class_ids = t.class_ids;
    expected.push_back(jt.at("n").get<std::size_t>());
    seq.tasks.push_back(std::move(t));
  }
  std::size_t task_idx = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    while (task_idx < seq.tasks.size() &&
           seq.tasks[task_idx].data.examples.size() == expected[task_idx])
      ++task_idx;
    if (task_idx >= seq.tasks.size())
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": more example records than the header declares");
    seq.tasks[task_idx].data.examples.push_back(detail::example_from_json(
        detail::parse_line(line, line_no), seq.feature_dim, seq.num_classes, line_no));
  }
  for (std::size_t t = 0; t < seq.tasks.size(); ++t)
    if (seq.tasks[t].data.examples.size() != expected[t])
      throw std::runtime_error("load: task " + std::to_string(seq.tasks[t].task_id) +
                               " has fewer example records than the header declares");
  return seq;
}

inline MultiLabelDataset load_dataset_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load: cannot open " + path);
  return load_dataset(is);
}

inline TaskSequence load_task_sequence_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load: cannot open " + path);
  return load_task_sequence(is);
}

}  // namespace maucl
