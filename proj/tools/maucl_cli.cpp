// Command-line entry point: generate synthetic datasets and run, ablate,
// sweep, or report continual-learning experiments from a JSON config.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "maucl/harness.hpp"

namespace {

maucl::ExperimentConfig load_config(const std::string& path) {
  return maucl::load_config_file(path);
}

int cmd_generate(const std::string& config_path, const std::string& out_path) {
  std::ifstream is(config_path);
  if (!is) throw std::runtime_error("[config] cannot open " + config_path);
  nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("[config] malformed JSON in " + config_path);
  // Accept either a full experiment config or a bare generator object.
  maucl::GeneratorConfig gen = j.contains("dataset")
                                   ? maucl::config_from_json(j).dataset.generate
                                   : maucl::generator_from_json(j);
  const maucl::MultiLabelDataset ds = maucl::generate_synthetic(gen);
  maucl::save_file(ds, out_path);
  std::cout << "wrote " << ds.examples.size() << " examples (d=" << ds.feature_dim
            << ", K=" << ds.num_classes << ") to " << out_path << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const maucl::ExperimentConfig cfg = load_config(config_path);
  const auto results = maucl::run(cfg, out_dir);
  std::cout << "ran " << results.size() << " seed(s); mean final overall Macro-AUC "
            << maucl::format6(maucl::mean_overall_final(results)) << "\n";
  std::cout << "outputs in " << out_dir << "\n";
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& out_dir) {
  const maucl::ExperimentConfig cfg = load_config(config_path);
  const auto rows = maucl::ablate(cfg, out_dir);
  std::cout << "reweighted margin wru  mean      sd\n";
  for (const auto& r : rows)
    std::printf("%9d %6d %3d  %s  %s\n", r.combo.reweighted ? 1 : 0, r.combo.margins ? 1 : 0,
                r.combo.wru ? 1 : 0, maucl::format6(r.mean).c_str(),
                maucl::format6(r.sd).c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  const maucl::ExperimentConfig cfg = load_config(config_path);
  if (cfg.sweep_parameter.empty() || cfg.sweep_values.empty())
    throw std::runtime_error(
        "[config] sweep needs {\"sweep\":{\"parameter\":...,\"values\":[...]}} in the config");
  const auto rows = maucl::sweep(cfg, cfg.sweep_parameter, cfg.sweep_values, out_dir);
  std::cout << cfg.sweep_parameter << "  mean      sd\n";
  for (const auto& r : rows)
    std::cout << maucl::format6(r.value) << "  " << maucl::format6(r.mean) << "  "
              << maucl::format6(r.sd) << "\n";
  return 0;
}

int cmd_report(const std::string& dir) {
  std::cout << maucl::report(dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Macro-AUC oriented continual multi-label learning benchmark"};
  app.require_subcommand(1);

  std::string config_path, out_path;

  CLI::App* generate = app.add_subcommand("generate", "generate a synthetic dataset (JSONL)");
  generate->add_option("--config", config_path, "config JSON")->required();
  generate->add_option("--out", out_path, "output dataset path")->required();

  CLI::App* run = app.add_subcommand("run", "run the continual-learning experiment");
  run->add_option("--config", config_path, "config JSON")->required();
  run->add_option("--out", out_path, "output directory")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "run the component ablation grid");
  ablate->add_option("--config", config_path, "config JSON")->required();
  ablate->add_option("--out", out_path, "output directory")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "sweep memory_size or lambda");
  sweep->add_option("--config", config_path, "config JSON")->required();
  sweep->add_option("--out", out_path, "output directory")->required();

  CLI::App* report = app.add_subcommand("report", "summarize a run directory");
  report->add_option("--out", out_path, "run directory to summarize")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(config_path, out_path);
    if (run->parsed()) return cmd_run(config_path, out_path);
    if (ablate->parsed()) return cmd_ablate(config_path, out_path);
    if (sweep->parsed()) return cmd_sweep(config_path, out_path);
    if (report->parsed()) return cmd_report(out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
