#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include <json.hpp>

#include "hyperclic/embedding.hpp"
#include "hyperclic/learner.hpp"
#include "hyperclic/metrics.hpp"
#include "hyperclic/synthetic.hpp"

// End-to-end orchestration: stage 1 on the hierarchy, the continual loop of
// stage 2 over a task stream, evaluation of every task test set after every
// task, and report/checkpoint files. Runs are deterministic under the
// config seed; re-running an identical config reproduces the report
// byte-for-byte.

namespace hyperclic::harness {

enum class Method { hyperclic, naive, replay_no_distill };
Method parse_method(std::string_view s);
std::string_view method_name(Method m);

struct ExperimentConfig {
  std::filesystem::path hierarchy_path;
  std::filesystem::path dataset_path;  // optional when `synthetic` is given
  std::filesystem::path output_dir = "out";
  int tasks = 3;
  Method method = Method::hyperclic;
  std::uint64_t seed = 1;
  double train_fraction = 0.8;
  embedding::EmbedConfig embed;
  learner::LearnerConfig learn;
  bool memory_budget_set = false;  // false: default to 5 x #instances
  std::optional<SyntheticSpec> synthetic;

  // Parses a config document; absent fields keep their defaults and the
  // embed/learn/synthetic seeds derive from the top-level seed unless set
  // explicitly.
  static ExperimentConfig from_json(const nlohmann::json& j);
  // Additionally honors the HYPERCLIC_OUTPUT_DIR environment override.
  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;
};

struct ExperimentResult {
  metrics::AccuracyMatrix matrix;
  embedding::Stage1Diagnostics stage1;
  nlohmann::json report;
};

// Runs the full pipeline and writes into output_dir: dataset.tsv (when
// generated), prototypes.tsv, checkpoint_task_<t>.txt and report.json after
// every task, report.csv at the end.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Re-evaluates a saved checkpoint on the dataset's task stream (final
// column only). Prototypes are reloaded from `prototypes_path` or recomputed
// from the config when the checkpoint carries no exemplar memory.
nlohmann::json evaluate_checkpoint(const ExperimentConfig& cfg,
                                   const std::filesystem::path& checkpoint_path,
                                   const std::filesystem::path& dataset_path,
                                   const std::filesystem::path& prototypes_path);

// flat CSV: metric,test_task,trained_task,value
void write_report_csv(const nlohmann::json& report,
                      const std::filesystem::path& path);

}  // namespace hyperclic::harness
