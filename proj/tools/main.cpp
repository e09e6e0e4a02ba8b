#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyperclic/embedding.hpp"
#include "hyperclic/experiment.hpp"
#include "hyperclic/hierarchy.hpp"
#include "hyperclic/kernels.hpp"
#include "hyperclic/synthetic.hpp"

namespace {

using hyperclic::embedding::EmbedConfig;
using hyperclic::harness::ExperimentConfig;
using nlohmann::json;

int cmd_embed_hierarchy(const std::string& tree_path, const std::string& out_path,
                        EmbedConfig cfg) {
  const auto tree = hyperclic::hierarchy::Tree::load(tree_path);
  hyperclic::embedding::Stage1Diagnostics diag;
  const auto protos = hyperclic::embedding::run_stage1(tree, cfg, &diag);
  protos.save(out_path);
  std::printf("embedded %zu nodes into %zu-d ball (curvature %g)\n",
              protos.count(), cfg.dim, cfg.curvature);
  std::printf("  tree-distance rank correlation: %.4f\n", diag.spearman);
  std::printf("  closure pairs at zero cone energy: %.1f%%\n",
              100.0 * diag.cone_zero_rate);
  return 0;
}

int cmd_gen_data(const std::string& tree_path, const std::string& out_path,
                 const hyperclic::harness::SyntheticSpec& spec) {
  const auto tree = hyperclic::hierarchy::Tree::load(tree_path);
  const auto dataset = hyperclic::harness::generate_synthetic(tree, spec);
  dataset.save(out_path);
  std::printf("wrote %zu samples (%zu features) for %zu instances to %s\n",
              dataset.size(), dataset.input_dim, tree.instances().size(),
              out_path.c_str());
  return 0;
}

void print_aggregates(const json& report) {
  const json& agg = report.at("aggregates");
  std::printf("%-28s %10s\n", "metric", "value");
  for (const auto& key :
       {"average_mean_instance", "average_mean_class",
        "average_mean_superclass", "average_mean_lca", "average_forgetting"}) {
    if (agg.at(key).is_null())
      std::printf("%-28s %10s\n", key, "n/a");
    else
      std::printf("%-28s %10.4f\n", key, agg.at(key).get<double>());
  }
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
  ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  const auto result = hyperclic::harness::run_experiment(cfg);
  std::printf("run complete: %d tasks, method %s, kernels %s\n", cfg.tasks,
              std::string(method_name(cfg.method)).c_str(),
              std::string(hyperclic::kernels::backend_name(
                              hyperclic::kernels::active_backend()))
                  .c_str());
  print_aggregates(result.report);
  std::printf("report: %s\n", (cfg.output_dir / "report.json").string().c_str());
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& checkpoint,
                 const std::string& dataset, const std::string& prototypes,
                 const std::string& out_path) {
  const ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
  const json result = hyperclic::harness::evaluate_checkpoint(
      cfg, checkpoint, dataset, prototypes);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  out << result.dump(2) << '\n';
  for (const auto& row : result.at("per_task")) {
    std::printf("task %d: instance %.4f  class %.4f  superclass %.4f  lca %.4f\n",
                row.at("task").get<int>(), row.at("instance").get<double>(),
                row.at("class").get<double>(), row.at("superclass").get<double>(),
                row.at("lca").get<double>());
  }
  return 0;
}

int cmd_report(const std::string& metrics_path, const std::string& csv_path) {
  std::ifstream in(metrics_path);
  if (!in) throw std::runtime_error("cannot open '" + metrics_path + "'");
  json report;
  in >> report;
  hyperclic::harness::write_report_csv(report, csv_path);
  print_aggregates(report);
  std::printf("csv: %s\n", csv_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperbolic continual learning of instances and classes"};
  app.require_subcommand(1);

  // embed-hierarchy
  auto* embed = app.add_subcommand(
      "embed-hierarchy", "embed a hierarchy file into the Poincare ball");
  std::string tree_path, out_path;
  EmbedConfig embed_cfg;
  embed->add_option("--tree", tree_path, "hierarchy file")->required();
  embed->add_option("--out", out_path, "prototype output file")->required();
  embed->add_option("--dim", embed_cfg.dim, "embedding dimension");
  embed->add_option("--curvature", embed_cfg.curvature, "ball curvature");
  embed->add_option("--poincare-epochs", embed_cfg.poincare_epochs, "");
  embed->add_option("--entailment-epochs", embed_cfg.entailment_epochs, "");
  embed->add_option("--separation-epochs", embed_cfg.separation_epochs, "");
  embed->add_option("--seed", embed_cfg.seed, "rng seed");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  std::string gen_tree, gen_out;
  hyperclic::harness::SyntheticSpec spec;
  gen->add_option("--tree", gen_tree, "hierarchy file")->required();
  gen->add_option("--out", gen_out, "dataset output file")->required();
  gen->add_option("--input-dim", spec.input_dim, "feature dimension");
  gen->add_option("--samples", spec.samples_per_instance, "samples per instance");
  gen->add_option("--train-fraction", spec.train_fraction, "");
  gen->add_option("--sigma-superclass", spec.sigma_superclass, "");
  gen->add_option("--sigma-class", spec.sigma_class, "");
  gen->add_option("--sigma-instance", spec.sigma_instance, "");
  gen->add_option("--sigma-noise", spec.sigma_noise, "");
  gen->add_option("--seed", spec.seed, "rng seed");

  // run
  auto* run = app.add_subcommand("run", "run a full experiment from a config");
  std::string run_config, run_out;
  run->add_option("--config", run_config, "experiment config (json)")->required();
  run->add_option("--output-dir", run_out, "override the config output dir");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint");
  std::string eval_config, eval_ckpt, eval_data, eval_protos,
      eval_out = "evaluation.json";
  eval->add_option("--config", eval_config, "experiment config (json)")->required();
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--dataset", eval_data, "dataset override");
  eval->add_option("--prototypes", eval_protos,
                   "prototype file (needed without exemplar memory)");
  eval->add_option("--out", eval_out, "evaluation output file");

  // report
  auto* rep = app.add_subcommand("report", "summarize a metrics report as csv");
  std::string rep_metrics, rep_csv = "report.csv";
  rep->add_option("--metrics", rep_metrics, "report json")->required();
  rep->add_option("--out", rep_csv, "csv output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (embed->parsed()) return cmd_embed_hierarchy(tree_path, out_path, embed_cfg);
    if (gen->parsed()) return cmd_gen_data(gen_tree, gen_out, spec);
    if (run->parsed()) return cmd_run(run_config, run_out);
    if (eval->parsed())
      return cmd_evaluate(eval_config, eval_ckpt, eval_data, eval_protos, eval_out);
    if (rep->parsed()) return cmd_report(rep_metrics, rep_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
