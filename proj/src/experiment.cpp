#include "hyperclic/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "hyperclic/kernels.hpp"
#include "hyperclic/rng.hpp"

namespace hyperclic::harness {
namespace {

using nlohmann::json;

// prediction: nearest exemplar mean when memory exists, otherwise nearest
// prototype by hyperbolic logit over the seen instances
struct Predictor {
  const learner::Mlp* model = nullptr;
  std::optional<learner::ExemplarMeans> means;
  learner::ClassSet seen_classes;
  std::vector<int> seen_instances;
  double tau = 0.1;
  bool normalize = false;

  int predict(std::span<const double> x) const {
    if (means) return learner::nme_predict(x, *means, *model, normalize);
    learner::Mlp::Workspace ws;
    std::vector<double> z(seen_classes.protos->dim());
    learner::embed(*model, x, seen_classes.protos->ball(), ws, z);
    std::vector<double> logits(seen_classes.size());
    learner::hyperbolic_logits(z, seen_classes, tau, logits);
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i)
      if (logits[i] > logits[best]) best = i;
    return seen_instances[best];
  }
};

json grid_to_json(const metrics::Grid& g) {
  json rows = json::array();
  for (int i = 0; i < g.tasks; ++i) {
    json row = json::array();
    for (int j = 0; j < g.tasks; ++j) row.push_back(g.at(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json aggregates_json(const metrics::AccuracyMatrix& m) {
  json agg;
  agg["average_mean_instance"] = metrics::average_mean(m.instance, metrics::AverageMode::all);
  agg["average_mean_class"] = metrics::average_mean(m.cls, metrics::AverageMode::all);
  agg["average_mean_superclass"] = metrics::average_mean(m.supercls, metrics::AverageMode::all);
  agg["average_mean_lca"] = metrics::average_mean(m.lca, metrics::AverageMode::all);
  if (m.tasks >= 2)
    agg["average_forgetting"] = metrics::average_forgetting(m.instance);
  else
    agg["average_forgetting"] = nullptr;  // undefined for a single task
  json seen;
  seen["average_mean_instance"] = metrics::average_mean(m.instance, metrics::AverageMode::seen_only);
  seen["average_mean_class"] = metrics::average_mean(m.cls, metrics::AverageMode::seen_only);
  seen["average_mean_superclass"] = metrics::average_mean(m.supercls, metrics::AverageMode::seen_only);
  seen["average_mean_lca"] = metrics::average_mean(m.lca, metrics::AverageMode::seen_only);
  agg["seen_only"] = std::move(seen);
  return agg;
}

json report_json(const ExperimentConfig& cfg, const metrics::AccuracyMatrix& m,
                 const embedding::Stage1Diagnostics& diag, int completed_tasks) {
  json rep;
  rep["config"] = cfg.to_json();
  rep["tasks"] = m.tasks;
  rep["completed_tasks"] = completed_tasks;
  rep["grids"]["instance"] = grid_to_json(m.instance);
  rep["grids"]["class"] = grid_to_json(m.cls);
  rep["grids"]["superclass"] = grid_to_json(m.supercls);
  rep["grids"]["lca"] = grid_to_json(m.lca);
  rep["aggregates"] = aggregates_json(m);
  rep["final_per_task"]["instance"] = metrics::final_per_task(m.instance);
  rep["final_per_task"]["class"] = metrics::final_per_task(m.cls);
  rep["final_per_task"]["superclass"] = metrics::final_per_task(m.supercls);
  rep["final_per_task"]["lca"] = metrics::final_per_task(m.lca);
  rep["stage1"]["spearman"] = diag.spearman;
  rep["stage1"]["cone_zero_rate"] = diag.cone_zero_rate;
  return rep;
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

}  // namespace

Method parse_method(std::string_view s) {
  if (s == "hyperclic") return Method::hyperclic;
  if (s == "naive") return Method::naive;
  if (s == "replay_no_distill") return Method::replay_no_distill;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::hyperclic:
      return "hyperclic";
    case Method::naive:
      return "naive";
    case Method::replay_no_distill:
      return "replay_no_distill";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("hierarchy")) cfg.hierarchy_path = j.at("hierarchy").get<std::string>();
  if (j.contains("dataset")) cfg.dataset_path = j.at("dataset").get<std::string>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("tasks")) cfg.tasks = j.at("tasks").get<int>();
  if (j.contains("method")) cfg.method = parse_method(j.at("method").get<std::string>());
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("train_fraction")) cfg.train_fraction = j.at("train_fraction").get<double>();

  cfg.embed.seed = rng::mix(cfg.seed, 21);
  cfg.learn.seed = rng::mix(cfg.seed, 22);
  if (j.contains("embed")) {
    const json& e = j.at("embed");
    if (e.contains("dim")) cfg.embed.dim = e.at("dim").get<std::size_t>();
    if (e.contains("poincare_epochs")) cfg.embed.poincare_epochs = e.at("poincare_epochs").get<int>();
    if (e.contains("entailment_epochs")) cfg.embed.entailment_epochs = e.at("entailment_epochs").get<int>();
    if (e.contains("separation_epochs")) cfg.embed.separation_epochs = e.at("separation_epochs").get<int>();
    if (e.contains("poincare_lr")) cfg.embed.poincare_lr = e.at("poincare_lr").get<double>();
    if (e.contains("entailment_lr")) cfg.embed.entailment_lr = e.at("entailment_lr").get<double>();
    if (e.contains("separation_lr")) cfg.embed.separation_lr = e.at("separation_lr").get<double>();
    if (e.contains("margin")) cfg.embed.margin = e.at("margin").get<double>();
    if (e.contains("negatives_per_pair")) cfg.embed.negatives_per_pair = e.at("negatives_per_pair").get<int>();
    if (e.contains("burn_in_epochs")) cfg.embed.burn_in_epochs = e.at("burn_in_epochs").get<int>();
    if (e.contains("curvature")) cfg.embed.curvature = e.at("curvature").get<double>();
    if (e.contains("boundary_eps")) cfg.embed.boundary_eps = e.at("boundary_eps").get<double>();
    if (e.contains("seed")) cfg.embed.seed = e.at("seed").get<std::uint64_t>();
  }
  if (j.contains("learner")) {
    const json& l = j.at("learner");
    if (l.contains("temperature")) cfg.learn.temperature = l.at("temperature").get<double>();
    if (l.contains("lambda")) cfg.learn.lambda = l.at("lambda").get<double>();
    if (l.contains("epochs")) cfg.learn.epochs = l.at("epochs").get<int>();
    if (l.contains("batch_size")) cfg.learn.batch_size = l.at("batch_size").get<std::size_t>();
    if (l.contains("learning_rate")) cfg.learn.learning_rate = l.at("learning_rate").get<double>();
    if (l.contains("memory_budget")) {
      cfg.learn.memory_budget = l.at("memory_budget").get<std::size_t>();
      cfg.memory_budget_set = true;
    }
    if (l.contains("distillation")) cfg.learn.distill = learner::parse_distill_kind(l.at("distillation").get<std::string>());
    if (l.contains("distill_on_new")) cfg.learn.distill_on_new = l.at("distill_on_new").get<bool>();
    if (l.contains("normalize_means")) cfg.learn.normalize_means = l.at("normalize_means").get<bool>();
    if (l.contains("hidden")) cfg.learn.hidden = l.at("hidden").get<std::vector<std::size_t>>();
    if (l.contains("seed")) cfg.learn.seed = l.at("seed").get<std::uint64_t>();
  }
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    SyntheticSpec spec;
    spec.seed = rng::mix(cfg.seed, 23);
    if (s.contains("input_dim")) spec.input_dim = s.at("input_dim").get<std::size_t>();
    if (s.contains("samples_per_instance")) spec.samples_per_instance = s.at("samples_per_instance").get<std::size_t>();
    if (s.contains("train_fraction")) spec.train_fraction = s.at("train_fraction").get<double>();
    if (s.contains("sigma_superclass")) spec.sigma_superclass = s.at("sigma_superclass").get<double>();
    if (s.contains("sigma_class")) spec.sigma_class = s.at("sigma_class").get<double>();
    if (s.contains("sigma_instance")) spec.sigma_instance = s.at("sigma_instance").get<double>();
    if (s.contains("sigma_noise")) spec.sigma_noise = s.at("sigma_noise").get<double>();
    if (s.contains("seed")) spec.seed = s.at("seed").get<std::uint64_t>();
    cfg.synthetic = spec;
    cfg.train_fraction = spec.train_fraction;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("config: cannot open '" + path.string() + "'");
  json j;
  in >> j;
  ExperimentConfig cfg = from_json(j);
  if (const char* env = std::getenv("HYPERCLIC_OUTPUT_DIR")) cfg.output_dir = env;
  return cfg;
}

json ExperimentConfig::to_json() const {
  json j;
  j["hierarchy"] = hierarchy_path.string();
  j["dataset"] = dataset_path.string();
  j["output_dir"] = output_dir.string();
  j["tasks"] = tasks;
  j["method"] = std::string(method_name(method));
  j["seed"] = seed;
  j["train_fraction"] = train_fraction;
  j["embed"] = {{"dim", embed.dim},
                {"poincare_epochs", embed.poincare_epochs},
                {"entailment_epochs", embed.entailment_epochs},
                {"separation_epochs", embed.separation_epochs},
                {"poincare_lr", embed.poincare_lr},
                {"entailment_lr", embed.entailment_lr},
                {"separation_lr", embed.separation_lr},
                {"margin", embed.margin},
                {"negatives_per_pair", embed.negatives_per_pair},
                {"burn_in_epochs", embed.burn_in_epochs},
                {"curvature", embed.curvature},
                {"boundary_eps", embed.boundary_eps},
                {"seed", embed.seed}};
  j["learner"] = {{"temperature", learn.temperature},
                  {"lambda", learn.lambda},
                  {"epochs", learn.epochs},
                  {"batch_size", learn.batch_size},
                  {"learning_rate", learn.learning_rate},
                  {"memory_budget", learn.memory_budget},
                  {"distillation", std::string(distill_kind_name(learn.distill))},
                  {"distill_on_new", learn.distill_on_new},
                  {"normalize_means", learn.normalize_means},
                  {"hidden", learn.hidden},
                  {"seed", learn.seed}};
  if (synthetic) {
    j["synthetic"] = {{"input_dim", synthetic->input_dim},
                      {"samples_per_instance", synthetic->samples_per_instance},
                      {"train_fraction", synthetic->train_fraction},
                      {"sigma_superclass", synthetic->sigma_superclass},
                      {"sigma_class", synthetic->sigma_class},
                      {"sigma_instance", synthetic->sigma_instance},
                      {"sigma_noise", synthetic->sigma_noise},
                      {"seed", synthetic->seed}};
  }
  return j;
}

void ExperimentConfig::validate() const {
  if (hierarchy_path.empty())
    throw std::invalid_argument("config: hierarchy path is required");
  if (tasks < 1) throw std::invalid_argument("config: tasks must be >= 1");
  if (dataset_path.empty() && !synthetic)
    throw std::invalid_argument("config: needs a dataset path or a synthetic block");
  embed.validate();
  learn.validate();
  if (synthetic) synthetic->validate();
}

ExperimentResult run_experiment(const ExperimentConfig& user_cfg) {
  ExperimentConfig cfg = user_cfg;
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);

  const hierarchy::Tree tree = hierarchy::Tree::load(cfg.hierarchy_path);
  if (!cfg.memory_budget_set)
    cfg.learn.memory_budget = 5 * tree.instances().size();

  data::Dataset dataset;
  if (!cfg.dataset_path.empty() && std::filesystem::exists(cfg.dataset_path)) {
    dataset = data::Dataset::load(cfg.dataset_path);
  } else if (cfg.synthetic) {
    dataset = generate_synthetic(tree, *cfg.synthetic);
    const auto path = cfg.output_dir / "dataset.tsv";
    dataset.save(path);
    cfg.dataset_path = path;
  } else {
    throw std::runtime_error("config: dataset '" + cfg.dataset_path.string() +
                             "' not found");
  }
  const std::vector<int> labels = dataset.resolve_labels(tree);

  const TaskStream stream = split_tasks(dataset, tree, cfg.tasks,
                                        cfg.train_fraction, rng::mix(cfg.seed, 31));
  // instance sets must be pairwise disjoint before any training happens
  {
    std::vector<char> owned(tree.size(), 0);
    for (const auto& insts : stream.task_instances) {
      for (int v : insts) {
        if (owned[v])
          throw std::logic_error("task stream: instance sets are not disjoint");
        owned[v] = 1;
      }
    }
  }

  embedding::Stage1Diagnostics diag;
  const embedding::PrototypeSet protos = embedding::run_stage1(tree, cfg.embed, &diag);
  protos.save(cfg.output_dir / "prototypes.tsv");
  const embedding::PrototypeSet leaf_protos =
      embedding::extract_leaf_prototypes(protos, tree);

  learner::LearnerConfig eff = cfg.learn;
  if (cfg.method != Method::hyperclic) eff.lambda = 0.0;

  learner::ModelState state{
      learner::Mlp(dataset.input_dim, eff.hidden, cfg.embed.dim,
                   rng::mix(eff.seed, 41)),
      std::nullopt,
      {},
      0};
  learner::ExemplarMemory memory(eff.memory_budget);

  metrics::AccuracyMatrix matrix(cfg.tasks);
  ExperimentResult result{std::move(matrix), diag, {}};

  for (int t = 0; t < cfg.tasks; ++t) {
    learner::TaskData task;
    task.dataset = &dataset;
    task.rows = stream.train_rows[t];
    for (std::size_t r : task.rows) task.row_labels.push_back(labels[r]);
    task.instances = stream.task_instances[t];

    learner::train_task(state, task, memory, leaf_protos, tree, eff);
    if (cfg.method != Method::naive)
      memory = learner::update_memory(memory, task, state);

    Predictor pred;
    pred.model = &state.current;
    pred.tau = eff.temperature;
    pred.normalize = eff.normalize_means;
    if (!memory.empty()) {
      pred.means = learner::exemplar_means(memory, state.current, dataset,
                                           eff.normalize_means);
    } else {
      std::unordered_map<int, int> leaf_pos;
      for (std::size_t i = 0; i < tree.instances().size(); ++i)
        leaf_pos.emplace(tree.instances()[i], static_cast<int>(i));
      pred.seen_classes.protos = &leaf_protos;
      for (int inst : state.seen_instances)
        pred.seen_classes.positions.push_back(leaf_pos.at(inst));
      pred.seen_instances = state.seen_instances;
    }

    for (int i = 0; i < cfg.tasks; ++i) {
      std::vector<metrics::PredictionRecord> records;
      records.reserve(stream.test_rows[i].size());
      for (std::size_t row : stream.test_rows[i]) {
        records.push_back(
            {labels[row], pred.predict(dataset.row(row)), i, t});
      }
      result.matrix.instance.at(i, t) = metrics::instance_accuracy(records);
      result.matrix.cls.at(i, t) = metrics::class_accuracy(records, tree);
      result.matrix.supercls.at(i, t) = metrics::superclass_accuracy(records, tree);
      result.matrix.lca.at(i, t) = metrics::lca_severity(records, tree).value;
    }

    learner::save_checkpoint(
        cfg.output_dir / ("checkpoint_task_" + std::to_string(t + 1) + ".txt"),
        state, memory, tree);
    // flush a partial report so an interrupted run keeps per-task artifacts
    write_json_file(report_json(cfg, result.matrix, diag, t + 1),
                    cfg.output_dir / "report.json");
  }

  result.report = report_json(cfg, result.matrix, diag, cfg.tasks);
  write_json_file(result.report, cfg.output_dir / "report.json");
  write_report_csv(result.report, cfg.output_dir / "report.csv");
  return result;
}

json evaluate_checkpoint(const ExperimentConfig& cfg,
                         const std::filesystem::path& checkpoint_path,
                         const std::filesystem::path& dataset_path,
                         const std::filesystem::path& prototypes_path) {
  const hierarchy::Tree tree = hierarchy::Tree::load(cfg.hierarchy_path);
  const data::Dataset dataset = data::Dataset::load(
      dataset_path.empty() ? cfg.dataset_path : dataset_path);
  const std::vector<int> labels = dataset.resolve_labels(tree);
  const TaskStream stream = split_tasks(dataset, tree, cfg.tasks,
                                        cfg.train_fraction, rng::mix(cfg.seed, 31));

  auto [state, memory] = learner::load_checkpoint(checkpoint_path, tree);

  std::optional<embedding::PrototypeSet> leaf_protos;
  Predictor pred;
  pred.model = &state.current;
  pred.tau = cfg.learn.temperature;
  pred.normalize = cfg.learn.normalize_means;
  if (!memory.empty()) {
    pred.means = learner::exemplar_means(memory, state.current, dataset,
                                         cfg.learn.normalize_means);
  } else {
    if (!prototypes_path.empty()) {
      leaf_protos = embedding::extract_leaf_prototypes(
          embedding::PrototypeSet::load(prototypes_path), tree);
    } else {
      leaf_protos = embedding::extract_leaf_prototypes(
          embedding::run_stage1(tree, cfg.embed), tree);
    }
    std::unordered_map<int, int> leaf_pos;
    for (std::size_t i = 0; i < tree.instances().size(); ++i)
      leaf_pos.emplace(tree.instances()[i], static_cast<int>(i));
    pred.seen_classes.protos = &*leaf_protos;
    for (int inst : state.seen_instances)
      pred.seen_classes.positions.push_back(leaf_pos.at(inst));
    pred.seen_instances = state.seen_instances;
  }

  json out;
  out["config"] = cfg.to_json();
  out["checkpoint"] = checkpoint_path.string();
  out["completed_tasks"] = state.task_index;
  json per_task = json::array();
  for (int i = 0; i < cfg.tasks; ++i) {
    std::vector<metrics::PredictionRecord> records;
    for (std::size_t row : stream.test_rows[i]) {
      records.push_back({labels[row], pred.predict(dataset.row(row)), i,
                         state.task_index - 1});
    }
    json m;
    m["task"] = i + 1;
    m["instance"] = metrics::instance_accuracy(records);
    m["class"] = metrics::class_accuracy(records, tree);
    m["superclass"] = metrics::superclass_accuracy(records, tree);
    const auto lca = metrics::lca_severity(records, tree);
    m["lca"] = lca.value;
    m["all_correct"] = lca.all_correct;
    per_task.push_back(std::move(m));
  }
  out["per_task"] = std::move(per_task);
  return out;
}

void write_report_csv(const json& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "metric,test_task,trained_task,value\n";
  char buf[32];
  for (const auto& name : {"instance", "class", "superclass", "lca"}) {
    const json& grid = report.at("grids").at(name);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = 0; j < grid[i].size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", grid[i][j].get<double>());
        out << name << ',' << i + 1 << ',' << j + 1 << ',' << buf << '\n';
      }
    }
  }
}

}  // namespace hyperclic::harness
