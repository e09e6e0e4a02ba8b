#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hyperclic/dataset.hpp"
#include "hyperclic/embedding.hpp"
#include "hyperclic/geometry.hpp"
#include "hyperclic/hierarchy.hpp"

// Stage 2: a small trainable feature extractor whose output is mapped into
// the ball, classified against the frozen instance prototypes, distilled
// against a frozen snapshot of itself, with herding-selected exemplar replay
// and nearest-mean-of-exemplars inference.

namespace hyperclic::learner {

enum class DistillKind { cross_entropy, kl_divergence, mse };
DistillKind parse_distill_kind(std::string_view s);
std::string_view distill_kind_name(DistillKind k);

struct LearnerConfig {
  double temperature = 0.1;
  double lambda = 0.5;       // weight of the distillation term
  int epochs = 3;
  std::size_t batch_size = 16;
  double learning_rate = 0.01;
  std::size_t memory_budget = 60;  // K, total exemplars across instances
  DistillKind distill = DistillKind::cross_entropy;
  bool distill_on_new = false;   // also distill current-task samples
  bool normalize_means = false;  // l2-normalize features for exemplar means
  std::vector<std::size_t> hidden = {32, 32};
  std::uint64_t seed = 1;

  void validate() const;
};

// Fully connected net: rectifier on hidden layers, identity output.
// Parameters live in one flat vector (per layer: row-major weights, then
// biases) so gradients can be finite-difference checked index by index.
class Mlp {
 public:
  Mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
      std::size_t output_dim, std::uint64_t seed);

  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  struct Workspace {
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // post-activation per layer
    std::vector<double> input;
  };

  std::span<const double> forward(std::span<const double> x, Workspace& ws) const;
  // accumulate d(loss)/d(params) into param_grads for the sample recorded
  // in ws, given d(loss)/d(output)
  void backward(const Workspace& ws, std::span<const double> grad_out,
                std::span<double> param_grads) const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<double> params_;
  std::vector<std::size_t> weight_off_, bias_off_;
};

// z = exp_map_zero(phi(x)); ws holds the forward state for backprop
void embed(const Mlp& model, std::span<const double> x,
           const geometry::BallConfig& ball, Mlp::Workspace& ws,
           std::span<double> z_out);

// the active label space: positions into a leaf PrototypeSet, in label order
struct ClassSet {
  const embedding::PrototypeSet* protos = nullptr;
  std::vector<int> positions;
  std::size_t size() const { return positions.size(); }
  std::span<const double> prototype(std::size_t i) const {
    return protos->point(positions[i]);
  }
};

// logit_i = -d_B(z, P_i) / tau
void hyperbolic_logits(std::span<const double> z, const ClassSet& classes,
                       double tau, std::span<double> out);

// mean cross-entropy of softmaxed hyperbolic logits vs targets; parameter
// gradients are accumulated into param_grads (caller-zeroed)
double classification_loss(const Mlp& model, const data::Dataset& dataset,
                           std::span<const std::size_t> rows,
                           std::span<const int> targets,
                           const ClassSet& classes, double tau,
                           std::span<double> param_grads);

// teacher/student agreement on old-class logits over an exemplar batch;
// cross_entropy: -mean sum_j q_j log p_j, kl: mean KL(q||p), mse: mean
// squared logit difference
double distillation_loss(const Mlp& student, const Mlp& teacher,
                         const data::Dataset& dataset,
                         std::span<const std::size_t> rows,
                         const ClassSet& old_classes, double tau,
                         DistillKind kind, std::span<double> param_grads);

// greedy mean-matching selection order over one instance's feature rows
// (row-major n x dim); returns the first min(m, n) indices
std::vector<std::size_t> herding_select(std::span<const double> features,
                                        std::size_t n, std::size_t dim,
                                        std::size_t m);

class ExemplarMemory {
 public:
  ExemplarMemory() = default;
  explicit ExemplarMemory(std::size_t budget) : budget_(budget) {}

  struct Entry {
    int instance;                    // tree node index
    std::vector<std::size_t> rows;   // dataset rows, herding order
  };

  std::size_t budget() const { return budget_; }
  std::size_t total() const;
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }

 private:
  std::size_t budget_ = 0;
  std::vector<Entry> entries_;
};

struct ModelState {
  Mlp current;
  std::optional<Mlp> snapshot;      // present from the second task on
  std::vector<int> seen_instances;  // tree node indices, task order
  int task_index = 0;               // tasks completed
};

struct TaskData {
  const data::Dataset* dataset = nullptr;
  std::vector<std::size_t> rows;  // training rows of this task
  std::vector<int> row_labels;    // tree instance index per row
  std::vector<int> instances;     // the task's new instances, label order
};

// one incremental step: snapshot, extend the seen set, minimize
// lambda * distillation + (1 - lambda) * classification over task data plus
// replayed exemplars (plain classification on the first task)
void train_task(ModelState& state, const TaskData& task,
                const ExemplarMemory& memory,
                const embedding::PrototypeSet& leaf_protos,
                const hierarchy::Tree& tree, const LearnerConfig& cfg);

// end-of-task memory refresh: quota floor(K / #seen) per instance, old lists
// truncated (herding prefixes stay valid), new instances selected by herding
// on current-model features
ExemplarMemory update_memory(const ExemplarMemory& memory,
                             const TaskData& task, const ModelState& state);

struct ExemplarMeans {
  std::vector<int> instances;  // tree node indices
  std::vector<double> means;   // row-major, one mean per instance
  std::size_t dim = 0;
};

ExemplarMeans exemplar_means(const ExemplarMemory& memory, const Mlp& model,
                             const data::Dataset& dataset, bool normalize);

// nearest exemplar mean in (pre-exp-map) feature space; ties go to the
// lowest instance index
int nme_predict(std::span<const double> x, const ExemplarMeans& means,
                const Mlp& model, bool normalize);
int nme_predict(std::span<const double> x, const ExemplarMemory& memory,
                const Mlp& model, const data::Dataset& dataset,
                bool normalize);

// checkpoint: versioned text dump of the extractor, the seen set and the
// exemplar memory (instance ids + dataset row indices)
void save_checkpoint(const std::filesystem::path& path, const ModelState& state,
                     const ExemplarMemory& memory, const hierarchy::Tree& tree);
std::pair<ModelState, ExemplarMemory> load_checkpoint(
    const std::filesystem::path& path, const hierarchy::Tree& tree);

}  // namespace hyperclic::learner
