#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hyperclic/cones.hpp"
#include "hyperclic/geometry.hpp"
#include "hyperclic/hierarchy.hpp"

// Stage 1: one prototype per tree node, optimized in three sequential
// phases (distance-softmax placement, entailment cones, angular separation)
// by Riemannian SGD. The result is frozen and consumed by the learner.

namespace hyperclic::embedding {

struct EmbedConfig {
  std::size_t dim = 64;
  int poincare_epochs = 150;
  int entailment_epochs = 50;
  int separation_epochs = 500;
  double poincare_lr = 0.3;
  double entailment_lr = 0.01;
  double separation_lr = 1.0;
  double margin = 0.01;       // hinge margin for negative cone pairs
  int negatives_per_pair = 10;
  int burn_in_epochs = 10;    // phase 1 runs at lr/10 for these epochs
  double curvature = 1.0;
  double boundary_eps = 1e-5;
  std::uint64_t seed = 1;

  geometry::BallConfig ball() const { return {curvature, boundary_eps, dim}; }
  void validate() const;
};

class PrototypeSet {
 public:
  PrototypeSet(std::vector<std::string> node_order, geometry::BallConfig ball);

  std::size_t count() const { return node_order_.size(); }
  std::size_t dim() const { return ball_.dim; }
  const geometry::BallConfig& ball() const { return ball_; }
  const std::vector<std::string>& node_order() const { return node_order_; }

  std::span<double> point(std::size_t i) {
    return {data_.data() + i * ball_.dim, ball_.dim};
  }
  std::span<const double> point(std::size_t i) const {
    return {data_.data() + i * ball_.dim, ball_.dim};
  }

  // header `dim<TAB>curvature<TAB>count`, then `node_id<TAB>coords...` with
  // round-trip decimal precision
  void save(const std::filesystem::path& path) const;
  static PrototypeSet load(const std::filesystem::path& path);

 private:
  std::vector<std::string> node_order_;
  geometry::BallConfig ball_;
  std::vector<double> data_;
};

// deterministic init: points uniform in a ball of radius 1e-3
PrototypeSet init_prototypes(const hierarchy::Tree& tree,
                             const EmbedConfig& cfg);

// sum over pairs of d(u,v) + log sum_{v' in negatives} exp(-d(u,v'));
// Euclidean gradients are accumulated into grads (count*dim, caller-zeroed)
double poincare_loss(const PrototypeSet& protos,
                     std::span<const hierarchy::ClosurePair> pairs,
                     const std::vector<std::vector<int>>& negatives,
                     std::span<double> grads);

// sum of cone energies over positives plus hinge max(0, margin - E) over
// negatives
double entailment_loss(const PrototypeSet& protos,
                       std::span<const hierarchy::ClosurePair> positives,
                       std::span<const hierarchy::ClosurePair> negatives,
                       double margin, std::span<double> grads);

// sum of off-diagonal cosine similarities between the selected prototypes;
// throws std::domain_error on a zero-norm prototype
double separation_loss(const PrototypeSet& protos, std::span<const int> subset,
                       std::span<double> grads);
double separation_loss(const PrototypeSet& protos, std::span<double> grads);

struct Stage1Diagnostics {
  double spearman = 0.0;                // hyperbolic vs tree distance, all pairs
  double cone_zero_rate = 0.0;          // closure pairs at zero energy, post phase 2
  double final_poincare_loss = 0.0;
  double final_separation_loss = 0.0;
};

PrototypeSet run_stage1(const hierarchy::Tree& tree, const EmbedConfig& cfg,
                        Stage1Diagnostics* diag = nullptr);

// subset restricted to instance nodes, in instance index order
PrototypeSet extract_leaf_prototypes(const PrototypeSet& protos,
                                     const hierarchy::Tree& tree);

// diagnostics, also used by the acceptance suite
double spearman_tree_correlation(const PrototypeSet& protos,
                                 const hierarchy::Tree& tree);
double closure_cone_zero_rate(const PrototypeSet& protos,
                              const hierarchy::Tree& tree);

}  // namespace hyperclic::embedding
