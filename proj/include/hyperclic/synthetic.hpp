#pragma once

#include <cstdint>
#include <vector>

#include "hyperclic/dataset.hpp"
#include "hyperclic/hierarchy.hpp"

// Synthetic hierarchical data: Gaussian centers nested superclass -> class
// -> instance with shrinking dispersion, samples around instance centers.

namespace hyperclic::harness {

struct SyntheticSpec {
  std::size_t input_dim = 16;
  std::size_t samples_per_instance = 30;
  double train_fraction = 0.8;
  double sigma_superclass = 4.0;
  double sigma_class = 1.0;
  double sigma_instance = 0.25;
  double sigma_noise = 0.1;
  std::uint64_t seed = 1;

  void validate() const;  // requires sigma_superclass > sigma_class > sigma_instance > 0
};

data::Dataset generate_synthetic(const hierarchy::Tree& tree,
                                 const SyntheticSpec& spec);

struct TaskStream {
  int tasks = 0;
  std::vector<std::vector<int>> task_instances;        // disjoint node indices
  std::vector<std::vector<std::size_t>> train_rows;    // per task
  std::vector<std::vector<std::size_t>> test_rows;     // per task
};

// instances partitioned into T near-equal disjoint groups (seed-shuffled);
// each instance's rows are split train/test by the fraction, per-instance
TaskStream split_tasks(const data::Dataset& dataset,
                       const hierarchy::Tree& tree, int tasks,
                       double train_fraction, std::uint64_t seed);

}  // namespace hyperclic::harness
