#pragma once

#include <span>
#include <vector>

#include "hyperclic/hierarchy.hpp"

// Continual hierarchical evaluation. A grid entry (i, j) is the metric on
// the test set of task i after incremental training of task j; indices are
// 0-based in code, 1-based in the formulas below. All computations are pure.

namespace hyperclic::metrics {

struct PredictionRecord {
  int truth;      // ground-truth instance node index
  int predicted;  // predicted instance node index
  int task_of_sample;
  int task_after_training;
};

// T x T grid, row i = test task, column j = trained-up-to task
struct Grid {
  int tasks = 0;
  std::vector<double> values;

  explicit Grid(int t = 0) : tasks(t), values(static_cast<std::size_t>(t) * t, 0.0) {}
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * tasks + j]; }
  double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * tasks + j];
  }
};

struct AccuracyMatrix {
  int tasks = 0;
  Grid instance, cls, supercls, lca;

  explicit AccuracyMatrix(int t = 0)
      : tasks(t), instance(t), cls(t), supercls(t), lca(t) {}
};

// fraction of records with predicted == truth
double instance_accuracy(std::span<const PredictionRecord> records);
// fraction sharing the truth's parent class / grandparent superclass
double class_accuracy(std::span<const PredictionRecord> records,
                      const hierarchy::Tree& tree);
double superclass_accuracy(std::span<const PredictionRecord> records,
                           const hierarchy::Tree& tree);

struct LcaSeverity {
  double value = 0.0;      // mean edges from the prediction up to the lca
  bool all_correct = false;
};
// averaged over wrong predictions only; all-correct yields {0, true}
LcaSeverity lca_severity(std::span<const PredictionRecord> records,
                         const hierarchy::Tree& tree);

enum class AverageMode { all, seen_only };

// all: (1/T^2) sum_{i,j}; seen_only: mean over entries with i <= j
double average_mean(const Grid& grid, AverageMode mode);

// (1/(T-1)) sum_{i<T} [ max_{j in [i, T-1]} g(i,j) - g(i,T) ]; throws for T < 2
double average_forgetting(const Grid& grid);

// column j = T
std::vector<double> final_per_task(const Grid& grid);

}  // namespace hyperclic::metrics
