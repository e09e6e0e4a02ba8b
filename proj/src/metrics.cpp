#include "hyperclic/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace hyperclic::metrics {
namespace {

void require_nonempty(std::span<const PredictionRecord> records) {
  if (records.empty())
    throw std::invalid_argument("metrics: empty record set");
}

}  // namespace

double instance_accuracy(std::span<const PredictionRecord> records) {
  require_nonempty(records);
  std::size_t hit = 0;
  for (const auto& r : records)
    if (r.predicted == r.truth) ++hit;
  return static_cast<double>(hit) / static_cast<double>(records.size());
}

double class_accuracy(std::span<const PredictionRecord> records,
                      const hierarchy::Tree& tree) {
  require_nonempty(records);
  std::size_t hit = 0;
  for (const auto& r : records)
    if (tree.parent_of(r.predicted) == tree.parent_of(r.truth)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(records.size());
}

double superclass_accuracy(std::span<const PredictionRecord> records,
                           const hierarchy::Tree& tree) {
  require_nonempty(records);
  std::size_t hit = 0;
  for (const auto& r : records)
    if (tree.grandparent_of(r.predicted) == tree.grandparent_of(r.truth)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(records.size());
}

LcaSeverity lca_severity(std::span<const PredictionRecord> records,
                         const hierarchy::Tree& tree) {
  require_nonempty(records);
  double sum = 0.0;
  std::size_t wrong = 0;
  for (const auto& r : records) {
    if (r.predicted == r.truth) continue;
    ++wrong;
    const int a = tree.lca(r.predicted, r.truth);
    sum += static_cast<double>(tree.depth(r.predicted) - tree.depth(a));
  }
  if (wrong == 0) return {0.0, true};
  return {sum / static_cast<double>(wrong), false};
}

double average_mean(const Grid& grid, AverageMode mode) {
  const int t = grid.tasks;
  if (t == 0) throw std::invalid_argument("average_mean: empty grid");
  double sum = 0.0;
  std::size_t count = 0;
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) {
      if (mode == AverageMode::seen_only && i > j) continue;
      sum += grid.at(i, j);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

double average_forgetting(const Grid& grid) {
  const int t = grid.tasks;
  if (t < 2)
    throw std::invalid_argument("average_forgetting: needs at least two tasks");
  double sum = 0.0;
  for (int i = 0; i < t - 1; ++i) {
    double best = grid.at(i, i);
    for (int j = i; j < t - 1; ++j) best = std::max(best, grid.at(i, j));
    sum += best - grid.at(i, t - 1);
  }
  return sum / static_cast<double>(t - 1);
}

std::vector<double> final_per_task(const Grid& grid) {
  std::vector<double> out;
  out.reserve(grid.tasks);
  for (int i = 0; i < grid.tasks; ++i) out.push_back(grid.at(i, grid.tasks - 1));
  return out;
}

}  // namespace hyperclic::metrics
