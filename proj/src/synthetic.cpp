#include "hyperclic/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hyperclic/rng.hpp"

namespace hyperclic::harness {

void SyntheticSpec::validate() const {
  if (input_dim == 0)
    throw std::invalid_argument("SyntheticSpec: input_dim must be positive");
  if (samples_per_instance == 0)
    throw std::invalid_argument("SyntheticSpec: samples_per_instance must be positive");
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw std::invalid_argument("SyntheticSpec: train_fraction must be in (0, 1)");
  if (!(sigma_superclass > sigma_class) || !(sigma_class > sigma_instance) ||
      !(sigma_instance > 0.0))
    throw std::invalid_argument(
        "SyntheticSpec: need sigma_superclass > sigma_class > sigma_instance > 0");
  if (!(sigma_noise > 0.0))
    throw std::invalid_argument("SyntheticSpec: sigma_noise must be positive");
}

data::Dataset generate_synthetic(const hierarchy::Tree& tree,
                                 const SyntheticSpec& spec) {
  spec.validate();
  rng::Rng rng(rng::mix(spec.seed, 7));
  const std::size_t d = spec.input_dim;

  // centers cascade down the tree: each node's center is its parent's plus
  // kind-scaled Gaussian noise; nodes above superclasses sit at the parent
  // center so every superclass subtree gets its own dispersion scale
  std::vector<std::vector<double>> centers(tree.size());
  // breadth-first so parents are ready before children
  std::vector<int> by_depth(tree.size());
  std::iota(by_depth.begin(), by_depth.end(), 0);
  std::stable_sort(by_depth.begin(), by_depth.end(),
                   [&](int a, int b) { return tree.depth(a) < tree.depth(b); });
  for (int v : by_depth) {
    std::vector<double> c =
        tree.is_root(v) ? std::vector<double>(d, 0.0) : centers[tree.parent_of(v)];
    double sigma = 0.0;
    switch (tree.kind(v)) {
      case hierarchy::NodeKind::Superclass:
        sigma = spec.sigma_superclass;
        break;
      case hierarchy::NodeKind::Class:
        sigma = spec.sigma_class;
        break;
      case hierarchy::NodeKind::Instance:
        sigma = spec.sigma_instance;
        break;
      case hierarchy::NodeKind::Other:
        sigma = 0.0;
        break;
    }
    for (std::size_t k = 0; k < d; ++k) c[k] += sigma * rng.normal();
    centers[v] = std::move(c);
  }

  data::Dataset out;
  out.input_dim = d;
  std::vector<double> x(d);
  for (int inst : tree.instances()) {
    for (std::size_t s = 0; s < spec.samples_per_instance; ++s) {
      for (std::size_t k = 0; k < d; ++k)
        x[k] = centers[inst][k] + spec.sigma_noise * rng.normal();
      out.append(tree.id(inst), x);
    }
  }
  return out;
}

TaskStream split_tasks(const data::Dataset& dataset,
                       const hierarchy::Tree& tree, int tasks,
                       double train_fraction, std::uint64_t seed) {
  if (tasks < 1) throw std::invalid_argument("split_tasks: tasks must be >= 1");
  const auto labels = dataset.resolve_labels(tree);

  std::vector<int> instances = tree.instances();
  if (static_cast<int>(instances.size()) < tasks)
    throw std::invalid_argument("split_tasks: more tasks than instances");

  rng::Rng rng(rng::mix(seed, 11));
  for (std::size_t i = instances.size(); i > 1; --i)
    std::swap(instances[i - 1], instances[rng.below(i)]);

  TaskStream stream;
  stream.tasks = tasks;
  stream.task_instances.resize(tasks);
  stream.train_rows.resize(tasks);
  stream.test_rows.resize(tasks);

  // near-equal partition: the first (n % tasks) groups get one extra
  const std::size_t n = instances.size();
  std::size_t cursor = 0;
  for (int t = 0; t < tasks; ++t) {
    std::size_t take = n / tasks + (static_cast<std::size_t>(t) < n % tasks ? 1 : 0);
    for (std::size_t k = 0; k < take; ++k)
      stream.task_instances[t].push_back(instances[cursor++]);
  }

  std::vector<int> task_of_instance(tree.size(), -1);
  for (int t = 0; t < tasks; ++t)
    for (int inst : stream.task_instances[t]) task_of_instance[inst] = t;

  // per-instance row split, seed-shuffled
  std::vector<std::vector<std::size_t>> rows_of(tree.size());
  for (std::size_t r = 0; r < dataset.size(); ++r)
    rows_of[labels[r]].push_back(r);
  for (int inst : tree.instances()) {
    auto& rows = rows_of[inst];
    if (rows.empty())
      throw std::invalid_argument("split_tasks: instance '" + tree.id(inst) +
                                  "' has no samples");
    for (std::size_t i = rows.size(); i > 1; --i)
      std::swap(rows[i - 1], rows[rng.below(i)]);
    std::size_t n_train = static_cast<std::size_t>(
        std::ceil(train_fraction * static_cast<double>(rows.size())));
    if (n_train == rows.size()) --n_train;  // keep at least one test row
    if (n_train == 0) n_train = 1;
    const int t = task_of_instance[inst];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      (i < n_train ? stream.train_rows[t] : stream.test_rows[t]).push_back(rows[i]);
    }
  }
  for (int t = 0; t < tasks; ++t) {
    std::sort(stream.train_rows[t].begin(), stream.train_rows[t].end());
    std::sort(stream.test_rows[t].begin(), stream.test_rows[t].end());
  }
  return stream;
}

}  // namespace hyperclic::harness
