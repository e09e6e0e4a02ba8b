#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hyperclic/hierarchy.hpp"

namespace hyperclic::data {

// Row-major feature table, one instance label per row.
// File format: header line `n_samples<TAB>input_dim`, then one row per
// sample `instance_id<TAB>f64...`; `#` starts a comment line.
struct Dataset {
  std::size_t input_dim = 0;
  std::vector<double> features;
  std::vector<std::string> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * input_dim, input_dim};
  }
  void append(std::string label, std::span<const double> x);

  static Dataset load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // tree instance index per row; throws if a label is unknown or not an
  // instance node
  std::vector<int> resolve_labels(const hierarchy::Tree& tree) const;
};

}  // namespace hyperclic::data
