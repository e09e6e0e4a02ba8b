#include "hyperclic/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hyperclic::data {

void Dataset::append(std::string label, std::span<const double> x) {
  if (input_dim == 0) input_dim = x.size();
  if (x.size() != input_dim)
    throw std::invalid_argument("Dataset::append: inconsistent feature size");
  labels.push_back(std::move(label));
  features.insert(features.end(), x.begin(), x.end());
}

Dataset Dataset::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("dataset: cannot open '" + path.string() + "'");
  Dataset d;
  std::string line;
  bool have_header = false;
  std::size_t expected_rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    if (!have_header) {
      if (!(ls >> expected_rows >> d.input_dim) || d.input_dim == 0)
        throw std::runtime_error("dataset: malformed header");
      have_header = true;
      continue;
    }
    std::string label;
    if (!std::getline(ls, label, '\t'))
      throw std::runtime_error("dataset: missing label");
    d.labels.push_back(label);
    for (std::size_t k = 0; k < d.input_dim; ++k) {
      double v;
      if (!(ls >> v)) throw std::runtime_error("dataset: short feature row");
      d.features.push_back(v);
    }
  }
  if (!have_header) throw std::runtime_error("dataset: empty file");
  if (d.size() != expected_rows)
    throw std::runtime_error("dataset: row count does not match header");
  return d;
}

void Dataset::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("dataset: cannot write '" + path.string() + "'");
  out << size() << '\t' << input_dim << '\n';
  char buf[32];
  for (std::size_t i = 0; i < size(); ++i) {
    out << labels[i];
    for (double v : row(i)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << '\t' << buf;
    }
    out << '\n';
  }
}

std::vector<int> Dataset::resolve_labels(const hierarchy::Tree& tree) const {
  std::vector<int> out;
  out.reserve(size());
  for (const auto& label : labels) {
    const int v = tree.index_of(label);
    if (tree.kind(v) != hierarchy::NodeKind::Instance)
      throw std::runtime_error("dataset: label '" + label +
                               "' is not an instance node");
    out.push_back(v);
  }
  return out;
}

}  // namespace hyperclic::data
