#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hyperclic/rng.hpp"

// The class-instance taxonomy: a rooted tree whose vertices carry one of
// four kinds. Edges are constrained kind-to-kind: instance->class,
// class->superclass, superclass->other, other->other. Instances are leaves.
// Trees are immutable after construction; all queries are read-only.

namespace hyperclic::hierarchy {

enum class NodeKind { Instance, Class, Superclass, Other };

NodeKind parse_kind(std::string_view s);  // throws on unknown kind string
std::string_view kind_name(NodeKind k);

struct NodeRecord {
  std::string id;
  NodeKind kind;
  std::string parent_id;  // empty for the root
};

// (descendant, strict ancestor) pair of node indices
struct ClosurePair {
  int child;
  int ancestor;
};

class Tree {
 public:
  // File format: one record per line, `node_id<TAB>kind<TAB>parent_id`,
  // parent_id "-" for the root, `#` starts a comment line.
  static Tree load(const std::filesystem::path& path);
  static Tree parse(std::istream& in);
  static Tree build(const std::vector<NodeRecord>& records);

  void save(const std::filesystem::path& path) const;  // breadth-first order
  void write(std::ostream& out) const;

  std::size_t size() const { return ids_.size(); }
  int root() const { return root_; }

  const std::string& id(int v) const { return ids_[v]; }
  NodeKind kind(int v) const { return kinds_[v]; }
  int depth(int v) const { return depths_[v]; }
  std::optional<int> find(std::string_view id) const;
  int index_of(std::string_view id) const;  // throws if unknown

  bool is_root(int v) const { return v == root_; }
  int parent_of(int v) const;       // throws for the root
  int grandparent_of(int v) const;  // throws for depth < 2
  const std::vector<int>& children_of(int v) const { return children_[v]; }

  // true iff `anc` is a strict ancestor of `v`
  bool is_ancestor(int anc, int v) const;
  int lca(int u, int v) const;
  int tree_distance(int u, int v) const;

  // all (descendant, strict ancestor) pairs; size equals sum of depths
  std::vector<ClosurePair> transitive_closure() const;

  // N(u): every node that is not a strict ancestor of u (u included)
  std::vector<int> negative_candidates(int u) const;
  // k uniform draws from N(u): without replacement when k <= |N(u)|,
  // with replacement otherwise
  std::vector<int> sample_negatives(int u, int k, rng::Rng& rng) const;

  // instance node indices in load order
  const std::vector<int>& instances() const { return instances_; }

 private:
  void check_index(int v) const;

  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  std::vector<NodeKind> kinds_;
  std::vector<int> parents_;  // -1 for the root
  std::vector<int> depths_;
  std::vector<std::vector<int>> children_;
  std::vector<int> instances_;
  int root_ = -1;
};

}  // namespace hyperclic::hierarchy
