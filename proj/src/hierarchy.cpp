#include "hyperclic/hierarchy.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace hyperclic::hierarchy {
namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("hierarchy: " + msg);
}

NodeKind required_parent_kind(NodeKind child) {
  switch (child) {
    case NodeKind::Instance:
      return NodeKind::Class;
    case NodeKind::Class:
      return NodeKind::Superclass;
    case NodeKind::Superclass:
      return NodeKind::Other;
    case NodeKind::Other:
      return NodeKind::Other;
  }
  fail("unreachable kind");
}

}  // namespace

NodeKind parse_kind(std::string_view s) {
  if (s == "instance") return NodeKind::Instance;
  if (s == "class") return NodeKind::Class;
  if (s == "superclass") return NodeKind::Superclass;
  if (s == "other") return NodeKind::Other;
  fail("unknown kind '" + std::string(s) + "'");
}

std::string_view kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Instance:
      return "instance";
    case NodeKind::Class:
      return "class";
    case NodeKind::Superclass:
      return "superclass";
    case NodeKind::Other:
      return "other";
  }
  return "?";
}

Tree Tree::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path.string() + "'");
  return parse(in);
}

Tree Tree::parse(std::istream& in) {
  std::vector<NodeRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string id, kind, parent;
    if (!std::getline(ls, id, '\t') || !std::getline(ls, kind, '\t') ||
        !std::getline(ls, parent, '\t'))
      fail("line " + std::to_string(lineno) + ": expected id<TAB>kind<TAB>parent");
    records.push_back({id, parse_kind(kind), parent == "-" ? "" : parent});
  }
  return build(records);
}

Tree Tree::build(const std::vector<NodeRecord>& records) {
  Tree t;
  if (records.empty()) fail("empty tree");

  for (const auto& r : records) {
    if (t.index_.count(r.id)) fail("duplicate node_id '" + r.id + "'");
    t.index_.emplace(r.id, static_cast<int>(t.ids_.size()));
    t.ids_.push_back(r.id);
    t.kinds_.push_back(r.kind);
  }

  const int n = static_cast<int>(t.ids_.size());
  t.parents_.assign(n, -1);
  t.children_.assign(n, {});
  for (int v = 0; v < n; ++v) {
    const auto& r = records[v];
    if (r.parent_id.empty()) {
      if (t.root_ >= 0)
        fail("multiple roots: '" + t.ids_[t.root_] + "' and '" + r.id + "'");
      t.root_ = v;
      continue;
    }
    const auto it = t.index_.find(r.parent_id);
    if (it == t.index_.end())
      fail("node '" + r.id + "' references unknown parent '" + r.parent_id + "'");
    t.parents_[v] = it->second;
    t.children_[it->second].push_back(v);
  }
  if (t.root_ < 0) fail("no root node");

  // depths via BFS from the root; unvisited nodes indicate a cycle or a
  // disconnected component
  t.depths_.assign(n, -1);
  std::deque<int> queue{t.root_};
  t.depths_[t.root_] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int ch : t.children_[v]) {
      t.depths_[ch] = t.depths_[v] + 1;
      queue.push_back(ch);
    }
  }
  for (int v = 0; v < n; ++v) {
    if (t.depths_[v] < 0)
      fail("node '" + t.ids_[v] + "' is not reachable from the root (cycle?)");
  }

  for (int v = 0; v < n; ++v) {
    if (t.kinds_[v] == NodeKind::Instance) {
      if (!t.children_[v].empty())
        fail("instance '" + t.ids_[v] + "' has children");
      t.instances_.push_back(v);
    }
    if (v == t.root_) continue;
    const NodeKind want = required_parent_kind(t.kinds_[v]);
    const NodeKind got = t.kinds_[t.parents_[v]];
    if (got != want)
      fail("node '" + t.ids_[v] + "' (" + std::string(kind_name(t.kinds_[v])) +
           ") has parent of kind " + std::string(kind_name(got)) +
           ", expected " + std::string(kind_name(want)));
  }
  return t;
}

void Tree::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail("cannot write '" + path.string() + "'");
  write(out);
}

void Tree::write(std::ostream& out) const {
  std::deque<int> queue{root_};
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    out << ids_[v] << '\t' << kind_name(kinds_[v]) << '\t'
        << (v == root_ ? "-" : ids_[parents_[v]]) << '\n';
    for (int ch : children_[v]) queue.push_back(ch);
  }
}

std::optional<int> Tree::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Tree::index_of(std::string_view id) const {
  const auto v = find(id);
  if (!v) fail("unknown node id '" + std::string(id) + "'");
  return *v;
}

void Tree::check_index(int v) const {
  if (v < 0 || v >= static_cast<int>(ids_.size()))
    fail("node index " + std::to_string(v) + " out of range");
}

int Tree::parent_of(int v) const {
  check_index(v);
  if (v == root_) fail("root '" + ids_[v] + "' has no parent");
  return parents_[v];
}

int Tree::grandparent_of(int v) const { return parent_of(parent_of(v)); }

bool Tree::is_ancestor(int anc, int v) const {
  check_index(anc);
  check_index(v);
  int cur = parents_[v];
  while (cur >= 0) {
    if (cur == anc) return true;
    cur = parents_[cur];
  }
  return false;
}

int Tree::lca(int u, int v) const {
  check_index(u);
  check_index(v);
  while (depths_[u] > depths_[v]) u = parents_[u];
  while (depths_[v] > depths_[u]) v = parents_[v];
  while (u != v) {
    u = parents_[u];
    v = parents_[v];
  }
  return u;
}

int Tree::tree_distance(int u, int v) const {
  const int a = lca(u, v);
  return depths_[u] + depths_[v] - 2 * depths_[a];
}

std::vector<ClosurePair> Tree::transitive_closure() const {
  std::vector<ClosurePair> pairs;
  for (int v = 0; v < static_cast<int>(ids_.size()); ++v) {
    int cur = parents_[v];
    while (cur >= 0) {
      pairs.push_back({v, cur});
      cur = parents_[cur];
    }
  }
  return pairs;
}

std::vector<int> Tree::negative_candidates(int u) const {
  check_index(u);
  std::vector<int> out;
  out.reserve(ids_.size());
  for (int v = 0; v < static_cast<int>(ids_.size()); ++v) {
    if (v == u || !is_ancestor(v, u)) out.push_back(v);
  }
  return out;
}

std::vector<int> Tree::sample_negatives(int u, int k, rng::Rng& rng) const {
  if (k < 1) fail("sample_negatives: k must be >= 1");
  std::vector<int> pool = negative_candidates(u);
  std::vector<int> out;
  out.reserve(k);
  if (static_cast<std::size_t>(k) <= pool.size()) {
    // partial Fisher-Yates: uniform without replacement
    for (int i = 0; i < k; ++i) {
      const std::size_t j = i + rng.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
  } else {
    for (int i = 0; i < k; ++i) out.push_back(pool[rng.below(pool.size())]);
  }
  return out;
}

}  // namespace hyperclic::hierarchy
