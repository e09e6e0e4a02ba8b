#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "hyperclic/geometry.hpp"
#include "hyperclic/hierarchy.hpp"
#include "hyperclic/rng.hpp"

// shared helpers for the test suites: finite differences, random in-ball
// points, random trees with a brute-force oracle view

namespace testutil {

inline std::vector<double> finite_diff(
    const std::function<double(std::span<const double>)>& f,
    std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = f(x);
    x[i] = saved - h;
    const double fm = f(x);
    x[i] = saved;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// per-component relative error with a small absolute floor
inline double grad_error(std::span<const double> analytic,
                         std::span<const double> fd) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max(std::abs(fd[i]), 1e-6);
    worst = std::max(worst, std::abs(analytic[i] - fd[i]) / denom);
  }
  return worst;
}

inline std::vector<double> random_ball_point(hyperclic::rng::Rng& rng,
                                             std::size_t dim, double max_radius,
                                             double curvature = 1.0) {
  std::vector<double> p(dim);
  double n2 = 0.0;
  for (auto& v : p) {
    v = rng.normal();
    n2 += v * v;
  }
  const double r = max_radius / std::sqrt(curvature) *
                   std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
  const double n = std::sqrt(n2);
  for (auto& v : p) v = n > 0 ? v * r / n : 0.0;
  return p;
}

// random tree honoring the kind chain; shape: superclasses under the root,
// classes under superclasses, leaf instances under classes
inline hyperclic::hierarchy::Tree random_tree(hyperclic::rng::Rng& rng,
                                              int max_super = 4,
                                              int max_class = 3,
                                              int max_inst = 3) {
  using hyperclic::hierarchy::NodeRecord;
  std::vector<NodeRecord> recs;
  recs.push_back({"root", hyperclic::hierarchy::NodeKind::Other, ""});
  const int ns = 1 + static_cast<int>(rng.below(max_super));
  for (int s = 0; s < ns; ++s) {
    const std::string sid = "s" + std::to_string(s);
    recs.push_back({sid, hyperclic::hierarchy::NodeKind::Superclass, "root"});
    const int nc = 1 + static_cast<int>(rng.below(max_class));
    for (int c = 0; c < nc; ++c) {
      const std::string cid = sid + "c" + std::to_string(c);
      recs.push_back({cid, hyperclic::hierarchy::NodeKind::Class, sid});
      const int ni = static_cast<int>(rng.below(max_inst + 1));
      for (int i = 0; i < ni; ++i) {
        recs.push_back({cid + "i" + std::to_string(i),
                        hyperclic::hierarchy::NodeKind::Instance, cid});
      }
    }
  }
  return hyperclic::hierarchy::Tree::build(recs);
}

}  // namespace testutil
