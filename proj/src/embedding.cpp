#include "hyperclic/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hyperclic/kernels.hpp"

namespace hyperclic::embedding {
namespace {

constexpr double kCoincidentSq = 1e-24;  // below this, perturb before grads

void write_f64(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

// average ranks with tie handling
std::vector<double> ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

void EmbedConfig::validate() const {
  ball().validate();
  if (poincare_epochs < 0 || entailment_epochs < 0 || separation_epochs < 0 ||
      burn_in_epochs < 0)
    throw std::invalid_argument("EmbedConfig: epoch counts must be >= 0");
  if (!(margin > 0.0))
    throw std::invalid_argument("EmbedConfig: margin must be positive");
  if (negatives_per_pair < 1)
    throw std::invalid_argument("EmbedConfig: negatives_per_pair must be >= 1");
  if (!(poincare_lr > 0.0) || !(entailment_lr > 0.0) || !(separation_lr > 0.0))
    throw std::invalid_argument("EmbedConfig: learning rates must be positive");
}

PrototypeSet::PrototypeSet(std::vector<std::string> node_order,
                           geometry::BallConfig ball)
    : node_order_(std::move(node_order)),
      ball_(ball),
      data_(node_order_.size() * ball.dim, 0.0) {
  ball_.validate();
}

void PrototypeSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("prototypes: cannot write '" + path.string() + "'");
  out << ball_.dim << '\t';
  write_f64(out, ball_.curvature);
  out << '\t' << count() << '\n';
  for (std::size_t i = 0; i < count(); ++i) {
    out << node_order_[i];
    for (double v : point(i)) {
      out << '\t';
      write_f64(out, v);
    }
    out << '\n';
  }
}

PrototypeSet PrototypeSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("prototypes: cannot open '" + path.string() + "'");
  std::size_t dim = 0, count = 0;
  double curvature = 0;
  in >> dim >> curvature >> count;
  if (!in) throw std::runtime_error("prototypes: malformed header");
  std::vector<std::string> order(count);
  std::vector<double> data(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    in >> order[i];
    for (std::size_t k = 0; k < dim; ++k) in >> data[i * dim + k];
  }
  if (!in) throw std::runtime_error("prototypes: truncated file");
  PrototypeSet p(std::move(order), {curvature, 1e-5, dim});
  std::copy(data.begin(), data.end(), p.data_.begin());
  return p;
}

PrototypeSet init_prototypes(const hierarchy::Tree& tree,
                             const EmbedConfig& cfg) {
  cfg.validate();
  std::vector<std::string> order;
  order.reserve(tree.size());
  for (std::size_t v = 0; v < tree.size(); ++v) order.push_back(tree.id(static_cast<int>(v)));
  PrototypeSet protos(std::move(order), cfg.ball());

  rng::Rng rng(rng::mix(cfg.seed, 0));
  const std::size_t d = cfg.dim;
  std::vector<double> dir(d);
  for (std::size_t i = 0; i < protos.count(); ++i) {
    for (double& x : dir) x = rng.normal();
    const double n = std::sqrt(kernels::squared_norm(dir));
    const double radius =
        1e-3 * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    auto p = protos.point(i);
    for (std::size_t k = 0; k < d; ++k) p[k] = n > 0 ? radius * dir[k] / n : 0.0;
  }
  return protos;
}

double poincare_loss(const PrototypeSet& protos,
                     std::span<const hierarchy::ClosurePair> pairs,
                     const std::vector<std::vector<int>>& negatives,
                     std::span<double> grads) {
  if (negatives.size() != pairs.size())
    throw std::invalid_argument("poincare_loss: one negative list per pair");
  const auto& ball = protos.ball();
  const std::size_t d = protos.dim();
  double total = 0.0;
  std::vector<double> gu(d), gv(d), perturbed(d);

  auto grad_into = [&](int u, int v, double weight) {
    // weight * d/d(p_u, p_v) of distance; coincident pairs are perturbed
    std::span<const double> pu = protos.point(u);
    std::span<const double> pv = protos.point(v);
    if (kernels::squared_distance(pu, pv) < kCoincidentSq) {
      std::copy(pv.begin(), pv.end(), perturbed.begin());
      perturbed[0] += 1e-9;
      pv = perturbed;
    }
    geometry::distance_gradient(pu, pv, ball, gu, gv);
    kernels::axpy(weight, gu, grads.subspan(u * d, d));
    kernels::axpy(weight, gv, grads.subspan(v * d, d));
  };

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const int u = pairs[p].child;
    const int v = pairs[p].ancestor;
    if (negatives[p].empty())
      throw std::invalid_argument("poincare_loss: empty negative list");
    const double dpos = geometry::distance(protos.point(u), protos.point(v), ball);

    std::vector<double> dneg(negatives[p].size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < negatives[p].size(); ++j) {
      dneg[j] =
          geometry::distance(protos.point(u), protos.point(negatives[p][j]), ball);
      m = std::max(m, -dneg[j]);
    }
    double z = 0.0;
    for (double dn : dneg) z += std::exp(-dn - m);
    const double lse = m + std::log(z);
    total += dpos + lse;

    grad_into(u, v, 1.0);
    for (std::size_t j = 0; j < negatives[p].size(); ++j) {
      const int w = negatives[p][j];
      if (w == u) continue;  // self term is constant e^0
      const double soft = std::exp(-dneg[j] - m) / z;
      grad_into(u, w, -soft);
    }
  }
  return total;
}

double entailment_loss(const PrototypeSet& protos,
                       std::span<const hierarchy::ClosurePair> positives,
                       std::span<const hierarchy::ClosurePair> negatives,
                       double margin, std::span<double> grads) {
  const auto& ball = protos.ball();
  const std::size_t d = protos.dim();
  double total = 0.0;
  std::vector<double> gu(d), gv(d);

  for (const auto& pr : positives) {
    const double e = cone_energy_gradient(protos.point(pr.child),
                                          protos.point(pr.ancestor), ball, gu, gv);
    total += e;
    if (e > 0.0) {
      kernels::axpy(1.0, gu, grads.subspan(pr.child * d, d));
      kernels::axpy(1.0, gv, grads.subspan(pr.ancestor * d, d));
    }
  }
  for (const auto& pr : negatives) {
    const double e = cone_energy_gradient(protos.point(pr.child),
                                          protos.point(pr.ancestor), ball, gu, gv);
    if (e < margin) {
      total += margin - e;
      if (e > 0.0) {
        kernels::axpy(-1.0, gu, grads.subspan(pr.child * d, d));
        kernels::axpy(-1.0, gv, grads.subspan(pr.ancestor * d, d));
      }
    }
  }
  return total;
}

double separation_loss(const PrototypeSet& protos, std::span<const int> subset,
                       std::span<double> grads) {
  const std::size_t d = protos.dim();
  std::vector<double> normed(subset.size() * d);
  std::vector<double> norms(subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const auto p = protos.point(subset[i]);
    const double r = std::sqrt(kernels::squared_norm(p));
    if (r < 1e-300)
      throw std::domain_error("separation_loss: zero-norm prototype");
    norms[i] = r;
    for (std::size_t k = 0; k < d; ++k) normed[i * d + k] = p[k] / r;
  }
  // sum_{i != j} m_i . m_j = ||sum m||^2 - n
  std::vector<double> s(d, 0.0);
  for (std::size_t i = 0; i < subset.size(); ++i)
    kernels::axpy(1.0, {normed.data() + i * d, d}, s);
  const double loss =
      kernels::squared_norm(s) - static_cast<double>(subset.size());

  // dL/dm_i = 2 s; project through the normalization Jacobian
  for (std::size_t i = 0; i < subset.size(); ++i) {
    std::span<const double> m{normed.data() + i * d, d};
    const double ms = kernels::dot(m, s);
    auto g = grads.subspan(subset[i] * d, d);
    for (std::size_t k = 0; k < d; ++k)
      g[k] += 2.0 / norms[i] * (s[k] - ms * m[k]);
  }
  return loss;
}

double separation_loss(const PrototypeSet& protos, std::span<double> grads) {
  std::vector<int> all(protos.count());
  std::iota(all.begin(), all.end(), 0);
  return separation_loss(protos, all, grads);
}

namespace {

// shared by run_stage1 phases: apply the Riemannian step to one point and
// clear its gradient row
void apply_step(PrototypeSet& protos, std::span<double> grads, int node,
                double lr, double min_norm) {
  const std::size_t d = protos.dim();
  auto g = grads.subspan(node * d, d);
  auto p = protos.point(node);
  geometry::riemannian_rescale(g, p, protos.ball());
  kernels::axpy(-lr, g, p);
  if (min_norm > 0.0)
    geometry::project_to_annulus(p, min_norm, protos.ball());
  else
    geometry::project_to_ball(p, protos.ball());
  for (double& x : g) x = 0.0;
}

void check_finite(double loss, const char* phase, int epoch) {
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "run_stage1: non-finite loss in " << phase << " at epoch " << epoch;
    throw std::runtime_error(msg.str());
  }
}

}  // namespace

PrototypeSet run_stage1(const hierarchy::Tree& tree, const EmbedConfig& cfg,
                        Stage1Diagnostics* diag) {
  cfg.validate();
  PrototypeSet protos = init_prototypes(tree, cfg);
  const std::size_t d = cfg.dim;
  const auto closure = tree.transitive_closure();
  std::vector<double> grads(protos.count() * d, 0.0);

  std::vector<std::size_t> order(closure.size());
  std::iota(order.begin(), order.end(), 0);

  // phase 1: distance softmax against sampled negatives, SGD per pair
  {
    rng::Rng rng(rng::mix(cfg.seed, 1));
    std::vector<std::vector<int>> negs(1);
    for (int epoch = 0; epoch < cfg.poincare_epochs; ++epoch) {
      const double lr = epoch < cfg.burn_in_epochs ? cfg.poincare_lr / 10.0
                                                   : cfg.poincare_lr;
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
      double epoch_loss = 0.0;
      for (std::size_t idx : order) {
        const auto& pair = closure[idx];
        negs[0] = tree.sample_negatives(pair.child, cfg.negatives_per_pair, rng);
        epoch_loss += poincare_loss(protos, {&pair, 1}, negs, grads);
        apply_step(protos, grads, pair.child, lr, 0.0);
        apply_step(protos, grads, pair.ancestor, lr, 0.0);
        for (int w : negs[0])
          if (w != pair.child && w != pair.ancestor)
            apply_step(protos, grads, w, lr, 0.0);
      }
      check_finite(epoch_loss, "poincare phase", epoch);
      if (diag && epoch == cfg.poincare_epochs - 1)
        diag->final_poincare_loss = epoch_loss;
    }
  }

  // phase 2: entailment cones; everything stays outside the cone inner radius
  if (!closure.empty() && cfg.entailment_epochs > 0) {
    rng::Rng rng(rng::mix(cfg.seed, 2));
    const double min_norm = kConeMinNorm / std::sqrt(cfg.curvature);
    for (std::size_t i = 0; i < protos.count(); ++i)
      geometry::project_to_annulus(protos.point(i), min_norm, protos.ball());

    for (int epoch = 0; epoch < cfg.entailment_epochs; ++epoch) {
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
      double epoch_loss = 0.0;
      for (std::size_t idx : order) {
        const auto& pair = closure[idx];
        std::vector<hierarchy::ClosurePair> neg_pairs;
        for (int w :
             tree.sample_negatives(pair.child, cfg.negatives_per_pair, rng)) {
          if (w != pair.child) neg_pairs.push_back({pair.child, w});
        }
        epoch_loss += entailment_loss(protos, {&pair, 1}, neg_pairs,
                                      cfg.margin, grads);
        apply_step(protos, grads, pair.child, cfg.entailment_lr, min_norm);
        apply_step(protos, grads, pair.ancestor, cfg.entailment_lr, min_norm);
        for (const auto& np : neg_pairs)
          if (np.ancestor != pair.ancestor)
            apply_step(protos, grads, np.ancestor, cfg.entailment_lr, min_norm);
      }
      check_finite(epoch_loss, "entailment phase", epoch);
    }
  }

  if (diag) diag->cone_zero_rate = closure_cone_zero_rate(protos, tree);

  // phase 3: angular separation; norms are preserved so the radial layout
  // from the earlier phases survives
  {
    double last_loss = 0.0;
    for (int epoch = 0; epoch < cfg.separation_epochs; ++epoch) {
      std::fill(grads.begin(), grads.end(), 0.0);
      last_loss = separation_loss(protos, grads);
      check_finite(last_loss, "separation phase", epoch);
      for (std::size_t i = 0; i < protos.count(); ++i) {
        auto p = protos.point(i);
        const double r0 = std::sqrt(kernels::squared_norm(p));
        std::span<double> g{grads.data() + i * d, d};
        geometry::riemannian_rescale(g, p, protos.ball());
        kernels::axpy(-cfg.separation_lr, g, p);
        const double r1 = std::sqrt(kernels::squared_norm(p));
        if (r1 > 1e-300) kernels::scale(r0 / r1, p);
      }
    }
    if (diag) diag->final_separation_loss = last_loss;
  }

  if (diag) diag->spearman = spearman_tree_correlation(protos, tree);
  return protos;
}

PrototypeSet extract_leaf_prototypes(const PrototypeSet& protos,
                                     const hierarchy::Tree& tree) {
  std::vector<std::string> order;
  for (int v : tree.instances()) order.push_back(tree.id(v));
  PrototypeSet out(std::move(order), protos.ball());
  for (std::size_t i = 0; i < tree.instances().size(); ++i) {
    const auto src = protos.point(tree.instances()[i]);
    std::copy(src.begin(), src.end(), out.point(i).begin());
  }
  return out;
}

double spearman_tree_correlation(const PrototypeSet& protos,
                                 const hierarchy::Tree& tree) {
  std::vector<double> hyp, graph;
  const int n = static_cast<int>(tree.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      hyp.push_back(
          geometry::distance(protos.point(i), protos.point(j), protos.ball()));
      graph.push_back(static_cast<double>(tree.tree_distance(i, j)));
    }
  }
  if (hyp.size() < 2) return 1.0;
  return pearson(ranks(hyp), ranks(graph));
}

double closure_cone_zero_rate(const PrototypeSet& protos,
                              const hierarchy::Tree& tree) {
  const auto closure = tree.transitive_closure();
  if (closure.empty()) return 1.0;
  std::size_t zero = 0;
  for (const auto& pr : closure) {
    if (cone_energy(protos.point(pr.child), protos.point(pr.ancestor),
                    protos.ball()) == 0.0)
      ++zero;
  }
  return static_cast<double>(zero) / static_cast<double>(closure.size());
}

}  // namespace hyperclic::embedding
