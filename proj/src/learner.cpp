#include "hyperclic/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "hyperclic/kernels.hpp"
#include "hyperclic/rng.hpp"

namespace hyperclic::learner {
namespace {

constexpr double kCoincidentSq = 1e-24;

// gradient of exp_map_zero through z = s(r) x, s(r) = tanh(sqrt(c) r)/(sqrt(c) r)
void exp_map_zero_backward(std::span<const double> x,
                           std::span<const double> grad_z,
                           const geometry::BallConfig& ball,
                           std::span<double> grad_x) {
  const double r2 = kernels::squared_norm(x);
  const double r = std::sqrt(r2);
  const double sc = std::sqrt(ball.curvature);
  const double w = sc * r;
  if (w < 1e-8) {
    // s -> 1, s' -> 0
    std::copy(grad_z.begin(), grad_z.end(), grad_x.begin());
    return;
  }
  const double th = std::tanh(w);
  const double s = th / w;
  const double ds_dw = ((1.0 - th * th) * w - th) / (w * w);
  const double sp = ds_dw * sc;  // ds/dr
  const double xg = kernels::dot(x, grad_z);
  for (std::size_t i = 0; i < x.size(); ++i)
    grad_x[i] = s * grad_z[i] + sp / r * xg * x[i];
}

void softmax_from_logits(std::span<const double> logits, std::span<double> p) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logits) m = std::max(m, v);
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
}

double log_sum_exp(std::span<const double> logits) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logits) m = std::max(m, v);
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  return m + std::log(z);
}

// dL/dz for a sample given dL/dlogit; handles the distance chain rule
void logit_grads_to_point(std::span<const double> z, const ClassSet& classes,
                          double tau, std::span<const double> dlogit,
                          std::span<double> grad_z) {
  const auto& ball = classes.protos->ball();
  const std::size_t d = z.size();
  std::vector<double> gz(d), gp(d), perturbed(d);
  for (double& v : grad_z) v = 0.0;
  for (std::size_t j = 0; j < classes.size(); ++j) {
    if (dlogit[j] == 0.0) continue;
    std::span<const double> pj = classes.prototype(j);
    if (kernels::squared_distance(z, pj) < kCoincidentSq) {
      std::copy(pj.begin(), pj.end(), perturbed.begin());
      perturbed[0] += 1e-9;
      pj = perturbed;
    }
    geometry::distance_gradient(z, pj, ball, gz, gp);
    // logit = -d/tau
    kernels::axpy(-dlogit[j] / tau, gz, grad_z);
  }
}

struct PoolItem {
  std::size_t row;
  int label;  // tree instance index
  bool old_instance;
};

}  // namespace

DistillKind parse_distill_kind(std::string_view s) {
  if (s == "cross_entropy") return DistillKind::cross_entropy;
  if (s == "kl_divergence") return DistillKind::kl_divergence;
  if (s == "mse") return DistillKind::mse;
  throw std::invalid_argument("unknown distillation kind '" + std::string(s) + "'");
}

std::string_view distill_kind_name(DistillKind k) {
  switch (k) {
    case DistillKind::cross_entropy:
      return "cross_entropy";
    case DistillKind::kl_divergence:
      return "kl_divergence";
    case DistillKind::mse:
      return "mse";
  }
  return "?";
}

void LearnerConfig::validate() const {
  if (!(temperature > 0.0))
    throw std::invalid_argument("LearnerConfig: temperature must be positive");
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("LearnerConfig: lambda must be in [0, 1]");
  if (epochs < 0) throw std::invalid_argument("LearnerConfig: epochs must be >= 0");
  if (batch_size == 0)
    throw std::invalid_argument("LearnerConfig: batch_size must be positive");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("LearnerConfig: learning_rate must be positive");
}

Mlp::Mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
         std::size_t output_dim, std::uint64_t seed) {
  if (input_dim == 0 || output_dim == 0)
    throw std::invalid_argument("Mlp: zero layer size");
  sizes_.push_back(input_dim);
  for (std::size_t h : hidden) {
    if (h == 0) throw std::invalid_argument("Mlp: zero layer size");
    sizes_.push_back(h);
  }
  sizes_.push_back(output_dim);

  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weight_off_.push_back(total);
    total += sizes_[l + 1] * sizes_[l];
    bias_off_.push_back(total);
    total += sizes_[l + 1];
  }
  params_.assign(total, 0.0);

  rng::Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    double std_dev = std::sqrt(2.0 / static_cast<double>(sizes_[l]));
    // small output layer: features start near the ball origin, clear of the
    // tanh saturation of the exp map
    if (l + 2 == sizes_.size()) std_dev *= 0.01;
    double* w = params_.data() + weight_off_[l];
    for (std::size_t i = 0; i < sizes_[l + 1] * sizes_[l]; ++i)
      w[i] = std_dev * rng.normal();
  }
}

std::span<const double> Mlp::forward(std::span<const double> x,
                                     Workspace& ws) const {
  if (x.size() != input_dim())
    throw std::invalid_argument("Mlp::forward: input size mismatch");
  const std::size_t layers = sizes_.size() - 1;
  ws.pre.resize(layers);
  ws.post.resize(layers);
  ws.input.assign(x.begin(), x.end());

  std::span<const double> a = ws.input;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t rows = sizes_[l + 1];
    const std::size_t cols = sizes_[l];
    ws.pre[l].resize(rows);
    kernels::matvec({params_.data() + weight_off_[l], rows * cols}, rows, cols,
                    a, {params_.data() + bias_off_[l], rows}, ws.pre[l]);
    ws.post[l] = ws.pre[l];
    if (l + 1 < layers) {
      for (double& v : ws.post[l]) v = v > 0.0 ? v : 0.0;
    }
    a = ws.post[l];
  }
  return a;
}

void Mlp::backward(const Workspace& ws, std::span<const double> grad_out,
                   std::span<double> param_grads) const {
  const std::size_t layers = sizes_.size() - 1;
  std::vector<double> d(grad_out.begin(), grad_out.end());  // dL/d(pre[last])
  std::vector<double> dprev;
  for (std::size_t li = layers; li-- > 0;) {
    const std::size_t rows = sizes_[li + 1];
    const std::size_t cols = sizes_[li];
    std::span<const double> a_prev = li == 0 ? std::span<const double>(ws.input)
                                             : std::span<const double>(ws.post[li - 1]);
    kernels::axpy(1.0, d, param_grads.subspan(bias_off_[li], rows));
    kernels::rank1_update(param_grads.subspan(weight_off_[li], rows * cols),
                          rows, cols, 1.0, d, a_prev);
    if (li == 0) break;
    dprev.resize(cols);
    kernels::matvec_t({params_.data() + weight_off_[li], rows * cols}, rows,
                      cols, d, dprev);
    for (std::size_t i = 0; i < cols; ++i)
      dprev[i] = ws.pre[li - 1][i] > 0.0 ? dprev[i] : 0.0;
    d = dprev;
  }
}

void embed(const Mlp& model, std::span<const double> x,
           const geometry::BallConfig& ball, Mlp::Workspace& ws,
           std::span<double> z_out) {
  const auto phi = model.forward(x, ws);
  geometry::exp_map_zero(phi, ball, z_out);
}

void hyperbolic_logits(std::span<const double> z, const ClassSet& classes,
                       double tau, std::span<double> out) {
  if (classes.size() == 0)
    throw std::invalid_argument("hyperbolic_logits: empty class set");
  if (!(tau > 0.0))
    throw std::invalid_argument("hyperbolic_logits: tau must be positive");
  const auto& ball = classes.protos->ball();
  for (std::size_t i = 0; i < classes.size(); ++i)
    out[i] = -geometry::distance(z, classes.prototype(i), ball) / tau;
}

double classification_loss(const Mlp& model, const data::Dataset& dataset,
                           std::span<const std::size_t> rows,
                           std::span<const int> targets,
                           const ClassSet& classes, double tau,
                           std::span<double> param_grads) {
  if (rows.empty())
    throw std::invalid_argument("classification_loss: empty batch");
  const std::size_t n_classes = classes.size();
  const std::size_t d = classes.protos->dim();
  const double inv_batch = 1.0 / static_cast<double>(rows.size());

  Mlp::Workspace ws;
  std::vector<double> z(d), logits(n_classes), p(n_classes), dlogit(n_classes);
  std::vector<double> grad_z(d), grad_phi(d);
  double loss = 0.0;

  for (std::size_t b = 0; b < rows.size(); ++b) {
    const int t = targets[b];
    if (t < 0 || static_cast<std::size_t>(t) >= n_classes)
      throw std::out_of_range("classification_loss: label out of range");
    embed(model, dataset.row(rows[b]), classes.protos->ball(), ws, z);
    hyperbolic_logits(z, classes, tau, logits);
    const double lse = log_sum_exp(logits);
    loss += -(logits[t] - lse) * inv_batch;
    softmax_from_logits(logits, p);
    for (std::size_t j = 0; j < n_classes; ++j)
      dlogit[j] = (p[j] - (static_cast<int>(j) == t ? 1.0 : 0.0)) * inv_batch;
    logit_grads_to_point(z, classes, tau, dlogit, grad_z);
    exp_map_zero_backward(ws.post.back(), grad_z, classes.protos->ball(),
                          grad_phi);
    model.backward(ws, grad_phi, param_grads);
  }
  return loss;
}

double distillation_loss(const Mlp& student, const Mlp& teacher,
                         const data::Dataset& dataset,
                         std::span<const std::size_t> rows,
                         const ClassSet& old_classes, double tau,
                         DistillKind kind, std::span<double> param_grads) {
  if (rows.empty())
    throw std::invalid_argument("distillation_loss: empty batch");
  const std::size_t n_old = old_classes.size();
  const std::size_t d = old_classes.protos->dim();
  const double inv_batch = 1.0 / static_cast<double>(rows.size());

  Mlp::Workspace ws, ws_teacher;
  std::vector<double> z(d), zt(d);
  std::vector<double> logits(n_old), logits_t(n_old);
  std::vector<double> p(n_old), q(n_old), dlogit(n_old);
  std::vector<double> grad_z(d), grad_phi(d);
  double loss = 0.0;

  for (std::size_t row : rows) {
    embed(student, dataset.row(row), old_classes.protos->ball(), ws, z);
    hyperbolic_logits(z, old_classes, tau, logits);
    embed(teacher, dataset.row(row), old_classes.protos->ball(), ws_teacher, zt);
    hyperbolic_logits(zt, old_classes, tau, logits_t);

    switch (kind) {
      case DistillKind::cross_entropy:
      case DistillKind::kl_divergence: {
        softmax_from_logits(logits, p);
        softmax_from_logits(logits_t, q);
        const double lse = log_sum_exp(logits);
        double sample = 0.0;
        for (std::size_t j = 0; j < n_old; ++j) {
          const double logp = logits[j] - lse;
          if (kind == DistillKind::cross_entropy) {
            sample -= q[j] * logp;
          } else if (q[j] > 0.0) {
            sample += q[j] * (std::log(q[j]) - logp);
          }
          dlogit[j] = (p[j] - q[j]) * inv_batch;
        }
        loss += sample * inv_batch;
        break;
      }
      case DistillKind::mse: {
        double sample = 0.0;
        for (std::size_t j = 0; j < n_old; ++j) {
          const double diff = logits[j] - logits_t[j];
          sample += diff * diff;
          dlogit[j] = 2.0 * diff / static_cast<double>(n_old) * inv_batch;
        }
        loss += sample / static_cast<double>(n_old) * inv_batch;
        break;
      }
    }
    logit_grads_to_point(z, old_classes, tau, dlogit, grad_z);
    exp_map_zero_backward(ws.post.back(), grad_z, old_classes.protos->ball(),
                          grad_phi);
    student.backward(ws, grad_phi, param_grads);
  }
  return loss;
}

std::vector<std::size_t> herding_select(std::span<const double> features,
                                        std::size_t n, std::size_t dim,
                                        std::size_t m) {
  if (m < 1) throw std::invalid_argument("herding_select: m must be >= 1");
  if (n == 0) return {};
  auto feat = [&](std::size_t i) {
    return std::span<const double>(features.data() + i * dim, dim);
  };
  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) kernels::axpy(1.0, feat(i), mean);
  kernels::scale(1.0 / static_cast<double>(n), mean);

  std::vector<std::size_t> selected;
  std::vector<char> used(n, 0);
  std::vector<double> sum(dim, 0.0), cand(dim);
  const std::size_t take = std::min(m, n);
  for (std::size_t step = 0; step < take; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = n;
    const double inv = 1.0 / static_cast<double>(step + 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      kernels::lincomb(inv, sum, inv, feat(i), cand);
      const double score = kernels::squared_distance(mean, cand);
      if (score < best) {  // strict: ties keep the lowest index
        best = score;
        best_i = i;
      }
    }
    used[best_i] = 1;
    selected.push_back(best_i);
    kernels::axpy(1.0, feat(best_i), sum);
  }
  return selected;
}

std::size_t ExemplarMemory::total() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.rows.size();
  return n;
}

void train_task(ModelState& state, const TaskData& task,
                const ExemplarMemory& memory,
                const embedding::PrototypeSet& leaf_protos,
                const hierarchy::Tree& tree, const LearnerConfig& cfg) {
  cfg.validate();
  if (task.rows.empty()) throw std::invalid_argument("train_task: empty task data");
  if (task.rows.size() != task.row_labels.size())
    throw std::invalid_argument("train_task: rows/labels size mismatch");
  std::unordered_set<int> seen_set(state.seen_instances.begin(),
                                   state.seen_instances.end());
  for (int inst : task.instances) {
    if (seen_set.count(inst))
      throw std::invalid_argument("train_task: label collision with seen instance '" +
                                  tree.id(inst) + "'");
  }

  // position of each instance node within the leaf prototype set
  std::unordered_map<int, int> leaf_pos;
  for (std::size_t i = 0; i < tree.instances().size(); ++i)
    leaf_pos.emplace(tree.instances()[i], static_cast<int>(i));
  if (leaf_protos.count() != tree.instances().size())
    throw std::invalid_argument("train_task: prototype/instance count mismatch");

  const int t = state.task_index + 1;
  if (t >= 2) state.snapshot = state.current;

  const std::vector<int> old_seen = state.seen_instances;
  state.seen_instances.insert(state.seen_instances.end(),
                              task.instances.begin(), task.instances.end());

  ClassSet seen_classes{&leaf_protos, {}};
  for (int inst : state.seen_instances) seen_classes.positions.push_back(leaf_pos.at(inst));
  ClassSet old_classes{&leaf_protos, {}};
  for (int inst : old_seen) old_classes.positions.push_back(leaf_pos.at(inst));

  std::unordered_map<int, int> seen_target;  // instance node -> class index
  for (std::size_t i = 0; i < state.seen_instances.size(); ++i)
    seen_target.emplace(state.seen_instances[i], static_cast<int>(i));

  std::vector<PoolItem> pool;
  for (std::size_t i = 0; i < task.rows.size(); ++i)
    pool.push_back({task.rows[i], task.row_labels[i], false});
  for (const auto& entry : memory.entries()) {
    for (std::size_t row : entry.rows) pool.push_back({row, entry.instance, true});
  }

  const bool distilling = t >= 2 && cfg.lambda > 0.0 && !old_classes.positions.empty();
  if (distilling && !state.snapshot)
    throw std::logic_error("train_task: distillation requires a snapshot");
  const double cls_weight = t == 1 ? 1.0 : 1.0 - cfg.lambda;

  rng::Rng rng(rng::mix(cfg.seed, 1000 + static_cast<std::uint64_t>(t)));
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> g_cls(state.current.param_count());
  std::vector<double> g_dist(state.current.param_count());
  std::vector<std::size_t> batch_rows, dist_rows;
  std::vector<int> batch_targets;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch_rows.clear();
      batch_targets.clear();
      dist_rows.clear();
      for (std::size_t k = start; k < stop; ++k) {
        const PoolItem& item = pool[order[k]];
        batch_rows.push_back(item.row);
        batch_targets.push_back(seen_target.at(item.label));
        if (distilling && (cfg.distill_on_new || item.old_instance))
          dist_rows.push_back(item.row);
      }
      std::fill(g_cls.begin(), g_cls.end(), 0.0);
      classification_loss(state.current, *task.dataset, batch_rows,
                          batch_targets, seen_classes, cfg.temperature, g_cls);
      if (!dist_rows.empty()) {
        std::fill(g_dist.begin(), g_dist.end(), 0.0);
        distillation_loss(state.current, *state.snapshot, *task.dataset,
                          dist_rows, old_classes, cfg.temperature, cfg.distill,
                          g_dist);
      }
      auto& params = state.current.params();
      const double lw = cfg.learning_rate * cls_weight;
      for (std::size_t i = 0; i < params.size(); ++i) {
        double step = lw * g_cls[i];
        if (!dist_rows.empty()) step += cfg.learning_rate * cfg.lambda * g_dist[i];
        params[i] -= step;
      }
    }
  }
  state.task_index = t;
}

ExemplarMemory update_memory(const ExemplarMemory& memory,
                             const TaskData& task, const ModelState& state) {
  const std::size_t seen = state.seen_instances.size();
  if (seen == 0) throw std::invalid_argument("update_memory: no seen instances");
  const std::size_t quota = memory.budget() / seen;
  if (quota == 0)
    throw std::runtime_error(
        "update_memory: memory budget smaller than the number of seen "
        "instances (quota 0)");

  ExemplarMemory out(memory.budget());
  for (const auto& entry : memory.entries()) {
    ExemplarMemory::Entry e = entry;
    if (e.rows.size() > quota) e.rows.resize(quota);  // herding prefix
    out.entries().push_back(std::move(e));
  }

  Mlp::Workspace ws;
  const std::size_t fdim = state.current.output_dim();
  for (int inst : task.instances) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < task.rows.size(); ++i) {
      if (task.row_labels[i] == inst) rows.push_back(task.rows[i]);
    }
    std::vector<double> features(rows.size() * fdim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto phi = state.current.forward(task.dataset->row(rows[i]), ws);
      std::copy(phi.begin(), phi.end(), features.begin() + i * fdim);
    }
    ExemplarMemory::Entry e{inst, {}};
    for (std::size_t sel :
         herding_select(features, rows.size(), fdim, quota))
      e.rows.push_back(rows[sel]);
    out.entries().push_back(std::move(e));
  }
  return out;
}

ExemplarMeans exemplar_means(const ExemplarMemory& memory, const Mlp& model,
                             const data::Dataset& dataset, bool normalize) {
  ExemplarMeans out;
  out.dim = model.output_dim();
  Mlp::Workspace ws;
  std::vector<double> mean(out.dim);
  for (const auto& entry : memory.entries()) {
    if (entry.rows.empty()) continue;
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t row : entry.rows) {
      const auto phi = model.forward(dataset.row(row), ws);
      if (normalize) {
        const double n = std::sqrt(kernels::squared_norm(phi));
        if (n > 0.0) kernels::axpy(1.0 / n, phi, mean);
      } else {
        kernels::axpy(1.0, phi, mean);
      }
    }
    kernels::scale(1.0 / static_cast<double>(entry.rows.size()), mean);
    out.instances.push_back(entry.instance);
    out.means.insert(out.means.end(), mean.begin(), mean.end());
  }
  return out;
}

int nme_predict(std::span<const double> x, const ExemplarMeans& means,
                const Mlp& model, bool normalize) {
  if (means.instances.empty())
    throw std::invalid_argument("nme_predict: empty exemplar memory");
  Mlp::Workspace ws;
  const auto phi_raw = model.forward(x, ws);
  std::vector<double> phi(phi_raw.begin(), phi_raw.end());
  if (normalize) {
    const double n = std::sqrt(kernels::squared_norm(phi));
    if (n > 0.0) kernels::scale(1.0 / n, phi);
  }
  double best = std::numeric_limits<double>::infinity();
  int best_inst = -1;
  for (std::size_t i = 0; i < means.instances.size(); ++i) {
    const double d2 = kernels::squared_distance(
        phi, {means.means.data() + i * means.dim, means.dim});
    if (d2 < best || (d2 == best && means.instances[i] < best_inst)) {
      best = d2;
      best_inst = means.instances[i];
    }
  }
  return best_inst;
}

int nme_predict(std::span<const double> x, const ExemplarMemory& memory,
                const Mlp& model, const data::Dataset& dataset,
                bool normalize) {
  return nme_predict(x, exemplar_means(memory, model, dataset, normalize),
                     model, normalize);
}

namespace {

void write_params(std::ostream& out, const std::vector<double>& params) {
  char buf[32];
  out << params.size();
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", params[i]);
    out << (i % 8 == 0 ? '\n' : ' ') << buf;
  }
  out << '\n';
}

std::vector<double> read_params(std::istream& in) {
  std::size_t n = 0;
  in >> n;
  std::vector<double> params(n);
  for (auto& v : params) in >> v;
  if (!in) throw std::runtime_error("checkpoint: truncated parameter block");
  return params;
}

Mlp make_mlp(const std::vector<std::size_t>& sizes) {
  const std::vector<std::size_t> hidden(sizes.begin() + 1, sizes.end() - 1);
  return Mlp(sizes.front(), hidden, sizes.back(), 0);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelState& state,
                     const ExemplarMemory& memory, const hierarchy::Tree& tree) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("checkpoint: cannot write '" + path.string() + "'");
  out << "hyperclic-checkpoint v1\n";
  out << "task " << state.task_index << '\n';
  out << "layers " << state.current.layer_sizes().size();
  for (std::size_t s : state.current.layer_sizes()) out << ' ' << s;
  out << '\n';
  out << "params ";
  write_params(out, state.current.params());
  out << "snapshot " << (state.snapshot ? 1 : 0) << '\n';
  if (state.snapshot) {
    out << "params ";
    write_params(out, state.snapshot->params());
  }
  out << "seen " << state.seen_instances.size();
  for (int inst : state.seen_instances) out << ' ' << tree.id(inst);
  out << '\n';
  out << "memory " << memory.budget() << ' ' << memory.entries().size() << '\n';
  for (const auto& e : memory.entries()) {
    out << tree.id(e.instance) << ' ' << e.rows.size();
    for (std::size_t r : e.rows) out << ' ' << r;
    out << '\n';
  }
}

std::pair<ModelState, ExemplarMemory> load_checkpoint(
    const std::filesystem::path& path, const hierarchy::Tree& tree) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("checkpoint: cannot open '" + path.string() + "'");
  std::string magic, version, tag;
  in >> magic >> version;
  if (magic != "hyperclic-checkpoint" || version != "v1")
    throw std::runtime_error("checkpoint: unrecognized format");
  int task = 0;
  in >> tag >> task;
  std::size_t n_layers = 0;
  in >> tag >> n_layers;
  std::vector<std::size_t> sizes(n_layers);
  for (auto& s : sizes) in >> s;
  if (!in || n_layers < 2) throw std::runtime_error("checkpoint: bad layer list");

  in >> tag;
  Mlp current = make_mlp(sizes);
  current.params() = read_params(in);
  if (current.params().size() != current.param_count())
    throw std::runtime_error("checkpoint: parameter count mismatch");

  int has_snapshot = 0;
  in >> tag >> has_snapshot;
  std::optional<Mlp> snapshot;
  if (has_snapshot) {
    in >> tag;
    Mlp snap = make_mlp(sizes);
    snap.params() = read_params(in);
    snapshot = std::move(snap);
  }

  std::size_t n_seen = 0;
  in >> tag >> n_seen;
  std::vector<int> seen(n_seen);
  for (auto& v : seen) {
    std::string id;
    in >> id;
    v = tree.index_of(id);
    if (tree.kind(v) != hierarchy::NodeKind::Instance)
      throw std::runtime_error("checkpoint: seen id '" + id +
                               "' is not an instance node");
  }

  std::size_t budget = 0, n_entries = 0;
  in >> tag >> budget >> n_entries;
  ExemplarMemory memory(budget);
  for (std::size_t i = 0; i < n_entries; ++i) {
    ExemplarMemory::Entry e;
    std::string id;
    std::size_t n_rows = 0;
    in >> id >> n_rows;
    e.instance = tree.index_of(id);
    e.rows.resize(n_rows);
    for (auto& r : e.rows) in >> r;
    memory.entries().push_back(std::move(e));
  }
  if (!in) throw std::runtime_error("checkpoint: truncated file");

  ModelState state{std::move(current), std::move(snapshot), std::move(seen), task};
  return {std::move(state), std::move(memory)};
}

}  // namespace hyperclic::learner
