#include "hyperclic/geometry.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hyperclic/kernels.hpp"

namespace hyperclic::geometry {
namespace {

std::atomic<std::uint64_t> g_clip_count{0};

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

double BallConfig::max_norm() const {
  return (1.0 - boundary_eps) / std::sqrt(curvature);
}

void BallConfig::validate() const {
  if (!(curvature > 0.0) || !std::isfinite(curvature))
    throw std::invalid_argument("BallConfig: curvature must be positive");
  if (!(boundary_eps > 0.0) || !(boundary_eps < 1e-2))
    throw std::invalid_argument("BallConfig: boundary_eps must be in (0, 1e-2)");
  if (dim < 2) throw std::invalid_argument("BallConfig: dim must be >= 2");
}

std::uint64_t arctanh_clip_count() { return g_clip_count.load(); }
void reset_arctanh_clip_count() { g_clip_count.store(0); }

void mobius_add(std::span<const double> p1, std::span<const double> p2,
                const BallConfig& cfg, std::span<double> out) {
  if (!all_finite(p1) || !all_finite(p2))
    throw std::invalid_argument("mobius_add: non-finite input");
  const double c = cfg.curvature;
  const double n1 = kernels::squared_norm(p1);
  const double n2 = kernels::squared_norm(p2);
  const double ip = kernels::dot(p1, p2);
  const double a = 1.0 + 2.0 * c * ip + c * n2;
  const double b = 1.0 - c * n1;
  const double den = 1.0 + 2.0 * c * ip + c * c * n1 * n2;
  kernels::lincomb(a / den, p1, b / den, p2, out);
  project_to_ball(out, cfg);
}

double distance(std::span<const double> p1, std::span<const double> p2,
                const BallConfig& cfg) {
  const double sc = std::sqrt(cfg.curvature);
  std::vector<double> neg(p1.begin(), p1.end());
  kernels::scale(-1.0, neg);
  std::vector<double> sum(p1.size());
  mobius_add(neg, p2, cfg, sum);
  double arg = sc * std::sqrt(kernels::squared_norm(sum));
  const double lim = 1.0 - cfg.boundary_eps;
  if (arg > lim) {
    arg = lim;
    g_clip_count.fetch_add(1, std::memory_order_relaxed);
  }
  if (arg < 0.0) arg = 0.0;
  return 2.0 / sc * std::atanh(arg);
}

void exp_map_zero(std::span<const double> x, const BallConfig& cfg,
                  std::span<double> out) {
  if (!all_finite(x)) throw std::invalid_argument("exp_map_zero: non-finite input");
  const double r = std::sqrt(kernels::squared_norm(x));
  if (r < 1e-300) {
    for (double& v : out) v = 0.0;
    return;
  }
  const double sc = std::sqrt(cfg.curvature);
  const double t = std::tanh(sc * r) / (sc * r);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = t * x[i];
  project_to_ball(out, cfg);
}

void log_map_zero(std::span<const double> p, const BallConfig& cfg,
                  std::span<double> out) {
  if (!all_finite(p)) throw std::invalid_argument("log_map_zero: non-finite input");
  const double r = std::sqrt(kernels::squared_norm(p));
  if (r < 1e-300) {
    for (double& v : out) v = 0.0;
    return;
  }
  const double sc = std::sqrt(cfg.curvature);
  double arg = sc * r;
  const double lim = 1.0 - cfg.boundary_eps;
  if (arg > lim) {
    arg = lim;
    g_clip_count.fetch_add(1, std::memory_order_relaxed);
  }
  const double s = std::atanh(arg) / (sc * r);
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = s * p[i];
}

void project_to_ball(std::span<double> p, const BallConfig& cfg) {
  const double r = std::sqrt(kernels::squared_norm(p));
  const double lim = cfg.max_norm();
  if (r > lim) kernels::scale(lim / r, p);
}

void project_to_annulus(std::span<double> p, double min_norm,
                        const BallConfig& cfg) {
  project_to_ball(p, cfg);
  const double r = std::sqrt(kernels::squared_norm(p));
  if (r >= min_norm) return;
  if (r < 1e-300) {
    for (double& v : p) v = 0.0;
    p[0] = min_norm;
    return;
  }
  kernels::scale(min_norm / r, p);
}

double inverse_metric_factor(std::span<const double> p,
                             const BallConfig& cfg) {
  const double f = 1.0 - cfg.curvature * kernels::squared_norm(p);
  return f * f / 4.0;
}

void riemannian_rescale(std::span<double> grad, std::span<const double> p,
                        const BallConfig& cfg) {
  kernels::scale(inverse_metric_factor(p, cfg), grad);
}

void distance_gradient(std::span<const double> p1, std::span<const double> p2,
                       const BallConfig& cfg, std::span<double> grad_p1,
                       std::span<double> grad_p2) {
  // Work in unit-ball coordinates a = sqrt(c) p1, b = sqrt(c) p2 where
  //   d_c(p1, p2) = (1/sqrt(c)) arcosh(1 + 2||a-b||^2 / (alpha beta));
  // the scaling Jacobians cancel, so the unit-ball gradient at (a, b) is
  // exactly the gradient w.r.t. (p1, p2).
  const double c = cfg.curvature;
  const double aa = c * kernels::squared_norm(p1);
  const double bb = c * kernels::squared_norm(p2);
  const double ab = c * kernels::dot(p1, p2);
  const double alpha = 1.0 - aa;
  const double beta = 1.0 - bb;
  // ||a - b||^2 via the difference, not aa - 2ab + bb, to keep tiny
  // separations from cancelling away
  const double sq = c * kernels::squared_distance(p1, p2);
  const double g1 = 2.0 * sq / (alpha * beta);  // gamma - 1
  if (!(g1 > 1e-30))
    throw std::domain_error("distance_gradient: coincident points");
  // gamma^2 - 1 = g1 (g1 + 2), formed without cancellation
  const double coef = 4.0 / std::sqrt(g1 * (g1 + 2.0));
  const double sc = std::sqrt(c);

  // grad w.r.t. a, expressed through the original (unscaled) points:
  // a = sc*p1 etc., so substitute and fold one sc into the lincomb weights.
  const double ka = coef / beta;
  kernels::lincomb(ka * (bb - 2.0 * ab + 1.0) / (alpha * alpha) * sc, p1,
                   -ka / alpha * sc, p2, grad_p1);
  const double kb = coef / alpha;
  kernels::lincomb(kb * (aa - 2.0 * ab + 1.0) / (beta * beta) * sc, p2,
                   -kb / beta * sc, p1, grad_p2);
}

}  // namespace hyperclic::geometry
