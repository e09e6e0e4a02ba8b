#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Poincare-ball primitives with closed-form gradients. Points are plain
// double spans of a common dimension; all functions are pure and safe for
// concurrent use. Callers are expected to pass points strictly inside the
// ball of curvature cfg.curvature; projection helpers keep them there.

namespace hyperclic::geometry {

struct BallConfig {
  double curvature = 1.0;    // c > 0
  double boundary_eps = 1e-5;
  std::size_t dim = 2;

  // largest representable norm: (1/sqrt(c)) * (1 - boundary_eps)
  double max_norm() const;
  // throws std::invalid_argument if any field is out of range
  void validate() const;
};

// arctanh arguments that would reach the boundary are clipped to
// 1 - boundary_eps; the event is counted here rather than treated as fatal.
std::uint64_t arctanh_clip_count();
void reset_arctanh_clip_count();

// out = p1 (+)_c p2 (Mobius addition); result projected back into the ball
// if rounding pushed it out. Throws std::invalid_argument on non-finite
// input.
void mobius_add(std::span<const double> p1, std::span<const double> p2,
                const BallConfig& cfg, std::span<double> out);

// geodesic distance (2/sqrt(c)) * arctanh(sqrt(c) * ||-p1 (+)_c p2||)
double distance(std::span<const double> p1, std::span<const double> p2,
                const BallConfig& cfg);

// out = tanh(sqrt(c)||x||) * x / (sqrt(c)||x||); x = 0 maps to the origin,
// huge x lands on the boundary shell.
void exp_map_zero(std::span<const double> x, const BallConfig& cfg,
                  std::span<double> out);

// inverse of exp_map_zero
void log_map_zero(std::span<const double> p, const BallConfig& cfg,
                  std::span<double> out);

// rescale to max_norm() if the point is outside the allowed shell
void project_to_ball(std::span<double> p, const BallConfig& cfg);

// clamp the norm into [min_norm, max_norm()]; a zero vector is moved to
// (min_norm, 0, ..., 0)
void project_to_annulus(std::span<double> p, double min_norm,
                        const BallConfig& cfg);

// (1 - c||p||^2)^2 / 4, the inverse conformal factor at p
double inverse_metric_factor(std::span<const double> p, const BallConfig& cfg);

// Euclidean gradient -> tangent update: grad *= inverse_metric_factor(p)
void riemannian_rescale(std::span<double> grad, std::span<const double> p,
                        const BallConfig& cfg);

// Euclidean gradients of distance(p1, p2) w.r.t. both arguments. Throws
// std::domain_error for (numerically) coincident points; callers perturb.
void distance_gradient(std::span<const double> p1, std::span<const double> p2,
                       const BallConfig& cfg, std::span<double> grad_p1,
                       std::span<double> grad_p2);

}  // namespace hyperclic::geometry
