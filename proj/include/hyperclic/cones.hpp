#pragma once

#include <span>

#include "hyperclic/geometry.hpp"

// Entailment cones: every sufficiently off-center point v owns a geodesically
// convex cone opening away from the origin; descendants of v should lie
// inside it. Apertures follow the closed form psi(v) = arcsin(K(1-|v|^2)/|v|)
// with K fixed below; the aperture is undefined closer to the origin than
// norm K, so optimization keeps points outside that radius. Curvatures other
// than 1 are handled by scaling points into the unit ball (angles are
// unchanged, gradients pick up a sqrt(c) factor).

namespace hyperclic::embedding {

inline constexpr double kConeAperture = 0.1;    // K
inline constexpr double kConeMinNorm = kConeAperture + 1e-3;

// half-aperture psi(v) of the cone at v; throws std::domain_error when the
// (scaled) norm of v is below K
double cone_aperture(std::span<const double> v, const geometry::BallConfig& cfg);

// angle Xi(u, v) at apex v between the geodesic toward u and the ray from
// the origin through v; throws std::domain_error for coincident points or a
// zero apex
double cone_angle(std::span<const double> u, std::span<const double> v,
                  const geometry::BallConfig& cfg);

// max(0, Xi(u, v) - psi(v)): zero exactly when u lies inside v's cone
double cone_energy(std::span<const double> u, std::span<const double> v,
                   const geometry::BallConfig& cfg);

// energy plus Euclidean gradients w.r.t. u and v; gradients are zero when
// the energy is zero (hinge)
double cone_energy_gradient(std::span<const double> u,
                            std::span<const double> v,
                            const geometry::BallConfig& cfg,
                            std::span<double> grad_u, std::span<double> grad_v);

}  // namespace hyperclic::embedding
