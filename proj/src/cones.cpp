#include "hyperclic/cones.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hyperclic/kernels.hpp"

namespace hyperclic::embedding {
namespace {

// all quantities below live in unit-ball coordinates a = sqrt(c) * p

double aperture_scaled(double r) {
  if (r < kConeAperture)
    throw std::domain_error("cone_aperture: point inside the inner radius");
  const double s = std::min(1.0, kConeAperture * (1.0 - r * r) / r);
  return std::asin(s);
}

struct AngleParts {
  double q, nx, ny, e, d, a, b, cosxi;
};

// apex x, point y
AngleParts angle_parts(std::span<const double> y, std::span<const double> x,
                       double c) {
  AngleParts p{};
  p.q = c * kernels::dot(x, y);
  p.nx = c * kernels::squared_norm(x);
  p.ny = c * kernels::squared_norm(y);
  const double e2 = c * kernels::squared_distance(x, y);
  if (e2 < 1e-30 || p.nx < 1e-30)
    throw std::domain_error("cone_angle: coincident points or zero apex");
  p.e = std::sqrt(e2);
  p.d = 1.0 + p.nx * p.ny - 2.0 * p.q;
  p.a = p.q * (1.0 + p.nx) - p.nx * (1.0 + p.ny);
  p.b = std::sqrt(p.nx) * p.e * std::sqrt(p.d);
  p.cosxi = std::clamp(p.a / p.b, -1.0, 1.0);
  return p;
}

}  // namespace

double cone_aperture(std::span<const double> v,
                     const geometry::BallConfig& cfg) {
  const double r = std::sqrt(cfg.curvature * kernels::squared_norm(v));
  return aperture_scaled(r);
}

double cone_angle(std::span<const double> u, std::span<const double> v,
                  const geometry::BallConfig& cfg) {
  return std::acos(angle_parts(u, v, cfg.curvature).cosxi);
}

double cone_energy(std::span<const double> u, std::span<const double> v,
                   const geometry::BallConfig& cfg) {
  return std::max(0.0, cone_angle(u, v, cfg) - cone_aperture(v, cfg));
}

double cone_energy_gradient(std::span<const double> u,
                            std::span<const double> v,
                            const geometry::BallConfig& cfg,
                            std::span<double> grad_u,
                            std::span<double> grad_v) {
  const double c = cfg.curvature;
  const double sc = std::sqrt(c);
  const AngleParts p = angle_parts(u, v, c);
  const double rx = std::sqrt(p.nx);
  const double psi = aperture_scaled(rx);
  const double xi = std::acos(p.cosxi);
  const double energy = xi - psi;
  if (energy <= 0.0) {
    for (double& g : grad_u) g = 0.0;
    for (double& g : grad_v) g = 0.0;
    return 0.0;
  }

  const std::size_t dim = u.size();
  // scaled coordinates: x = sc*v (apex), y = sc*u
  std::vector<double> x(dim), y(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    x[i] = sc * v[i];
    y[i] = sc * u[i];
  }

  // dXi/dz = -(A' B - A B') / (B^2 sqrt(1 - cos^2)) for z in {x, y}
  const double sin2 = std::max(1e-12, 1.0 - p.cosxi * p.cosxi);
  const double dxi = -1.0 / std::sqrt(sin2);
  const double sqd = std::sqrt(p.d);

  std::vector<double> da(dim), db(dim), xm_y(dim);
  for (std::size_t i = 0; i < dim; ++i) xm_y[i] = x[i] - y[i];

  // w.r.t. the apex x
  for (std::size_t i = 0; i < dim; ++i) {
    da[i] = y[i] * (1.0 + p.nx) + 2.0 * x[i] * p.q - 2.0 * x[i] * (1.0 + p.ny);
    const double dd = 2.0 * x[i] * p.ny - 2.0 * y[i];
    db[i] = x[i] / rx * p.e * sqd + rx * xm_y[i] / p.e * sqd +
            rx * p.e * dd / (2.0 * sqd);
  }
  for (std::size_t i = 0; i < dim; ++i) {
    grad_v[i] = dxi * (da[i] * p.b - p.a * db[i]) / (p.b * p.b);
  }

  // aperture term: psi depends on the apex norm only
  const double s = kConeAperture * (1.0 - p.nx) / rx;
  if (s < 1.0) {
    const double dpsi_dr =
        -kConeAperture * (1.0 + p.nx) / p.nx / std::sqrt(1.0 - s * s);
    for (std::size_t i = 0; i < dim; ++i) {
      grad_v[i] -= dpsi_dr * x[i] / rx;
    }
  }

  // w.r.t. the point y
  for (std::size_t i = 0; i < dim; ++i) {
    da[i] = x[i] * (1.0 + p.nx) - 2.0 * y[i] * p.nx;
    const double dd = 2.0 * y[i] * p.nx - 2.0 * x[i];
    db[i] = rx * (-xm_y[i]) / p.e * sqd + rx * p.e * dd / (2.0 * sqd);
  }
  for (std::size_t i = 0; i < dim; ++i) {
    grad_u[i] = dxi * (da[i] * p.b - p.a * db[i]) / (p.b * p.b);
  }

  // chain rule back to the unscaled points
  kernels::scale(sc, grad_u);
  kernels::scale(sc, grad_v);
  return energy;
}

}  // namespace hyperclic::embedding
