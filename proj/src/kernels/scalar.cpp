#include "table.hpp"

#include <cassert>

// Reference kernels. These define the semantics the SIMD variants are
// equivalence-tested against.

namespace hyperclic::kernels::detail {
namespace {

double dot_scalar(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double squared_norm_scalar(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double squared_distance_scalar(std::span<const double> x,
                               std::span<const double> y) {
  assert(x.size() == y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

void axpy_scalar(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale_scalar(double a, std::span<double> x) {
  for (double& v : x) v *= a;
}

void lincomb_scalar(double a, std::span<const double> x, double b,
                    std::span<const double> y, std::span<double> out) {
  assert(x.size() == y.size() && x.size() == out.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
}

void matvec_scalar(std::span<const double> w, std::size_t rows,
                   std::size_t cols, std::span<const double> x,
                   std::span<const double> bias, std::span<double> out) {
  assert(w.size() == rows * cols && x.size() == cols && out.size() == rows);
  assert(bias.empty() || bias.size() == rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w.data() + r * cols;
    double s = bias.empty() ? 0.0 : bias[r];
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    out[r] = s;
  }
}

void matvec_t_scalar(std::span<const double> w, std::size_t rows,
                     std::size_t cols, std::span<const double> g,
                     std::span<double> out) {
  assert(w.size() == rows * cols && g.size() == rows && out.size() == cols);
  for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w.data() + r * cols;
    const double gr = g[r];
    for (std::size_t c = 0; c < cols; ++c) out[c] += gr * row[c];
  }
}

void rank1_update_scalar(std::span<double> w, std::size_t rows,
                         std::size_t cols, double a, std::span<const double> g,
                         std::span<const double> x) {
  assert(w.size() == rows * cols && g.size() == rows && x.size() == cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = w.data() + r * cols;
    const double ag = a * g[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += ag * x[c];
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t = {
      dot_scalar,      squared_norm_scalar, squared_distance_scalar,
      axpy_scalar,     scale_scalar,        lincomb_scalar,
      matvec_scalar,   matvec_t_scalar,     rank1_update_scalar,
  };
  return t;
}

}  // namespace hyperclic::kernels::detail
