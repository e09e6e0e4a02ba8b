#include <arm_neon.h>

#include <cassert>

#include "table.hpp"

// NEON kernels, 2 doubles per lane (aarch64).

namespace hyperclic::kernels::detail {
namespace {

double dot_neon(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(&x[i]), vld1q_f64(&y[i]));
    acc1 = vfmaq_f64(acc1, vld1q_f64(&x[i + 2]), vld1q_f64(&y[i + 2]));
  }
  for (; i + 2 <= n; i += 2) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(&x[i]), vld1q_f64(&y[i]));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double squared_norm_neon(std::span<const double> x) { return dot_neon(x, x); }

double squared_distance_neon(std::span<const double> x,
                             std::span<const double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(&x[i]), vld1q_f64(&y[i]));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

void axpy_neon(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(&y[i], vfmaq_f64(vld1q_f64(&y[i]), av, vld1q_f64(&x[i])));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double a, std::span<double> x) {
  const std::size_t n = x.size();
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(&x[i], vmulq_f64(av, vld1q_f64(&x[i])));
  }
  for (; i < n; ++i) x[i] *= a;
}

void lincomb_neon(double a, std::span<const double> x, double b,
                  std::span<const double> y, std::span<double> out) {
  assert(x.size() == y.size() && x.size() == out.size());
  const std::size_t n = x.size();
  const float64x2_t av = vdupq_n_f64(a);
  const float64x2_t bv = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t r =
        vfmaq_f64(vmulq_f64(bv, vld1q_f64(&y[i])), av, vld1q_f64(&x[i]));
    vst1q_f64(&out[i], r);
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void matvec_neon(std::span<const double> w, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<const double> bias,
                 std::span<double> out) {
  assert(w.size() == rows * cols && x.size() == cols && out.size() == rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = dot_neon({w.data() + r * cols, cols}, x);
    out[r] = bias.empty() ? s : s + bias[r];
  }
}

void matvec_t_neon(std::span<const double> w, std::size_t rows,
                   std::size_t cols, std::span<const double> g,
                   std::span<double> out) {
  assert(w.size() == rows * cols && g.size() == rows && out.size() == cols);
  for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    axpy_neon(g[r], {w.data() + r * cols, cols}, out);
  }
}

void rank1_update_neon(std::span<double> w, std::size_t rows, std::size_t cols,
                       double a, std::span<const double> g,
                       std::span<const double> x) {
  assert(w.size() == rows * cols && g.size() == rows && x.size() == cols);
  for (std::size_t r = 0; r < rows; ++r) {
    axpy_neon(a * g[r], x, {w.data() + r * cols, cols});
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable t = {
      dot_neon,      squared_norm_neon, squared_distance_neon,
      axpy_neon,     scale_neon,        lincomb_neon,
      matvec_neon,   matvec_t_neon,     rank1_update_neon,
  };
  return t;
}

}  // namespace hyperclic::kernels::detail
